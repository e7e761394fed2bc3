"""The quantized map U_N and its spectrum from periodic orbits.

``U psi(Q) = e_N(-(g Q)^2) psi(g Q)`` with g the inverse of the lattice
bijection f. U permutes lattice sites and attaches a quadratic phase, so
each cycle Q_0 -> Q_1 -> ... -> Q_{K-1} of f carries K eigenvectors:

    theta_k = -S + (N/K) k              (mod N),   S = (1/K) sum Q_j^2
    psi_k(Q_j) = sqrt(N/K) e_N(-j theta_k - (Q_0^2 + ... + Q_{j-1}^2))

and ``U psi_k = e_N(theta_k) psi_k``. Writing the phase as a gauge factor
times exp(-2 pi i j k / K) shows each orbit block is a rotated DFT, which
is how expectations are evaluated for all k at once.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .discretize import DiscreteMap
from .hilbert import PhaseRational, StateVector, amplitudes, phase_e_N, quadratic_phases, unit_roots
from .kernels import cycle_decompose, orbit_gauge

DEFAULT_ORACLE_LIMIT = 512


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class UnitaryMap:
    N: int
    fhat: DiscreteMap
    fhat_inv: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.fhat.N != self.N:
            raise ValueError("dimension of the map does not match N")
        inv = self.fhat.inverse()
        inv.setflags(write=False)
        object.__setattr__(self, "fhat_inv", inv)
        object.__setattr__(self, "_phase", quadratic_phases(self.N))

    @classmethod
    def from_perm(cls, perm):
        m = DiscreteMap.from_perm(perm)
        return cls(m.N, m)


def _check_dim(U, a):
    if a.shape[0] != U.N:
        raise ValueError(f"dimension mismatch: state has {a.shape[0]}, map has {U.N}")


def apply_U(U: UnitaryMap, psi) -> StateVector:
    a = amplitudes(psi)
    _check_dim(U, a)
    out = np.empty_like(a)
    out[U.fhat.perm] = U._phase * a
    return StateVector(out)


def apply_U_adjoint(U: UnitaryMap, psi) -> StateVector:
    a = amplitudes(psi)
    _check_dim(U, a)
    return StateVector(np.conj(U._phase) * a[U.fhat.perm])


def dense_matrix(U: UnitaryMap, oracle_limit: int = DEFAULT_ORACLE_LIMIT) -> np.ndarray:
    """M[Q, Q'] = e_N(-Q'^2) when f(Q') = Q, else 0."""
    if U.N > oracle_limit:
        raise OracleLimitError(f"N = {U.N} exceeds the dense oracle limit {oracle_limit}")
    M = np.zeros((U.N, U.N), dtype=np.complex128)
    M[U.fhat.perm, np.arange(U.N)] = U._phase
    return M


@dataclass(frozen=True, eq=False)
class OrbitDecomposition:
    """Cycles of a bijection, each starting at its minimum, sorted by minimum."""

    N: int
    order: np.ndarray
    starts: np.ndarray

    @property
    def orbits(self) -> list:
        return [self.order[a:b] for a, b in zip(self.starts[:-1], self.starts[1:])]

    def __len__(self):
        return len(self.starts) - 1

    def __getitem__(self, i):
        return self.order[self.starts[i]:self.starts[i + 1]]

    def sizes(self) -> np.ndarray:
        return np.diff(self.starts)

    def orbit_of(self) -> np.ndarray:
        """Orbit index of every lattice point."""
        lab = np.empty(self.N, dtype=np.int64)
        lab[self.order] = np.repeat(np.arange(len(self)), self.sizes())
        return lab


def orbit_decompose(m) -> OrbitDecomposition:
    perm = m.perm if isinstance(m, DiscreteMap) else (m.fhat.perm if isinstance(m, UnitaryMap) else np.asarray(m))
    order, starts = cycle_decompose(perm)
    return OrbitDecomposition(len(perm), order, starts)


def orbit_action(orbit) -> Fraction:
    """S = (sum of Q^2 over the orbit) / K, exactly."""
    o = [int(q) for q in orbit]
    if not o:
        raise ValueError("empty orbit")
    return Fraction(sum(q * q for q in o), len(o))


@dataclass(frozen=True, eq=False)
class OrbitBasis:
    """The K eigenvectors living on one orbit, stored compactly.

    ``gauge`` holds integers g_j modulo N*K with
    psi_k(Q_j) = sqrt(N/K) exp(2 pi i g_j/(N K)) exp(-2 pi i j k / K).
    """

    orbit_id: int
    N: int
    points: np.ndarray
    gauge: np.ndarray
    sum_sq: int

    @property
    def K(self) -> int:
        return int(self.points.shape[0])

    def theta(self, k: int) -> PhaseRational:
        return PhaseRational(Fraction(-self.sum_sq + self.N * k, self.K), self.N)

    def thetas(self) -> list:
        return [self.theta(k) for k in range(self.K)]

    def gauge_phases(self) -> np.ndarray:
        return unit_roots(self.gauge, self.N * self.K)

    def values(self, k: int) -> np.ndarray:
        """Amplitudes of psi_k at the orbit points, in orbit order."""
        j = np.arange(self.K, dtype=np.int64)
        dft = unit_roots(-(j * k) % self.K, self.K)
        return np.sqrt(self.N / self.K) * self.gauge_phases() * dft

    def vector(self, k: int) -> StateVector:
        out = np.zeros(self.N, dtype=np.complex128)
        out[self.points] = self.values(k)
        return StateVector(out)

    def block(self) -> np.ndarray:
        """All K vectors restricted to the orbit: column k is psi_k."""
        j = np.arange(self.K, dtype=np.int64)
        dft = unit_roots(-np.outer(j, j) % self.K, self.K)
        return np.sqrt(self.N / self.K) * self.gauge_phases()[:, None] * dft


@dataclass(frozen=True, eq=False)
class EigenPair:
    theta: PhaseRational
    orbit_id: int
    k: int
    basis: OrbitBasis = field(repr=False)

    @cached_property
    def vector(self) -> StateVector:
        return self.basis.vector(self.k)

    @property
    def eigenvalue(self) -> complex:
        return self.theta.unit()


def orbit_basis(orbit, N: int, orbit_id: int = 0) -> OrbitBasis:
    o = np.ascontiguousarray(orbit, dtype=np.int64)
    return OrbitBasis(orbit_id, N, o, orbit_gauge(o, N), int(sum(int(q) * int(q) for q in o.tolist())))


def eigenpairs_for_orbit(orbit, N: int, orbit_id: int = 0) -> list:
    b = orbit_basis(orbit, N, orbit_id)
    return [EigenPair(b.theta(k), orbit_id, k, b) for k in range(b.K)]


class Spectrum:
    """All N eigenpairs of U, organised by orbit."""

    def __init__(self, U: UnitaryMap, decomposition: OrbitDecomposition | None = None):
        self.U = U
        self.N = U.N
        self.decomposition = decomposition or orbit_decompose(U.fhat)
        self.bases = [orbit_basis(o, self.N, i) for i, o in enumerate(self.decomposition.orbits)]

    def __len__(self):
        return self.N

    def __iter__(self):
        for b in self.bases:
            for k in range(b.K):
                yield EigenPair(b.theta(k), b.orbit_id, k, b)

    @property
    def pairs(self) -> list:
        return list(self)

    def eigenvalues(self) -> np.ndarray:
        out = []
        for b in self.bases:
            k = np.arange(b.K, dtype=np.int64)
            num = (-b.sum_sq + self.N * k) % (self.N * b.K)
            out.append(unit_roots(num, self.N * b.K))
        return np.concatenate(out)

    def dense_vectors(self, oracle_limit: int = DEFAULT_ORACLE_LIMIT) -> np.ndarray:
        """N x N matrix whose columns are the eigenvectors, in pair order."""
        if self.N > oracle_limit:
            raise OracleLimitError(f"N = {self.N} exceeds the dense oracle limit {oracle_limit}")
        V = np.zeros((self.N, self.N), dtype=np.complex128)
        c = 0
        for b in self.bases:
            V[b.points, c:c + b.K] = b.block()
            c += b.K
        return V

    def residuals(self) -> np.ndarray:
        """||U psi - e_N(theta) psi|| (normalized inner product) for every pair."""
        out = np.empty(self.N)
        ev = self.eigenvalues()
        perm = self.U.fhat.perm
        phase = self.U._phase
        c = 0
        for b in self.bases:
            blk = b.block()
            pts = b.points
            # U acts on the orbit: value at f(Q_j) = phase(Q_j) * psi(Q_j)
            pos = np.empty(self.N, dtype=np.int64)
            pos[pts] = np.arange(b.K)
            moved = np.empty_like(blk)
            moved[pos[perm[pts]]] = phase[pts][:, None] * blk
            diff = moved - blk * ev[c:c + b.K][None, :]
            out[c:c + b.K] = np.sqrt((np.abs(diff) ** 2).sum(axis=0) / self.N)
            c += b.K
        return out

    def to_csv(self, header: str | None = None, residuals: np.ndarray | None = None) -> str:
        buf = io.StringIO()
        if header:
            buf.write(header.rstrip("\n") + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["orbit_id", "K", "k", "theta_num", "theta_den", "residual"])
        res = self.residuals() if residuals is None else residuals
        c = 0
        for b in self.bases:
            for k in range(b.K):
                th = b.theta(k)
                w.writerow([b.orbit_id, b.K, k, th.numerator, th.denominator, f"{res[c]:.17g}"])
                c += 1
        return buf.getvalue()


def full_spectrum(U: UnitaryMap) -> Spectrum:
    return Spectrum(U)


def eigenvalue_of(pair: EigenPair) -> complex:
    return phase_e_N(pair.theta.value, pair.theta.modulus)
