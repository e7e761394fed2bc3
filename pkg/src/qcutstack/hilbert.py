"""The N-dimensional state space: vectors, exact phases, inner product.

States are arrays of N complex amplitudes indexed by Q in Z_N with the
inner product ``<psi, phi> = (1/N) sum conj(psi(Q)) phi(Q)``. Phases
``e_N(x) = exp(2 pi i x / N)`` are kept as exact rationals and only
exponentiated at the end, after reduction mod N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True, eq=False)
class StateVector:
    """Immutable vector of N complex amplitudes."""

    amps: np.ndarray

    def __post_init__(self):
        a = np.array(self.amps, dtype=np.complex128, copy=True)
        if a.ndim != 1 or a.shape[0] < 1:
            raise ValueError("a state needs a non-empty 1-D amplitude array")
        a.setflags(write=False)
        object.__setattr__(self, "amps", a)

    @property
    def dim(self) -> int:
        return int(self.amps.shape[0])

    def norm(self) -> float:
        return math.sqrt(max(inner_product(self, self).real, 0.0))

    def __len__(self):
        return self.dim


def amplitudes(psi) -> np.ndarray:
    """Amplitude array of a StateVector or array-like."""
    if isinstance(psi, StateVector):
        return psi.amps
    a = np.asarray(psi, dtype=np.complex128)
    if a.ndim != 1 or a.shape[0] < 1:
        raise ValueError("a state needs a non-empty 1-D amplitude array")
    return a


def inner_product(psi, phi) -> complex:
    a, b = amplitudes(psi), amplitudes(phi)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return complex(np.vdot(a, b) / a.shape[0])


@dataclass(frozen=True)
class PhaseRational:
    """An exact phase x for e_N(x), stored reduced into [0, N)."""

    value: Fraction
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        object.__setattr__(self, "value", reduce_phase(self.value, self.modulus))

    def __add__(self, other):
        if isinstance(other, PhaseRational):
            if other.modulus != self.modulus:
                raise ValueError("phase moduli differ")
            other = other.value
        return PhaseRational(self.value + Fraction(other), self.modulus)

    def __neg__(self):
        return PhaseRational(-self.value, self.modulus)

    def __sub__(self, other):
        if isinstance(other, PhaseRational):
            return self + (-other)
        return self + (-Fraction(other))

    def unit(self) -> complex:
        return phase_e_N(self.value, self.modulus)

    @property
    def numerator(self) -> int:
        return self.value.numerator

    @property
    def denominator(self) -> int:
        return self.value.denominator

    def __float__(self):
        return float(self.value)


def reduce_phase(x, n: int) -> Fraction:
    """Exact representative of x mod n in [0, n)."""
    if isinstance(x, PhaseRational):
        x = x.value
    if isinstance(x, float):
        raise TypeError("phases must be exact (int or Fraction), not float")
    x = Fraction(x)
    return x - n * (x // n)


def phase_e_N(x, n: int) -> complex:
    """e_N(x) = exp(2 pi i x / N) with x reduced mod N before rounding."""
    if n < 1:
        raise ValueError("N must be positive")
    r = reduce_phase(x, n)
    num, den = r.numerator, r.denominator * n
    # exact values on the quarter turns keep symmetric cases clean
    q4 = Fraction(4 * num, den)
    if q4.denominator == 1:
        return (1 + 0j, 1j, -1 + 0j, -1j)[int(q4) % 4]
    return complex(np.exp(2j * np.pi * (num / den)))


def unit_roots(numerators, denominator: int) -> np.ndarray:
    """exp(2 pi i m / d) for an integer array m, reduced mod d first."""
    m = np.mod(np.asarray(numerators, dtype=np.int64), denominator)
    return np.exp((2j * np.pi / denominator) * m.astype(np.float64))


def quadratic_phases(n: int) -> np.ndarray:
    """The vector e_N(-Q^2) for Q = 0..N-1, from Q^2 reduced mod N."""
    q = np.arange(n, dtype=np.int64)
    return unit_roots(-((q * q) % n), n)


def gaussian_state(s, n: int, m_max: int = 3) -> StateVector:
    """Periodized Gaussian of width 1/sqrt(N) centred at s.

    ``psi(Q) = sum_{|m| <= m_max} sqrt(N) exp(-(Q/N - s - m)^2 N)``.
    Each discarded image sits at distance at least m_max from Q/N - s, so
    the tail is of order exp(-m_max^2 N): below 1e-12 for m_max = 3 once
    N >= 4, but up to about 1e-4 at N = 1.
    """
    if n < 1 or m_max < 1:
        raise ValueError("need N >= 1 and m_max >= 1")
    s = Fraction(s) if not isinstance(s, float) else s
    if not (0 <= s < 1):
        raise ValueError("centre must lie in [0, 1)")
    q = np.arange(n, dtype=np.float64) / n
    x = q - float(s)
    amps = np.zeros(n, dtype=np.float64)
    for m in range(-m_max, m_max + 1):
        amps += np.exp(-((x - m) ** 2) * n)
    return StateVector(math.sqrt(n) * amps)
