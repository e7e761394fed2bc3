"""Weyl quantization on the N-dimensional torus Hilbert space.

Translation operators act by

    T(n) psi(Q) = e_N(n1 n2 / 2 - n2 Q) psi(Q - n1),

with the half-integer phase evaluated as an integer power of the
2N-th root of unity. This choice satisfies

* T(n) T(m) = e_N(-(n2 m1 - n1 m2) / 2) T(n + m),
* T(n)* = T(-n), so Op[a] is Hermitian for real a,
* a q-only observable acts as multiplication by a(Q/N),
* U1* Op[a] U1 = Op[a o F1] for U1 = e_N(-Q^2), F1(p, q) = (p + 2q, q).

``Op[a] = sum_n a_n T(n)``. The classically evolved observable a o F,
F(p, q) = (p + 2q, f(q)), is quantized by evaluating each p-frequency
row at the Weyl midpoints (Q - n1/2)/N.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .discretize import DeltaReport, lattice_image
from .hilbert import StateVector, amplitudes, inner_product, unit_roots
from .qmap import DEFAULT_ORACLE_LIMIT, OracleLimitError, Spectrum, UnitaryMap, apply_U, apply_U_adjoint, dense_matrix
from .skew import FourierObservable


class AliasingError(ValueError):
    pass


@dataclass(frozen=True)
class TranslationIndex:
    n1: int
    n2: int

    def check(self, N: int):
        if abs(self.n1) >= N or abs(self.n2) >= N:
            raise AliasingError(f"mode {(self.n1, self.n2)} not below N = {N}")


def _guard(a: FourierObservable, N: int):
    if a.cutoff >= N:
        raise AliasingError(f"observable has modes up to {a.cutoff}, needs < N = {N}")


def _row_phase(n1: int, n2s, N: int) -> np.ndarray:
    """e_N(n1 n2/2 - n2 Q) for each n2 (rows) and Q (columns)."""
    q = np.arange(N, dtype=np.int64)
    n2 = np.asarray(n2s, dtype=np.int64)[:, None]
    return unit_roots(n1 * n2 - 2 * n2 * q[None, :], 2 * N)


def apply_translation(n, psi) -> StateVector:
    if not isinstance(n, TranslationIndex):
        n = TranslationIndex(*n)
    a = amplitudes(psi)
    N = a.shape[0]
    n.check(N)
    return StateVector(_row_phase(n.n1, [n.n2], N)[0] * np.roll(a, n.n1))


def _row_functions(a: FourierObservable, N: int) -> dict:
    """{n1: g(Q)} with Op[a] psi(Q) = sum_n1 g_n1(Q) psi(Q - n1)."""
    rows = {}
    for n1, modes in a.by_row().items():
        n2 = list(modes)
        c = np.array([modes[k] for k in n2], dtype=np.complex128)
        rows[n1] = c @ _row_phase(n1, n2, N)
    return rows


def apply_op(a: FourierObservable, psi) -> StateVector:
    v = amplitudes(psi)
    N = v.shape[0]
    _guard(a, N)
    out = np.zeros(N, dtype=np.complex128)
    for n1, g in _row_functions(a, N).items():
        out += g * np.roll(v, n1)
    return StateVector(out)


def op_matrix(a: FourierObservable, N: int, oracle_limit: int = DEFAULT_ORACLE_LIMIT) -> np.ndarray:
    """Dense Op[a] (oracle use)."""
    if N > oracle_limit:
        raise OracleLimitError(f"N = {N} exceeds the dense oracle limit {oracle_limit}")
    _guard(a, N)
    M = np.zeros((N, N), dtype=np.complex128)
    q = np.arange(N)
    for n1, g in _row_functions(a, N).items():
        M[q, (q - n1) % N] += g
    return M


def op_trace(a: FourierObservable, N: int) -> complex:
    """(1/N) Tr Op[a]; every T(n) with 0 < |n_i| < N is traceless."""
    _guard(a, N)
    return complex(a.mean)


def dense_trace(a: FourierObservable, N: int) -> complex:
    """(1/N) Tr Op[a] by summing the diagonal of the dense matrix."""
    return complex(np.trace(op_matrix(a, N, oracle_limit=max(N, DEFAULT_ORACLE_LIMIT))) / N)


def expectation(a: FourierObservable, psi) -> complex:
    return inner_product(psi, apply_op(a, psi))


# ---------------------------------------------------------------------------
# evolved observables


def _composed_rows(a: FourierObservable, f, N: int) -> dict:
    """Row functions of Op[a o F] at the Weyl midpoints (Q - n1/2)/N."""
    img2 = None
    rows = {}
    q = np.arange(N, dtype=np.int64)
    for n1, modes in a.by_row().items():
        if n1 == 0:
            fq = lattice_image(f, N) / N
        else:
            if img2 is None:
                img2 = lattice_image(f, 2 * N) / (2 * N)
            fq = img2[(2 * q - n1) % (2 * N)]
        if np.isnan(fq).any():
            bad = int(np.flatnonzero(np.isnan(fq))[0])
            raise ValueError(f"classical map undefined at a point needed for row n1={n1} (Q={bad})")
        x = (2 * q - n1) / (2 * N)
        acc = np.zeros(N, dtype=np.complex128)
        for n2, c in modes.items():
            acc += c * np.exp(2j * np.pi * (2 * n1 * x - n2 * fq))
        rows[n1] = acc
    return rows


def apply_op_composed(a: FourierObservable, f, psi) -> StateVector:
    """Op[a o F] psi with F(p, q) = (p + 2q, f(q))."""
    v = amplitudes(psi)
    N = v.shape[0]
    _guard(a, N)
    out = np.zeros(N, dtype=np.complex128)
    for n1, g in _composed_rows(a, f, N).items():
        out += g * np.roll(v, n1)
    return StateVector(out)


def composed_matrix(a: FourierObservable, f, N: int, oracle_limit: int = DEFAULT_ORACLE_LIMIT) -> np.ndarray:
    if N > oracle_limit:
        raise OracleLimitError(f"N = {N} exceeds the dense oracle limit {oracle_limit}")
    M = np.zeros((N, N), dtype=np.complex128)
    q = np.arange(N)
    for n1, g in _composed_rows(a, f, N).items():
        M[q, (q - n1) % N] += g
    return M


def power_norm(apply, apply_adj, N: int, tol: float = 1e-8, max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value by power iteration on A* A."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = apply_adj(apply(v))
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        new = float(np.sqrt(nw))
        v = w / nw
        if abs(new - lam) <= tol * max(new, 1e-300):
            return new
        lam = new
    return lam


@dataclass(frozen=True)
class EgorovReport:
    defect: float
    path: str
    n_undefined: int
    delta: DeltaReport | None = None
    bump_deviation: float = 0.0

    @property
    def ratio(self) -> float:
        if self.delta is None:
            return float("nan")
        if self.delta.value == 0:
            return 0.0 if self.defect == 0 else float("inf")
        return self.defect / self.delta.value


def egorov_defect(a: FourierObservable, f, U: UnitaryMap, epsilon=None, fS_image=None,
                  path: str = "auto", oracle_limit: int = DEFAULT_ORACLE_LIMIT,
                  bump_deviation: float = 0.0, matrix_free: bool = False) -> EgorovReport:
    """Size of U* Op[a] U - Op[a o F].

    For q-only a the operator is multiplication by a(f_N(Q/N)) - a(f(Q/N))
    and its norm is the sup over lattice points where f is defined. Other
    observables go through dense matrices (N up to ``oracle_limit``) or,
    with ``matrix_free``, power iteration.
    """
    from .discretize import delta_N

    if not a.is_real(tol=1e-12):
        raise ValueError("the defect is defined for real observables")
    N = U.N
    _guard(a, N)
    delta = None
    if epsilon is not None and fS_image is not None:
        delta = delta_N(f, U.fhat, epsilon, fS_image)
    if path == "auto":
        path = "q-only" if a.q_only else "general"
    if path == "q-only":
        if not a.q_only:
            raise ValueError("q-only path needs an observable independent of p")
        fx = lattice_image(f, N) / N
        ok = ~np.isnan(fx)
        fn = U.fhat.perm / N
        d = np.abs(a.eval_q(fn[ok]) - a.eval_q(fx[ok]))
        return EgorovReport(float(d.max(initial=0.0)), path, int((~ok).sum()), delta, bump_deviation)
    if N <= oracle_limit:
        M = dense_matrix(U, oracle_limit)
        D = M.conj().T @ op_matrix(a, N, oracle_limit) @ M - composed_matrix(a, f, N, oracle_limit)
        return EgorovReport(float(np.linalg.norm(D, 2)), "dense", 0, delta, bump_deviation)
    if not matrix_free:
        raise OracleLimitError(f"general path limited to N <= {oracle_limit}; use a q-only observable")

    def fwd(v):
        return (apply_U_adjoint(U, apply_op(a, apply_U(U, v))).amps - apply_op_composed(a, f, v).amps)

    b = FourierObservable({(-n1, -n2): np.conj(c) for (n1, n2), c in a.coeffs.items()})

    def adj(v):
        # a is real, so the defect operator is Hermitian up to the midpoint rule;
        # use the exact adjoint of each piece anyway
        return apply_U_adjoint(U, apply_op(b, apply_U(U, v))).amps - _composed_adjoint(a, f, v)

    return EgorovReport(power_norm(fwd, adj, N), "power", 0, delta, bump_deviation)


def _composed_adjoint(a, f, v):
    N = v.shape[0]
    out = np.zeros(N, dtype=np.complex128)
    for n1, g in _composed_rows(a, f, N).items():
        out += np.roll(np.conj(g) * v, -n1)
    return out


def defect_on_state(a: FourierObservable, f, U: UnitaryMap, psi) -> float:
    """||(U* Op[a] U - Op[a o F]) psi|| / ||psi||."""
    v = amplitudes(psi)
    lhs = apply_U_adjoint(U, apply_op(a, apply_U(U, v))).amps
    rhs = apply_op_composed(a, f, v).amps
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(v))


# ---------------------------------------------------------------------------
# matrix elements in the orbit basis


def orbit_expectations(a: FourierObservable, basis) -> np.ndarray:
    """<psi_k, Op[a] psi_k> for all k of one orbit basis."""
    N, K = basis.N, basis.K
    pts = basis.points
    out = np.zeros(K, dtype=np.complex128)
    rows = _row_functions(a, N)
    G = basis.gauge_phases()
    pos = None
    for n1, g in rows.items():
        if n1 == 0:
            out += g[pts].mean()
            continue
        if pos is None:
            pos = {int(p): j for j, p in enumerate(pts.tolist())}
        prev = [pos.get(int((p - n1) % N), -1) for p in pts.tolist()]
        prev = np.array(prev, dtype=np.int64)
        on = prev >= 0
        if not on.any():
            continue
        j = np.flatnonzero(on)
        i = prev[on]
        c = np.conj(G[j]) * G[i] * g[pts[j]]
        C = np.zeros(K, dtype=np.complex128)
        np.add.at(C, (j - i) % K, c)
        out += np.fft.ifft(C)
    return out


def spectrum_expectations(a: FourierObservable, spectrum: Spectrum) -> np.ndarray:
    """Diagonal matrix elements of Op[a] for all N eigenpairs, in pair order."""
    _guard(a, spectrum.N)
    if a.q_only:
        g = _row_functions(a, spectrum.N).get(0, np.zeros(spectrum.N, dtype=np.complex128))
        dec = spectrum.decomposition
        lab = np.repeat(np.arange(len(dec)), dec.sizes())
        sums = np.bincount(lab, weights=g[dec.order].real, minlength=len(dec)) \
            + 1j * np.bincount(lab, weights=g[dec.order].imag, minlength=len(dec))
        means = sums / dec.sizes()
        return np.repeat(means, dec.sizes())
    return np.concatenate([orbit_expectations(a, b) for b in spectrum.bases])


def qe_variance(a: FourierObservable, pairs) -> float:
    """(1/N) sum_k |<psi_k, Op[a] psi_k> - mean(a)| over a complete eigenbasis."""
    if isinstance(pairs, Spectrum):
        vals = spectrum_expectations(a, pairs)
        N = pairs.N
    else:
        pairs = list(pairs)
        if not pairs:
            raise ValueError("empty eigenbasis")
        N = pairs[0].basis.N
        keys = {(p.orbit_id, p.k) for p in pairs}
        if len(pairs) != N or len(keys) != N:
            raise ValueError(f"need a complete basis of {N} distinct pairs, got {len(keys)}")
        cache = {}
        vals = []
        for p in pairs:
            b = p.basis
            if id(b) not in cache:
                cache[id(b)] = orbit_expectations(a, b)
            vals.append(cache[id(b)][p.k])
        vals = np.array(vals)
    return float(np.abs(vals - a.mean).sum() / N)


def matrix_elements_csv(a: FourierObservable, spectrum: Spectrum, header: str | None = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(header.rstrip("\n") + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["orbit_id", "k", "theta", "re_expect", "im_expect"])
    vals = spectrum_expectations(a, spectrum)
    c = 0
    for b in spectrum.bases:
        for k in range(b.K):
            th = b.theta(k).value
            w.writerow([b.orbit_id, k, f"{th.numerator}/{th.denominator}",
                        f"{vals[c].real:.17g}", f"{vals[c].imag:.17g}"])
            c += 1
    return buf.getvalue()
