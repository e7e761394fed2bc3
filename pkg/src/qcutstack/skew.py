"""Skew product F(p, q) = (p + 2q, f(q)) and trigonometric observables.

An observable is a finite Fourier series on the torus,

    a(p, q) = sum_n a_n e(n1 p - n2 q),     e(x) = exp(2 pi i x),

so that ``a_n`` is the integral of ``a(z) e(q n2 - p n1)``. Modes with
``n1 = 0`` depend on q only. Under the linear part F1(p, q) = (p + 2q, q)
the mode ``(n1, n2)`` becomes ``(n1, n2 - 2 n1)``, which fixes the
coefficient remap in ``pullback_F1``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cutstack import IntervalQ, as_rational


class SingularPointError(ValueError):
    """The classical map is undefined at the given q."""

    def __init__(self, q):
        super().__init__(f"map undefined at q = {q}")
        self.q = q


@dataclass(frozen=True)
class TorusPoint:
    p: Fraction
    q: Fraction

    def __post_init__(self):
        p, q = as_rational(self.p), as_rational(self.q)
        object.__setattr__(self, "p", p - (p // 1))
        object.__setattr__(self, "q", q - (q // 1))


def eval_F(f, z: TorusPoint) -> TorusPoint:
    """F(p, q) = (p + 2q mod 1, f(q)); raises SingularPointError if f(q) is undefined."""
    fq = f(z.q)
    if fq is None:
        raise SingularPointError(z.q)
    return TorusPoint(z.p + 2 * z.q, fq)


def _mode_key(key):
    if isinstance(key, str):
        a, b = key.split(",")
        return int(a), int(b)
    n1, n2 = key
    return int(n1), int(n2)


@dataclass(frozen=True, eq=False)
class FourierObservable:
    """Finitely many Fourier modes ``{(n1, n2): coefficient}``."""

    coeffs: dict
    real: bool = False

    def __post_init__(self):
        c = {}
        for k, v in dict(self.coeffs).items():
            v = complex(v)
            if v != 0:
                c[_mode_key(k)] = v
        object.__setattr__(self, "coeffs", c)
        if self.real and not self.is_real(tol=1e-14):
            raise ValueError("coefficients violate a_{-n} = conj(a_n)")

    @property
    def cutoff(self) -> int:
        return max((max(abs(a), abs(b)) for a, b in self.coeffs), default=0)

    @property
    def mean(self) -> complex:
        return self.coeffs.get((0, 0), 0j)

    @property
    def q_only(self) -> bool:
        return all(n1 == 0 for n1, _ in self.coeffs)

    def is_real(self, tol=0.0) -> bool:
        for (n1, n2), v in self.coeffs.items():
            w = self.coeffs.get((-n1, -n2), 0j)
            if abs(v - w.conjugate()) > tol:
                return False
        return True

    def by_row(self) -> dict:
        """Coefficients grouped as ``{n1: {n2: a_n}}``."""
        rows = {}
        for (n1, n2), v in sorted(self.coeffs.items()):
            rows.setdefault(n1, {})[n2] = v
        return rows

    def __call__(self, p, q):
        """Evaluate at real (p, q); broadcasting over numpy arrays."""
        p = np.asarray(p, dtype=np.float64)
        q = np.asarray(q, dtype=np.float64)
        out = np.zeros(np.broadcast(p, q).shape, dtype=np.complex128)
        for (n1, n2), v in sorted(self.coeffs.items()):
            out = out + v * np.exp(2j * np.pi * (n1 * p - n2 * q))
        return out

    def eval_q(self, q):
        """Evaluate a q-only observable at real q (numpy broadcasting)."""
        if not self.q_only:
            raise ValueError("observable depends on p")
        q = np.asarray(q, dtype=np.float64)
        out = np.zeros(q.shape, dtype=np.complex128)
        for (_, n2), v in sorted(self.coeffs.items()):
            out = out + v * np.exp(-2j * np.pi * n2 * q)
        return out

    def scaled(self, c) -> "FourierObservable":
        return FourierObservable({k: c * v for k, v in self.coeffs.items()})

    def __add__(self, other):
        c = dict(self.coeffs)
        for k, v in other.coeffs.items():
            c[k] = c.get(k, 0j) + v
        return FourierObservable(c, self.real and other.real)

    def to_dict(self) -> dict:
        return {f"{n1},{n2}": [v.real, v.imag] for (n1, n2), v in sorted(self.coeffs.items())}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d, real=False):
        return cls({_mode_key(k): complex(v[0], v[1]) for k, v in d.items()}, real)

    @classmethod
    def from_json(cls, text, real=False):
        return cls.from_dict(json.loads(text), real)


def constant(c=1.0) -> FourierObservable:
    return FourierObservable({(0, 0): c}, real=True)


def cos_q(k: int, amp=1.0) -> FourierObservable:
    """amp * cos(2 pi k q)."""
    return FourierObservable({(0, k): amp / 2, (0, -k): amp / 2}, real=True)


def sin_q(k: int, amp=1.0) -> FourierObservable:
    """amp * sin(2 pi k q); note e(-n2 q) carries the sign."""
    return FourierObservable({(0, -k): amp / 2j, (0, k): -amp / 2j}, real=True)


def cos_p(k: int, amp=1.0) -> FourierObservable:
    """amp * cos(2 pi k p)."""
    return FourierObservable({(k, 0): amp / 2, (-k, 0): amp / 2}, real=True)


def pullback_F1(a: FourierObservable) -> FourierObservable:
    """a composed with (p, q) -> (p + 2q, q), as an exact remap of modes."""
    return FourierObservable({(m1, m2 - 2 * m1): v for (m1, m2), v in a.coeffs.items()}, a.real)


def pushforward_F1(a: FourierObservable) -> FourierObservable:
    """Inverse of ``pullback_F1``."""
    return FourierObservable({(m1, m2 + 2 * m1): v for (m1, m2), v in a.coeffs.items()}, a.real)


@dataclass(frozen=True, eq=False)
class Bump:
    observable: FourierObservable
    deviation: float
    warning: bool


def _jackson_weights(n_max: int) -> np.ndarray:
    """Fourier multipliers of the Jackson kernel of degree 2*(n_max//2)."""
    m = n_max // 2
    fej = 1.0 - np.abs(np.arange(-m, m + 1)) / (m + 1)
    w = np.convolve(fej, fej)
    return w / w[len(w) // 2]


def bump_observable(support: IntervalQ, margin, n_max: int, grid: int = 8192) -> Bump:
    """Smooth q-only bump: near 1 on ``support``, near 0 beyond ``margin``.

    The indicator of the support widened by half the margin is convolved
    with a Jackson kernel (a non-negative trigonometric kernel), so values
    stay in [0, 1]. The sup deviation from 1 on the support and from 0
    outside the collar is measured on a fine grid and returned.
    """
    margin = as_rational(margin)
    if margin <= 0:
        raise ValueError("margin must be positive")
    a, b = support.left, support.right
    if b - a + 2 * margin >= 1:
        if a == 0 and b == 1:
            return Bump(constant(1.0), 0.0, False)
        raise ValueError("support plus collar must fit inside the circle")
    lo = float(a) - float(margin) / 2
    hi = float(b) + float(margin) / 2
    w = _jackson_weights(max(n_max, 2))
    m = (len(w) - 1) // 2
    coeffs = {(0, 0): hi - lo}
    for k in range(1, m + 1):
        c = (np.exp(2j * np.pi * k * hi) - np.exp(2j * np.pi * k * lo)) / (2j * np.pi * k) * w[m + k]
        coeffs[(0, k)] = complex(c)
        coeffs[(0, -k)] = complex(c).conjugate()
    obs = FourierObservable(coeffs, real=True)
    q = np.arange(grid) / grid
    vals = obs.eval_q(q).real
    inside = (q >= float(a)) & (q <= float(b))
    outside = ((q - float(a)) % 1.0 > float(b - a + margin)) & ((float(a) - q) % 1.0 > float(margin))
    dev = 0.0
    if inside.any():
        dev = max(dev, float(np.abs(vals[inside] - 1).max()))
    if outside.any():
        dev = max(dev, float(np.abs(vals[outside]).max()))
    flag = dev > 0.5
    if flag:
        warnings.warn(f"degree {n_max} cannot resolve margin {margin}: deviation {dev:.3g}")
    return Bump(obs, dev, flag)


def lipschitz_bound(a: FourierObservable) -> float:
    """Upper bound on |da/dq| from the coefficients."""
    return sum(2 * math.pi * abs(n2) * abs(v) for (_, n2), v in a.coeffs.items())
