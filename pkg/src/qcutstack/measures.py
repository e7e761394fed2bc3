"""Target probability measures on [0, 1) described by their CDFs."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cutstack import IntervalQ, as_rational


@dataclass(frozen=True, eq=False)
class MeasureTarget:
    """A probability measure on [0, 1).

    ``kind`` is one of ``lebesgue``, ``component``, ``atomic``, ``custom``.
    ``cdf(x)`` is mu([0, x]) and ``cdf_left(x)`` is mu([0, x)). The
    breakpoints are the points where the CDF may fail to be linear; the
    distance code only inspects those and the atoms of the other measure,
    which is exact when the CDF is piecewise linear between breakpoints.
    """

    kind: str
    _cdf: Callable = field(repr=False)
    _cdf_left: Callable = field(repr=False)
    breakpoints: tuple = ()
    label: str = ""
    params: dict = field(default_factory=dict, repr=False)

    def cdf(self, x):
        return self._cdf(np.asarray(x, dtype=np.float64))

    def cdf_left(self, x):
        return self._cdf_left(np.asarray(x, dtype=np.float64))

    def mass(self, a, b) -> float:
        """mu([a, b))."""
        return float(self.cdf_left(b) - self.cdf_left(a))

    @classmethod
    def lebesgue(cls):
        f = lambda x: np.clip(x, 0.0, 1.0)
        return cls("lebesgue", f, f, (0.0, 1.0), "lebesgue")

    @classmethod
    def component(cls, interval: IntervalQ):
        """Normalized Lebesgue measure on one interval."""
        lo, hi = float(interval.left), float(interval.right)
        f = lambda x: np.clip((x - lo) / (hi - lo), 0.0, 1.0)
        return cls("component", f, f, (lo, hi), f"component {interval}",
                   {"interval": [str(interval.left), str(interval.right)]})

    @classmethod
    def atomic(cls, atoms):
        """Point masses given as (position, mass) pairs; masses sum to 1."""
        pos = np.array([float(p) for p, _ in atoms], dtype=np.float64)
        mass = np.array([float(m) for _, m in atoms], dtype=np.float64)
        order = np.argsort(pos, kind="stable")
        pos, mass = pos[order], mass[order]
        if abs(mass.sum() - 1.0) > 1e-12 or (mass < 0).any():
            raise ValueError("atomic masses must be non-negative and sum to 1")
        cum = np.concatenate([[0.0], np.cumsum(mass)])

        def right(x):
            return cum[np.searchsorted(pos, x, side="right")]

        def left(x):
            return cum[np.searchsorted(pos, x, side="left")]

        return cls("atomic", right, left, tuple(pos.tolist()), "atomic")

    @classmethod
    def custom(cls, cdf, breakpoints=(), label="custom", cdf_left=None):
        return cls("custom", cdf, cdf_left or cdf, tuple(float(b) for b in breakpoints), label)

    @classmethod
    def mixture(cls, weights, targets, label="mixture"):
        w = [float(x) for x in weights]
        if abs(sum(w) - 1) > 1e-12 or min(w) < 0:
            raise ValueError("mixture weights must be non-negative and sum to 1")
        ts = list(targets)
        f = lambda x: sum(wi * t.cdf(x) for wi, t in zip(w, ts))
        g = lambda x: sum(wi * t.cdf_left(x) for wi, t in zip(w, ts))
        bps = sorted({b for t in ts for b in t.breakpoints})
        return cls("custom", f, g, tuple(bps), label)


def target_from_dict(d: dict) -> MeasureTarget:
    """Build a target from its config description."""
    kind = d.get("kind", "lebesgue")
    if kind == "lebesgue":
        return MeasureTarget.lebesgue()
    if kind == "component":
        a, b = d["interval"]
        return MeasureTarget.component(IntervalQ(as_rational(a), as_rational(b)))
    if kind == "atomic":
        return MeasureTarget.atomic([(as_rational(p), as_rational(m)) for p, m in d["atoms"]])
    if kind == "mixture":
        return MeasureTarget.mixture([float(as_rational(w)) for w in d["weights"]],
                                     [target_from_dict(t) for t in d["targets"]])
    raise ValueError(f"unknown measure kind {kind!r}")
