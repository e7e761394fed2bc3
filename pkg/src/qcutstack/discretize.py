"""Lattice discretization of a stack family.

The lattice is D_N = {Q/N : Q = 0..N-1}. Inside each stack the first
K_i lattice points of every level (K_i the smallest level count) are
moved one level up, e-th point to e-th point; these are the internal
orbit segments. A gluing policy then decides where the column tops go,
and every remaining point is completed to a bijection: first greedily to
the free lattice point nearest N f(x), then any leftovers are matched in
sorted order. Each point carries a provenance tag.
"""
from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cutstack import CutStackProgram, PiecewiseMap, StackFamily, ceil_mul
from .kernels import greedy_nearest
from .measures import MeasureTarget

INTERNAL, GLUE, NEAREST, RESIDUE = 0, 1, 2, 3
PROVENANCE = ("internal-segment", "glue", "nearest-completion", "residue")


class GluingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DiscreteMap:
    """A bijection of Z_N with per-point provenance."""

    N: int
    perm: np.ndarray
    provenance: np.ndarray
    stage: int = 0
    anchor: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        perm = np.array(self.perm, dtype=np.int64, copy=True)
        prov = np.array(self.provenance, dtype=np.int8, copy=True)
        if perm.shape != (self.N,) or prov.shape != (self.N,):
            raise ValueError("perm and provenance need exactly N entries")
        seen = np.zeros(self.N, dtype=bool)
        if perm.min(initial=0) < 0 or perm.max(initial=0) >= self.N:
            raise ValueError("perm has entries outside Z_N")
        seen[perm] = True
        if not seen.all():
            raise ValueError("perm is not a bijection of Z_N")
        perm.setflags(write=False)
        prov.setflags(write=False)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "provenance", prov)

    @classmethod
    def from_perm(cls, perm, stage=0):
        perm = np.asarray(perm, dtype=np.int64)
        return cls(len(perm), perm, np.full(len(perm), GLUE, dtype=np.int8), stage)

    def inverse(self) -> np.ndarray:
        inv = np.empty(self.N, dtype=np.int64)
        inv[self.perm] = np.arange(self.N, dtype=np.int64)
        return inv

    def counts(self) -> dict:
        c = np.bincount(self.provenance, minlength=len(PROVENANCE))
        return {name: int(c[i]) for i, name in enumerate(PROVENANCE)}

    def to_csv(self, header: str | None = None) -> str:
        buf = io.StringIO()
        if header:
            buf.write(header.rstrip("\n") + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["Q", "image", "provenance"])
        for q, (im, pv) in enumerate(zip(self.perm.tolist(), self.provenance.tolist())):
            w.writerow([q, im, PROVENANCE[pv]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, stage: int = 0):
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        rows = rows[1:]
        perm = [int(r[1]) for r in rows]
        prov = [PROVENANCE.index(r[2]) for r in rows]
        return cls(len(perm), perm, prov, stage)


# ---------------------------------------------------------------------------
# lattice images of classical maps


def lattice_image(f, n: int) -> np.ndarray:
    """N * f(Q/N) for Q in Z_N as floats, NaN where f is undefined.

    Values are reduced into [0, N). Maps built from translation pieces are
    handled piece by piece with exact offsets; anything else is evaluated
    point by point.
    """
    out = np.full(n, np.nan)
    pieces = _pieces_of(f)
    if pieces is not None:
        for left, right, shift in pieces:
            a, b = ceil_mul(left, n), ceil_mul(right, n)
            if a >= b or shift is None:
                continue
            off = shift * n
            out[a:b] = np.arange(a, b, dtype=np.float64) + float(off)
    else:
        for q in range(n):
            v = f(Fraction(q, n))
            if v is not None:
                out[q] = float(v * n)
    return np.mod(out, n)


def _pieces_of(f):
    if isinstance(f, StackFamily):
        res = []
        for s in f.stacks:
            for j in range(s.height - 1):
                iv = s.intervals[j]
                res.append((iv.left, iv.right, s.intervals[j + 1].left - iv.left))
        return res
    if hasattr(f, "_lefts") and hasattr(f, "_shifts") and hasattr(f, "_rights"):
        return list(zip(f._lefts, f._rights, f._shifts))
    return None


# ---------------------------------------------------------------------------
# internal segments


@dataclass(frozen=True, eq=False)
class Segments:
    """Internal orbit segments of a family on Z_N.

    ``columns[i]`` is a (K_i, h_i) integer array: row e lists the lattice
    indices of the e-th column of stack i from bottom to top. ``partial``
    maps each point to its image, or -1 where no image is assigned yet.
    """

    N: int
    stage: int
    columns: tuple
    partial: np.ndarray

    @property
    def K(self) -> list:
        return [c.shape[0] for c in self.columns]

    def n_internal(self) -> int:
        return int((self.partial >= 0).sum())


def internal_segments(F: StackFamily, n: int) -> Segments:
    partial = np.full(n, -1, dtype=np.int64)
    cols = []
    for s in F.stacks:
        ranges = [iv.lattice_range(n) for iv in s.intervals]
        k = min(b - a for a, b in ranges)
        starts = np.array([a for a, _ in ranges], dtype=np.int64)
        grid = starts[None, :] + np.arange(k, dtype=np.int64)[:, None]
        if s.height > 1 and k > 0:
            partial[grid[:, :-1].ravel()] = grid[:, 1:].ravel()
        cols.append(grid)
    return Segments(n, F.stage, tuple(cols), partial)


# ---------------------------------------------------------------------------
# gluing policies


@dataclass(frozen=True)
class PeriodicPerStack:
    """Close each column into its own cycle."""

    name = "periodic"


@dataclass(frozen=True)
class SingleOrbitConcat:
    """Chain all columns, stack by stack, into one cycle."""

    name = "single_orbit"


@dataclass(frozen=True, eq=False)
class CrossStackBlend:
    """One cycle through columns of mu1-good and mu2-good stacks.

    Columns are drawn evenly from the stacks of the larger side so that
    the point counts approach alpha1 : alpha2.
    """

    mu1: MeasureTarget
    mu2: MeasureTarget
    alpha1: Fraction = Fraction(1, 2)
    alpha2: Fraction = Fraction(1, 2)
    q: int = 4
    epsilon: float = 0.1
    name = "blend"

    def __post_init__(self):
        a1, a2 = Fraction(self.alpha1), Fraction(self.alpha2)
        if a1 <= 0 or a2 <= 0 or a1 + a2 != 1:
            raise ValueError("blend weights must be positive and sum to 1")
        object.__setattr__(self, "alpha1", a1)
        object.__setattr__(self, "alpha2", a2)


def _pick_columns(sizes: Sequence[tuple[int, int]], target: float) -> list[int]:
    """Columns per stack (counts out of K_i, heights h_i) totalling about ``target`` points."""
    total = sum(k * h for k, h in sizes)
    if total == 0:
        return [0] * len(sizes)
    r = min(target / total, 1.0)
    take = [min(k, math.floor(k * r)) for k, _ in sizes]
    got = sum(t * h for t, (_, h) in zip(take, sizes))
    # top up in order of largest fractional remainder while it brings us closer
    order = sorted(range(len(sizes)), key=lambda i: (-(sizes[i][0] * r - take[i]), i))
    for i in order:
        k, h = sizes[i]
        if take[i] < k and abs(got + h - target) < abs(got - target):
            take[i] += 1
            got += h
    return take


def glue(seg: Segments, policy, F: StackFamily, f: PiecewiseMap | None = None) -> DiscreteMap:
    """Close the internal segments with ``policy`` and complete to a bijection.

    ``f`` is the classical map that the completion aims at; it defaults to
    the stage map of ``F`` (undefined on tops).
    """
    n = seg.N
    img = seg.partial.copy()
    prov = np.full(n, -1, dtype=np.int8)
    prov[img >= 0] = INTERNAL
    anchor = None
    meta = {"policy": policy.name}

    def chain(cols):
        for a, b in zip(cols, cols[1:] + cols[:1]):
            img[a[-1]] = b[0]
            prov[a[-1]] = GLUE

    if isinstance(policy, PeriodicPerStack):
        for grid in seg.columns:
            for row in grid:
                img[row[-1]] = row[0]
                prov[row[-1]] = GLUE
    elif isinstance(policy, SingleOrbitConcat):
        cols = [row for grid in seg.columns for row in grid]
        if cols:
            chain(cols)
            anchor = int(cols[0][0])
    elif isinstance(policy, CrossStackBlend):
        g1 = good_stacks(F, policy.mu1, policy.q, policy.epsilon)
        g2 = good_stacks(F, policy.mu2, policy.q, policy.epsilon)
        if not g1:
            raise GluingError(f"no stack is {policy.epsilon}-{policy.q}-good for mu1 ({policy.mu1.label})")
        if not g2:
            raise GluingError(f"no stack is {policy.epsilon}-{policy.q}-good for mu2 ({policy.mu2.label})")
        if set(g1) & set(g2):
            raise GluingError(f"stacks {sorted(set(g1) & set(g2))} are good for both targets")
        K = seg.K
        s1 = [(K[i], F.stacks[i].height) for i in g1]
        s2 = [(K[i], F.stacks[i].height) for i in g2]
        p1 = sum(k * h for k, h in s1)
        p2 = sum(k * h for k, h in s2)
        rho = float(policy.alpha1 / policy.alpha2)
        if p1 >= rho * p2:
            t1, t2 = _pick_columns(s1, rho * p2), [k for k, _ in s2]
        else:
            t1, t2 = [k for k, _ in s1], _pick_columns(s2, p1 / rho)
        cols = []
        for idx, take in ((g1, t1), (g2, t2)):
            for i, t in zip(idx, take):
                # spread the chosen columns evenly across the stack
                K_i = K[i]
                rows = sorted({(e * K_i) // t for e in range(t)}) if t else []
                cols.extend(seg.columns[i][e] for e in rows)
        if not cols:
            raise GluingError("blend selected no columns")
        chain(cols)
        anchor = int(cols[0][0])
        n1 = sum(t * F.stacks[i].height for i, t in zip(g1, t1))
        n2 = sum(t * F.stacks[i].height for i, t in zip(g2, t2))
        meta.update(good1=list(g1), good2=list(g2), points1=int(n1), points2=int(n2))
    else:
        raise TypeError(f"unknown gluing policy {policy!r}")

    _complete(img, prov, f if f is not None else F)
    return DiscreteMap(n, img, prov, seg.stage, anchor, meta)


def _complete(img: np.ndarray, prov: np.ndarray, f) -> None:
    n = img.shape[0]
    src = np.flatnonzero(img < 0)
    if src.size == 0:
        return
    free = np.ones(n, dtype=np.uint8)
    free[img[img >= 0]] = 0
    target = lattice_image(f, n)[src]
    ok = ~np.isnan(target)
    s1 = src[ok]
    res = greedy_nearest(s1, target[ok], free)
    done = res >= 0
    img[s1[done]] = res[done]
    prov[s1[done]] = NEAREST
    left = np.sort(np.concatenate([src[~ok], s1[~done]]))
    if left.size:
        free[:] = 1
        free[img[img >= 0]] = 0
        tg = np.flatnonzero(free)
        img[left] = tg
        prov[left] = RESIDUE


def discretize(F: StackFamily, n: int, policy, f: PiecewiseMap | None = None) -> DiscreteMap:
    """internal_segments followed by glue."""
    return glue(internal_segments(F, n), policy, F, f)


# ---------------------------------------------------------------------------
# approximation quality


@dataclass(frozen=True)
class DeltaReport:
    value: float
    n_included: int
    n_undefined: int
    n_collar: int
    vacuous: bool
    by_provenance: dict
    worst_point: int | None

    def __float__(self):
        return self.value


def _circle_dist(a, b):
    d = np.abs(a - b) % 1.0
    return np.minimum(d, 1.0 - d)


def distance_to_set(x: np.ndarray, points: Sequence[float]) -> np.ndarray:
    """Circle distance from each x to the nearest of ``points``."""
    if len(points) == 0:
        return np.full(np.shape(x), np.inf)
    p = np.sort(np.mod(np.asarray(points, dtype=np.float64), 1.0))
    idx = np.searchsorted(p, x)
    lo = p[(idx - 1) % len(p)]
    hi = p[idx % len(p)]
    return np.minimum(_circle_dist(x, lo), _circle_dist(x, hi))


def delta_N(f, fmap: DiscreteMap, epsilon, fS_image: Sequence, provenance: Sequence[str] | None = None) -> DeltaReport:
    """sup |f_N(Q/N) - f(Q/N)| over lattice points at distance >= epsilon from f(S).

    Distances are measured on the circle. Points where f is undefined are
    excluded and counted. ``provenance`` optionally restricts the sup to
    points with the given tags; the per-tag maxima are always reported.
    """
    n = fmap.N
    eps = float(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    x = np.arange(n) / n
    fx = lattice_image(f, n) / n
    undefined = np.isnan(fx)
    far = distance_to_set(x, fS_image) >= eps
    use = far & ~undefined
    if provenance is not None:
        codes = [PROVENANCE.index(p) for p in provenance]
        use &= np.isin(fmap.provenance, codes)
    err = np.zeros(n)
    err[~undefined] = _circle_dist(fmap.perm[~undefined] / n, fx[~undefined])
    by = {}
    for code, name in enumerate(PROVENANCE):
        m = far & ~undefined & (fmap.provenance == code)
        if m.any():
            by[name] = float(err[m].max())
    if not use.any():
        return DeltaReport(0.0, 0, int(undefined.sum()), int((~far).sum()), True, by, None)
    e = np.where(use, err, -1.0)
    worst = int(np.argmax(e))
    return DeltaReport(float(e[worst]), int(use.sum()), int(undefined.sum()),
                       int((~far).sum()), False, by, worst)


# ---------------------------------------------------------------------------
# schedule and good stacks


def min_level_count(F: StackFamily, n: int) -> int:
    return min(b - a for s in F.stacks for a, b in (iv.lattice_range(n) for iv in s.intervals))


def schedule_n_of_N(program: CutStackProgram, n: int, kappa: int = 8) -> int:
    """Last stage index before the first stage with a level holding fewer than kappa points.

    Stage indices start at 0; when even the initial family fails, 0 is
    returned.
    """
    if kappa < 1:
        raise ValueError("kappa must be at least 1")
    best = 0
    for k in range(program.n_stages):
        if min_level_count(program.family(k), n) >= kappa:
            best = k
        else:
            break
    return best


@dataclass(frozen=True)
class ApproxSchedule:
    kappa: int = 8

    def n_of_N(self, program: CutStackProgram, n: int) -> int:
        return schedule_n_of_N(program, n, self.kappa)


def level_frequencies(stack, q: int) -> np.ndarray:
    """Counts of level midpoints in the cells [c/q, (c+1)/q)."""
    counts = np.zeros(q, dtype=np.int64)
    for iv in stack.intervals:
        mid = (iv.left + iv.right) / 2
        counts[math.floor(mid * q)] += 1
    return counts


def good_stacks(F: StackFamily, mu: MeasureTarget, q: int, epsilon: float) -> list[int]:
    """Indices of stacks whose column through the base midpoint is epsilon-q-good for mu.

    The column visits the level midpoints; the test compares its visit
    frequencies with mu on every interval [a/q, b/q), 0 <= a < b <= q.
    """
    if q < 1 or epsilon <= 0:
        raise ValueError("need q >= 1 and epsilon > 0")
    grid = np.arange(q + 1) / q
    M = np.asarray(mu.cdf_left(grid), dtype=np.float64)
    M[-1] = 1.0
    dm = M[None, :] - M[:, None]
    iu = np.triu_indices(q + 1, k=1)
    out = []
    for i, s in enumerate(F.stacks):
        P = np.concatenate([[0], np.cumsum(level_frequencies(s, q))]) / s.height
        dp = P[None, :] - P[:, None]
        if np.all(np.abs(dp[iu] - dm[iu]) <= epsilon + 1e-12):
            out.append(i)
    return out


def stack_lattice_mass(F: StackFamily, indices: Sequence[int], n: int) -> float:
    """Fraction of Z_N lying in the given stacks."""
    tot = 0
    for i in indices:
        for iv in F.stacks[i].intervals:
            a, b = iv.lattice_range(n)
            tot += b - a
    return tot / n
