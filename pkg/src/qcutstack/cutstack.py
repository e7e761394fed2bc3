"""Exact cutting and stacking on [0, 1).

Every endpoint is a ``fractions.Fraction``; no floats enter this layer.
Intervals are closed on the left and open on the right, so each point of
[0, 1) lies in exactly one interval of a stack family.

A stack is a column of equal-width intervals. The stack map sends level
j isometrically onto level j + 1 and is undefined on the top level. A
``CutStackProgram`` describes a sequence of families, each obtained from
the previous one by cutting stacks into vertical slices and stacking
whole slices on top of each other. Because slices are always stacked
whole, each stage map extends the previous one.

Builders provided here:

* ``build_iet`` / ``iet_program``: interval exchanges, and a stage
  sequence for them obtained by Rauzy induction on towers.
* ``rotation_iet``: circle rotation as a two-interval exchange.
* ``TwoComponentMap``: two rescaled rotations on [0, s) and [s, 1), a
  map with two ergodic absolutely continuous invariant measures.
* ``full_shift_program`` / ``build_full_shift_stage``: a rank-two
  halving model whose columns spell Thue-Morse words.
"""
from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence


class ProgramError(ValueError):
    """An invalid stage in a cutting-and-stacking program."""

    def __init__(self, stage, message):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


def as_rational(x) -> Fraction:
    """Parse an exact rational from int, Fraction or a 'p/q' string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        text = x.strip()
        if "/" in text:
            p, q = text.split("/", 1)
            p, q = int(p), int(q)
            if q == 0:
                raise ValueError(f"zero denominator in {x!r}")
            return Fraction(p, q)
        return Fraction(int(text))
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def rational_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def ceil_mul(x: Fraction, n: int) -> int:
    """ceil(x * n) in exact integer arithmetic."""
    return -((-x.numerator * n) // x.denominator)


# ---------------------------------------------------------------------------
# intervals and stacks


@dataclass(frozen=True, order=True)
class IntervalQ:
    left: Fraction
    right: Fraction

    def __post_init__(self):
        left, right = as_rational(self.left), as_rational(self.right)
        if not (0 <= left < right <= 1):
            raise ValueError(f"invalid interval [{left}, {right})")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def width(self) -> Fraction:
        return self.right - self.left

    def contains(self, x) -> bool:
        return self.left <= x < self.right

    def lattice_range(self, n: int) -> tuple[int, int]:
        """Indices Q with Q/n in the interval, as a half-open range."""
        return ceil_mul(self.left, n), ceil_mul(self.right, n)

    def affine(self, a: Fraction, b: Fraction) -> "IntervalQ":
        """Image under x -> a + (b - a) x."""
        s = b - a
        return IntervalQ(a + s * self.left, a + s * self.right)

    def __str__(self):
        return f"[{self.left}, {self.right})"


def _interval_from(obj) -> IntervalQ:
    if isinstance(obj, IntervalQ):
        return obj
    left, right = obj
    return IntervalQ(as_rational(left), as_rational(right))


@dataclass(frozen=True)
class Stack:
    """Levels I_1 (bottom) .. I_h (top) of one common width."""

    intervals: tuple

    def __post_init__(self):
        ivs = tuple(_interval_from(iv) for iv in self.intervals)
        if not ivs:
            raise ValueError("a stack needs at least one interval")
        w = ivs[0].width
        if any(iv.width != w for iv in ivs):
            raise ValueError("stack levels must have equal widths")
        srt = sorted(ivs)
        for a, b in zip(srt, srt[1:]):
            if b.left < a.right:
                raise ValueError(f"stack levels overlap: {a} and {b}")
        object.__setattr__(self, "intervals", ivs)

    @property
    def height(self) -> int:
        return len(self.intervals)

    @property
    def width(self) -> Fraction:
        return self.intervals[0].width

    @property
    def bottom(self) -> IntervalQ:
        return self.intervals[0]

    @property
    def top(self) -> IntervalQ:
        return self.intervals[-1]


def cut_stack(s: Stack, fractions: Sequence) -> list[Stack]:
    """Slice a stack vertically at the given fractions of its width."""
    fr = [as_rational(f) for f in fractions]
    if not fr:
        raise ValueError("need at least one cut fraction")
    prev = Fraction(0)
    for f in fr:
        if not (prev < f < 1):
            raise ValueError("cut fractions must be strictly increasing in (0, 1)")
        prev = f
    bounds = [Fraction(0)] + fr + [Fraction(1)]
    w = s.width
    out = []
    for a, b in zip(bounds, bounds[1:]):
        out.append(Stack(tuple(IntervalQ(iv.left + a * w, iv.left + b * w)
                               for iv in s.intervals)))
    return out


def stack_onto(lower: Stack, upper: Stack) -> Stack:
    """Put ``upper`` on top of ``lower``."""
    if lower.width != upper.width:
        raise ValueError(f"width mismatch: {lower.width} vs {upper.width}")
    return Stack(lower.intervals + upper.intervals)


# ---------------------------------------------------------------------------
# classical evaluators


class PiecewiseMap:
    """Interface shared by the classical maps.

    ``__call__(x)`` returns f(x) as a Fraction, or None where undefined.
    ``limits(x)`` returns the one-sided limits of f at x that exist.
    """

    def __call__(self, x):  # pragma: no cover - interface
        raise NotImplementedError

    def limits(self, x) -> list:  # pragma: no cover - interface
        raise NotImplementedError

    def singular_image(self, points: Iterable) -> list:
        """Sorted one-sided limits of f at the given points, reduced mod 1."""
        out = set()
        for x in points:
            for y in self.limits(Fraction(x)):
                out.add(y - (y // 1))
        return sorted(out)


class _Pieces(PiecewiseMap):
    """A map given by translations on a sorted partition of [0, 1)."""

    def __init__(self, lefts, rights, shifts):
        self._lefts = list(lefts)
        self._rights = list(rights)
        self._shifts = list(shifts)

    def _piece(self, x):
        if not (0 <= x < 1):
            raise ValueError(f"point {x} outside [0, 1)")
        i = bisect.bisect_right(self._lefts, x) - 1
        if i < 0 or x >= self._rights[i]:
            return None
        return i

    def __call__(self, x):
        x = as_rational(x)
        i = self._piece(x)
        if i is None or self._shifts[i] is None:
            return None
        return x + self._shifts[i]

    def limits(self, x):
        x = as_rational(x)
        out = []
        if x < 1:
            v = self(x)
            if v is not None:
                out.append(v)
        if x > 0:
            # the piece that contains points just below x
            i = bisect.bisect_left(self._lefts, x) - 1
            if i >= 0 and self._shifts[i] is not None and self._lefts[i] < x <= self._rights[i]:
                v = x + self._shifts[i]
                if v not in out:
                    out.append(v)
        return out


@dataclass(frozen=True, eq=False)
class StackFamily(PiecewiseMap):
    """A finite family of stacks whose levels partition [0, 1)."""

    stacks: tuple
    stage: int = 0
    _index: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        stacks = tuple(s if isinstance(s, Stack) else Stack(tuple(s)) for s in self.stacks)
        if not stacks:
            raise ValueError("a stack family needs at least one stack")
        entries = []
        for i, s in enumerate(stacks):
            for j, iv in enumerate(s.intervals):
                entries.append((iv.left, iv.right, i, j))
        entries.sort()
        pos = Fraction(0)
        for left, right, i, j in entries:
            if left != pos:
                kind = "overlap" if left < pos else "gap"
                raise ValueError(f"levels do not partition [0, 1): {kind} at {min(left, pos)}")
            pos = right
        if pos != 1:
            raise ValueError(f"levels do not cover [0, 1): stop at {pos}")
        object.__setattr__(self, "stacks", stacks)
        object.__setattr__(self, "_index", tuple(entries))
        object.__setattr__(self, "_lefts", [e[0] for e in entries])

    def locate(self, x) -> tuple[int, int]:
        """(stack index, level index) of the interval containing x."""
        x = as_rational(x)
        if not (0 <= x < 1):
            raise ValueError(f"point {x} outside [0, 1)")
        k = bisect.bisect_right(self._lefts, x) - 1
        _, _, i, j = self._index[k]
        return i, j

    def __call__(self, x):
        x = as_rational(x)
        i, j = self.locate(x)
        s = self.stacks[i]
        if j == s.height - 1:
            return None
        return x + s.intervals[j + 1].left - s.intervals[j].left

    def limits(self, x):
        x = as_rational(x)
        out = []
        if x < 1:
            v = self(x)
            if v is not None:
                out.append(v)
        if x > 0:
            k = bisect.bisect_left(self._lefts, x) - 1
            left, right, i, j = self._index[k]
            s = self.stacks[i]
            if j < s.height - 1:
                v = x + s.intervals[j + 1].left - s.intervals[j].left
                if v not in out:
                    out.append(v)
        return out

    @property
    def max_width(self) -> Fraction:
        return max(s.width for s in self.stacks)

    @property
    def min_width(self) -> Fraction:
        return min(s.width for s in self.stacks)

    def total_mass(self) -> Fraction:
        return sum((s.width * s.height for s in self.stacks), Fraction(0))

    def boundary_points(self) -> set:
        """Endpoints of all bottom and top levels."""
        pts = set()
        for s in self.stacks:
            for iv in (s.bottom, s.top):
                pts.add(iv.left)
                pts.add(iv.right)
        return pts


def eval_family_map(family: StackFamily, x):
    """The stack map of ``family`` at x, or None on a top level."""
    return family(x)


# ---------------------------------------------------------------------------
# programs


@dataclass(frozen=True)
class StageSpec:
    """One stage: cut some stacks, then regroup the slices into columns.

    ``cuts`` holds ``(stack index, fractions)`` pairs referring to the
    previous family. Slicing produces a working list: every stack of the
    previous family in order, each replaced by its slices left to right.
    ``columns`` lists, for every new stack, the working-list indices stacked
    bottom to top; each working index is used exactly once.
    """

    cuts: tuple
    columns: tuple
    max_width: Fraction | None = None

    def to_dict(self):
        d = {
            "cuts": [{"stack": i, "fractions": [rational_str(f) for f in fr]}
                     for i, fr in self.cuts],
            "stacks": [list(c) for c in self.columns],
        }
        if self.max_width is not None:
            d["max_width"] = rational_str(self.max_width)
        return d

    @classmethod
    def from_dict(cls, d):
        cuts = tuple((int(c["stack"]), tuple(as_rational(f) for f in c["fractions"]))
                     for c in d.get("cuts", []))
        cols = tuple(tuple(int(i) for i in col) for col in d["stacks"])
        mw = d.get("max_width")
        return cls(cuts, cols, as_rational(mw) if mw is not None else None)


def apply_stage(family: StackFamily, spec: StageSpec, stage: int) -> StackFamily:
    """Run one stage on ``family``; raises ProgramError on any violation."""
    cut_map = {}
    for i, fr in spec.cuts:
        if not (0 <= i < len(family.stacks)):
            raise ProgramError(stage, f"cut refers to missing stack {i}")
        if i in cut_map:
            raise ProgramError(stage, f"stack {i} cut twice")
        cut_map[i] = fr
    working = []
    for i, s in enumerate(family.stacks):
        if i in cut_map:
            try:
                working.extend(cut_stack(s, cut_map[i]))
            except ValueError as exc:
                raise ProgramError(stage, f"cut of stack {i}: {exc}") from None
        else:
            working.append(s)
    used = [c for col in spec.columns for c in col]
    if sorted(used) != list(range(len(working))):
        raise ProgramError(stage, "columns must use every slice exactly once")
    new = []
    for col in spec.columns:
        if not col:
            raise ProgramError(stage, "empty column")
        st = working[col[0]]
        for c in col[1:]:
            try:
                st = stack_onto(st, working[c])
            except ValueError as exc:
                raise ProgramError(stage, str(exc)) from None
        new.append(st)
    try:
        fam = StackFamily(tuple(new), stage)
    except ValueError as exc:
        raise ProgramError(stage, str(exc)) from None
    if fam.max_width > family.max_width:
        raise ProgramError(stage, "maximal width increased")
    if spec.max_width is not None and fam.max_width != spec.max_width:
        raise ProgramError(stage, f"declared width {spec.max_width} but found {fam.max_width}")
    return fam


@dataclass(frozen=True, eq=False)
class CutStackProgram:
    """Initial stacks plus a list of stages; stage 0 is the initial family."""

    initial: tuple
    stages: tuple = ()
    name: str = ""

    def __post_init__(self):
        initial = self.initial.stacks if isinstance(self.initial, StackFamily) else self.initial
        init = tuple(tuple(_interval_from(iv) for iv in (s.intervals if isinstance(s, Stack) else s))
                     for s in initial)
        object.__setattr__(self, "initial", init)
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "_cache", [])

    @property
    def n_stages(self) -> int:
        """Number of families, i.e. the last valid stage index plus one."""
        return len(self.stages) + 1

    def family(self, n: int) -> StackFamily:
        if not (0 <= n < self.n_stages):
            raise ValueError(f"stage {n} outside 0..{self.n_stages - 1}")
        cache = self._cache
        if not cache:
            try:
                cache.append(StackFamily(tuple(Stack(s) for s in self.initial), 0))
            except ValueError as exc:
                raise ProgramError(0, str(exc)) from None
        while len(cache) <= n:
            k = len(cache)
            cache.append(apply_stage(cache[-1], self.stages[k - 1], k))
        return cache[n]

    def widths(self) -> list:
        return [self.family(n).max_width for n in range(self.n_stages)]

    def to_dict(self):
        return {
            "name": self.name,
            "initial": [[[rational_str(iv.left), rational_str(iv.right)] for iv in s]
                        for s in self.initial],
            "stages": [st.to_dict() for st in self.stages],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d):
        init = tuple(tuple(IntervalQ(as_rational(a), as_rational(b)) for a, b in s)
                     for s in d["initial"])
        stages = tuple(StageSpec.from_dict(st) for st in d.get("stages", []))
        return cls(init, stages, d.get("name", ""))

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))

    def truncated(self, n_stages: int) -> "CutStackProgram":
        return CutStackProgram(self.initial, self.stages[:max(n_stages - 1, 0)], self.name)


def refine(program: CutStackProgram, n: int) -> StackFamily:
    """The family at stage ``n`` (0 is the initial family)."""
    return program.family(n)


def singularity_points(program: CutStackProgram, n: int) -> list:
    """Top and bottom boundary points of stages 0..n, sorted."""
    pts = set()
    for k in range(n + 1):
        pts |= program.family(k).boundary_points()
    return sorted(pts)


def embed_program(program: CutStackProgram, a, b) -> CutStackProgram:
    """Rescale a program on [0, 1) into [a, b) (result is not a full family)."""
    a, b = as_rational(a), as_rational(b)
    init = tuple(tuple(iv.affine(a, b) for iv in s) for s in program.initial)
    stages = tuple(StageSpec(st.cuts, st.columns,
                             None if st.max_width is None else st.max_width * (b - a))
                   for st in program.stages)
    obj = CutStackProgram.__new__(CutStackProgram)
    object.__setattr__(obj, "initial", init)
    object.__setattr__(obj, "stages", stages)
    object.__setattr__(obj, "name", program.name)
    object.__setattr__(obj, "_cache", [])
    return obj


def merge_programs(programs: Sequence[CutStackProgram], name: str = "") -> CutStackProgram:
    """Run programs on disjoint pieces side by side, stage by stage.

    A program that has run out of stages keeps its last family unchanged.
    """
    counts = [len(p.initial) for p in programs]
    initial = tuple(s for p in programs for s in p.initial)
    total = max(len(p.stages) for p in programs)
    stages = []
    for k in range(total):
        cuts, cols = [], []
        stack_off = 0
        work_off = 0
        new_counts = []
        for p, cnt in zip(programs, counts):
            if k < len(p.stages):
                st = p.stages[k]
                cuts.extend((i + stack_off, fr) for i, fr in st.cuts)
                cols.extend(tuple(c + work_off for c in col) for col in st.columns)
                work = cnt + sum(len(fr) for _, fr in st.cuts)
                new_counts.append(len(st.columns))
            else:
                cols.extend((work_off + i,) for i in range(cnt))
                work = cnt
                new_counts.append(cnt)
            stack_off += cnt
            work_off += work
        counts = new_counts
        stages.append(StageSpec(tuple(cuts), tuple(cols)))
    prog = CutStackProgram(initial, tuple(stages), name)
    # declare the width sequence once it is known to be valid
    decl = tuple(StageSpec(st.cuts, st.columns, prog.family(k + 1).max_width)
                 for k, st in enumerate(prog.stages))
    return CutStackProgram(initial, decl, name)


# ---------------------------------------------------------------------------
# interval exchanges


@dataclass(frozen=True)
class IETSpec:
    """Permutation (1-based target positions) and interval lengths.

    ``permutation[i]`` is the position, counted from the left starting at
    1, that the i-th interval occupies after the exchange.
    """

    permutation: tuple
    lengths: tuple

    def __post_init__(self):
        perm = tuple(int(p) for p in self.permutation)
        lens = tuple(as_rational(v) for v in self.lengths)
        m = len(perm)
        if m == 0 or len(lens) != m:
            raise ValueError("permutation and lengths must be non-empty and equally long")
        if sorted(perm) != list(range(1, m + 1)):
            raise ValueError(f"{perm} is not a permutation of 1..{m}")
        if any(v <= 0 for v in lens):
            raise ValueError("interval lengths must be positive")
        if sum(lens) != 1:
            raise ValueError(f"interval lengths sum to {sum(lens)}, not 1")
        object.__setattr__(self, "permutation", perm)
        object.__setattr__(self, "lengths", lens)


class IET(_Pieces):
    """T(x) = x - u_{i-1} + (total length placed before interval i)."""

    def __init__(self, spec: IETSpec):
        self.spec = spec
        m = len(spec.lengths)
        u = [Fraction(0)]
        for v in spec.lengths:
            u.append(u[-1] + v)
        self.breakpoints = tuple(u)
        by_pos = sorted(range(m), key=lambda i: spec.permutation[i])
        start = {}
        acc = Fraction(0)
        for i in by_pos:
            start[i] = acc
            acc += spec.lengths[i]
        shifts = [start[i] - u[i] for i in range(m)]
        super().__init__(u[:-1], u[1:], shifts)
        self.shifts = tuple(shifts)
        self.intervals = tuple(IntervalQ(u[i], u[i + 1]) for i in range(m))
        ilefts = [start[i] for i in range(m)]
        order = sorted(range(m), key=lambda i: ilefts[i])
        self._inv = _Pieces([ilefts[i] for i in order],
                            [ilefts[i] + spec.lengths[i] for i in order],
                            [-shifts[i] for i in order])

    def inverse(self, x):
        return self._inv(x)

    def family(self) -> StackFamily:
        """The exchanged intervals as height-one stacks."""
        return StackFamily(tuple(Stack((iv,)) for iv in self.intervals), 0)


def build_iet(spec: IETSpec) -> tuple[IET, StackFamily]:
    t = IET(spec)
    return t, t.family()


def rotation_iet(alpha) -> IETSpec:
    """Rotation x -> x + alpha mod 1 as an exchange of two intervals."""
    alpha = as_rational(alpha)
    if not (0 < alpha < 1):
        raise ValueError("rotation number must lie strictly between 0 and 1")
    return IETSpec((2, 1), (1 - alpha, alpha))


def iet_program(spec: IETSpec, max_stages: int | None = None, name: str = "") -> CutStackProgram:
    """Stage sequence for an IET from Rauzy induction on towers.

    Towers start as the exchanged intervals, each of height one. At every
    step the inducing interval [0, L) loses its rightmost piece: either the
    top tower (largest base) is cut and its right slice is stacked onto
    the tower whose return image is rightmost, or that tower is cut and the
    whole top tower is stacked onto its right slice. Stops when the two
    competing widths coincide, when one tower plays both roles, or after
    ``max_stages`` families.
    """
    t = IET(spec)
    # tower: [base_left, width, shift of the first return]
    towers = [[iv.left, iv.width, sh] for iv, sh in zip(t.intervals, t.shifts)]
    initial = tuple((iv,) for iv in t.intervals)
    stages = []
    while max_stages is None or len(stages) + 1 < max_stages:
        it = max(range(len(towers)), key=lambda i: towers[i][0])
        ib = max(range(len(towers)), key=lambda i: towers[i][0] + towers[i][2])
        lt, lb = towers[it][1], towers[ib][1]
        if it == ib or lt == lb:
            break
        k = len(towers)
        if lt > lb:
            frac = (lt - lb) / lt
            # working list: towers with `it` replaced by (left, right) slices
            work = [i if i <= it else i + 1 for i in range(k)]
            right = it + 1
            cols = []
            new = []
            for i in range(k):
                if i == ib:
                    cols.append((work[i], right))
                    bl, w, sh = towers[i]
                    new.append([bl, w, sh + towers[it][2]])
                elif i == it:
                    cols.append((work[i],))
                    bl, w, sh = towers[i]
                    new.append([bl, w - lb, sh])
                else:
                    cols.append((work[i],))
                    new.append(list(towers[i]))
            stages.append(StageSpec(((it, (frac,)),), tuple(cols)))
            towers = new
        else:
            frac = (lb - lt) / lb
            work = [i if i <= ib else i + 1 for i in range(k)]
            right = ib + 1
            entries = []
            for i in range(k):
                bl, w, sh = towers[i]
                if i == it:
                    continue
                if i == ib:
                    entries.append(([bl, w - lt, sh], (work[i],)))
                    entries.append(([bl + w - lt, lt, sh + towers[it][2]], (right, work[it])))
                else:
                    entries.append(([bl, w, sh], (work[i],)))
            entries.sort(key=lambda e: e[0][0])
            stages.append(StageSpec(((ib, (frac,)),), tuple(c for _, c in entries)))
            towers = [tw for tw, _ in entries]
    prog = CutStackProgram(initial, tuple(stages), name)
    decl = tuple(StageSpec(st.cuts, st.columns, prog.family(k + 1).max_width)
                 for k, st in enumerate(prog.stages))
    return CutStackProgram(initial, decl, name)


def rotation_program(alpha, max_stages: int | None = None) -> CutStackProgram:
    return iet_program(rotation_iet(alpha), max_stages, name=f"rotation {as_rational(alpha)}")


# ---------------------------------------------------------------------------
# two rescaled rotations


class TwoComponentMap(_Pieces):
    """Rotation by alpha1 on [0, split) and by alpha2 on [split, 1).

    Each half is invariant and carries its normalized Lebesgue measure as
    an ergodic invariant measure when the rotation number is irrational;
    high-denominator rationals serve as finite proxies.
    """

    def __init__(self, alpha1, alpha2, split=Fraction(1, 2)):
        self.alpha1 = as_rational(alpha1)
        self.alpha2 = as_rational(alpha2)
        self.split = as_rational(split)
        if not (0 < self.split < 1):
            raise ValueError("split point must lie in (0, 1)")
        for a in (self.alpha1, self.alpha2):
            if not (0 <= a < 1):
                raise ValueError("rotation numbers must lie in [0, 1)")
        s = self.split
        lefts, rights, shifts = [], [], []
        for lo, hi, a in ((Fraction(0), s, self.alpha1), (s, Fraction(1), self.alpha2)):
            w = hi - lo
            if a == 0:
                lefts.append(lo), rights.append(hi), shifts.append(Fraction(0))
                continue
            cut = lo + (1 - a) * w
            lefts += [lo, cut]
            rights += [cut, hi]
            shifts += [a * w, (a - 1) * w]
        super().__init__(lefts, rights, shifts)
        self.components = (IntervalQ(Fraction(0), s), IntervalQ(s, Fraction(1)))

    def inverse(self, x):
        x = as_rational(x)
        for lo, hi, a in ((Fraction(0), self.split, self.alpha1),
                          (self.split, Fraction(1), self.alpha2)):
            if lo <= x < hi:
                w = hi - lo
                y = (x - lo) / w - a
                return lo + w * (y - (y // 1))
        raise ValueError(f"point {x} outside [0, 1)")

    def program(self, max_stages: int | None = None) -> CutStackProgram:
        parts = []
        for comp, a in zip(self.components, (self.alpha1, self.alpha2)):
            if a == 0:
                p = CutStackProgram(((IntervalQ(Fraction(0), Fraction(1)),),))
            else:
                p = rotation_program(a, max_stages)
            parts.append(embed_program(p, comp.left, comp.right))
        return merge_programs(parts, name=f"two-component {self.alpha1}, {self.alpha2}")


def build_two_component(alpha1, alpha2, split=Fraction(1, 2)) -> TwoComponentMap:
    return TwoComponentMap(alpha1, alpha2, split)


# ---------------------------------------------------------------------------
# full-shift halving model


def full_shift_program(max_stage: int) -> CutStackProgram:
    """Stages 1..max_stage of the halving model (index n-1 holds stage n).

    Two stacks A and B start as [0, 1/2) and [1/2, 1). Each stage halves
    both and forms A' = A_left + B_left and B' = B_right + A_right, so
    widths are 2^-n, heights 2^(n-1), and the two columns read as the
    Thue-Morse word and its complement.
    """
    if max_stage < 1:
        raise ValueError("max_stage must be at least 1")
    half = Fraction(1, 2)
    initial = ((IntervalQ(Fraction(0), half),), (IntervalQ(half, Fraction(1)),))
    stages = tuple(StageSpec(((0, (half,)), (1, (half,))), ((0, 2), (3, 1)),
                             Fraction(1, 2 ** (k + 2)))
                   for k in range(max_stage - 1))
    return CutStackProgram(initial, stages, name="full shift halving")


def build_full_shift_stage(n: int, max_stage: int | None = None) -> StackFamily:
    """The stage-n family of the halving model (n = 1 is the initial split)."""
    if n < 1:
        raise ValueError("stages are numbered from 1")
    if max_stage is not None and n > max_stage:
        raise ValueError(f"stage {n} beyond configured maximum {max_stage}")
    return full_shift_program(n).family(n - 1)
