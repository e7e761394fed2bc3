"""Orbit measures, distances to invariant measures, densities, experiments.

Every eigenvector built on an orbit of length K has |psi|^2 uniform on
that orbit, so its position marginal is the orbit measure: mass 1/K at
each Q/N on the orbit. Weak convergence of these measures is measured by
the Kolmogorov distance between CDFs on [0, 1), with Wasserstein-1 as a
secondary metric.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .config import (
    ExperimentConfig,
    InvariantViolation,
    ResourceGuard,
    resolve_map,
    resolve_observables,
    resolve_policy,
    resolve_targets,
    validate,
)
from .cutstack import singularity_points
from .discretize import (
    delta_N,
    good_stacks,
    internal_segments,
    glue,
    schedule_n_of_N,
    stack_lattice_mass,
)
from .measures import MeasureTarget, target_from_dict
from .qmap import UnitaryMap, full_spectrum
from .weyl import qe_variance, spectrum_expectations

__all__ = [
    "OrbitMeasure", "MeasureTarget", "DensityReport", "orbit_measure", "measure_distance",
    "wasserstein1", "density_report", "run_qlimit_experiment", "run_single",
]


@dataclass(frozen=True, eq=False)
class OrbitMeasure:
    """Uniform probability on the lattice points of one orbit."""

    orbit_id: int
    N: int
    points: np.ndarray  # sorted lattice indices

    @property
    def K(self) -> int:
        return int(self.points.shape[0])

    @property
    def atoms(self) -> list:
        m = Fraction(1, self.K)
        return [(Fraction(int(q), self.N), m) for q in self.points.tolist()]

    def total_mass(self) -> Fraction:
        return sum((m for _, m in self.atoms), Fraction(0))

    def positions(self) -> np.ndarray:
        return self.points / self.N


def orbit_measure(orbit, N: int, orbit_id: int = 0) -> OrbitMeasure:
    pts = np.sort(np.asarray(orbit, dtype=np.int64))
    if pts.size == 0:
        raise ValueError("empty orbit")
    return OrbitMeasure(orbit_id, N, pts)


def _atoms(m):
    if isinstance(m, OrbitMeasure):
        return m.positions(), np.full(m.K, 1.0 / m.K)
    pos, w = m
    pos = np.asarray(pos, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    o = np.argsort(pos, kind="stable")
    return pos[o], w[o] / w.sum()


def measure_distance(m, target: MeasureTarget) -> float:
    """Kolmogorov distance sup_x |F_m(x) - F_target(x)| on [0, 1).

    ``m`` is an OrbitMeasure or a (positions, weights) pair. The sup is
    taken over atom positions and target breakpoints, from both sides;
    this is exact when the target CDF is piecewise linear.
    """
    pos, w = _atoms(m)
    cum = np.concatenate([[0.0], np.cumsum(w)])
    cand = np.unique(np.concatenate([pos, np.asarray(target.breakpoints, dtype=np.float64), [0.0, 1.0]]))
    right = cum[np.searchsorted(pos, cand, side="right")]
    left = cum[np.searchsorted(pos, cand, side="left")]
    d = np.maximum(np.abs(right - target.cdf(cand)), np.abs(left - target.cdf_left(cand)))
    return float(d.max())


def wasserstein1(m, target: MeasureTarget, grid: int = 1 << 14) -> float:
    """Integral of |F_m - F_target| over [0, 1) (midpoint rule plus exact breakpoints)."""
    pos, w = _atoms(m)
    cum = np.concatenate([[0.0], np.cumsum(w)])
    x = np.unique(np.concatenate([pos, np.asarray(target.breakpoints, dtype=np.float64),
                                  np.linspace(0, 1, grid + 1)]))
    mid = (x[:-1] + x[1:]) / 2
    fm = cum[np.searchsorted(pos, mid, side="right")]
    return float(np.sum(np.abs(fm - target.cdf(mid)) * np.diff(x)))


# ---------------------------------------------------------------------------
# densities


@dataclass(frozen=True)
class DensityReport:
    Ns: tuple
    sizes: tuple
    alpha_seq: tuple
    beta_seq: tuple
    alpha: float
    beta: float
    fit: dict = field(default_factory=dict)

    def to_dict(self):
        return {"N": list(self.Ns), "alpha_seq": list(self.alpha_seq), "beta_seq": list(self.beta_seq),
                "alpha": self.alpha, "beta": self.beta, "fit": self.fit}


def _tail_fit(Ns, vals, tail=3):
    """Linear fit of value against 1/N over the last ``tail`` points; intercept in [0, 1]."""
    x = 1.0 / np.asarray(Ns[-tail:], dtype=np.float64)
    y = np.asarray(vals[-tail:], dtype=np.float64)
    slope, icpt = np.polyfit(x, y, 1)
    return float(min(max(icpt, 0.0), 1.0)), float(slope)


def density_report(selection: dict) -> DensityReport:
    """alpha/beta densities of per-N orbit selections.

    ``selection`` maps N to the list of selected orbit sizes. alpha uses
    the largest selected orbit, beta the total.
    """
    Ns = sorted(selection)
    if len(Ns) < 3:
        raise ValueError("density estimates need at least three N values")
    sizes = tuple(tuple(int(k) for k in selection[n]) for n in Ns)
    a = tuple(max(s, default=0) / n for s, n in zip(sizes, Ns))
    b = tuple(sum(s) / n for s, n in zip(sizes, Ns))
    fa, sa = _tail_fit(Ns, a)
    fb, sb = _tail_fit(Ns, b)
    return DensityReport(tuple(Ns), sizes, a, b, fa, fb,
                         {"alpha_slope_in_1_over_N": sa, "beta_slope_in_1_over_N": sb, "tail": 3})


def cantor_columns(K: int, depth: int) -> np.ndarray:
    """Column indices e in 0..K-1 whose offset (e + 1/2)/K has base-4 digits in {0, 3}.

    The kept set of offsets has Lebesgue measure 2^-depth.
    """
    t = (np.arange(K) + 0.5) / K
    keep = np.ones(K, dtype=bool)
    for _ in range(depth):
        t = t * 4
        d = np.floor(t)
        keep &= (d == 0) | (d == 3)
        t = t - d
    return np.flatnonzero(keep)


def select_orbits(spec: dict, F, seg, fmap, dec, N: int) -> dict:
    """Orbits picked by a selection rule; returns ids, sizes, and the selected width."""
    kind = spec.get("kind", "designated")
    lab = dec.orbit_of()
    if kind == "designated":
        oid = designated_orbit(fmap, dec)
        return {"ids": [oid], "sizes": [int(dec.sizes()[oid])]}
    if kind == "good_stacks":
        mu = target_from_dict(spec["target"])
        good = good_stacks(F, mu, int(spec.get("q", 4)), float(spec.get("epsilon", 0.2)))
        ids = sorted({int(lab[row[0]]) for i in good for row in seg.columns[i]})
        return {"ids": ids, "sizes": [int(dec.sizes()[o]) for o in ids], "good_stacks": good,
                "stack_lattice_mass": stack_lattice_mass(F, good, N),
                "stack_mass": float(sum(F.stacks[i].width * F.stacks[i].height for i in good))}
    if kind == "cantor":
        kmin = min(seg.K)
        depth = int(spec.get("depth", max(int(math.floor(math.log(max(kmin, 1), 4))), 0)))
        ids, width = [], Fraction(0)
        for i, grid in enumerate(seg.columns):
            rows = cantor_columns(grid.shape[0], depth)
            ids.extend(int(lab[grid[e][0]]) for e in rows)
            s = F.stacks[i]
            width += s.width * s.height / (2 ** depth)
        ids = sorted(set(ids))
        return {"ids": ids, "sizes": [int(dec.sizes()[o]) for o in ids], "depth": depth,
                "selected_width": float(width)}
    raise ValueError(f"unknown selection kind {kind!r}")


def designated_orbit(fmap, dec) -> int:
    lab = dec.orbit_of()
    if fmap.anchor is not None:
        return int(lab[fmap.anchor])
    return int(np.argmax(dec.sizes()))


# ---------------------------------------------------------------------------
# experiments


def degeneracy_counts(spec) -> dict:
    """Exact eigenphase multiplicities: pairs sharing a phase, and the largest multiplicity."""
    mult = Counter(p.theta.value for p in spec)
    shared = [m for m in mult.values() if m > 1]
    return {"distinct_phases": len(mult), "pairs_in_degenerate_spaces": int(sum(shared)),
            "max_multiplicity": int(max(mult.values()))}


def run_single(cfg: ExperimentConfig, N: int) -> dict:
    """The full pipeline at one N; returns a JSON-ready record."""
    if N > cfg["max_N"]:
        raise ResourceGuard(f"N = {N} exceeds the memory guard max_N = {cfg['max_N']}")
    rm = resolve_map(cfg)
    policy = resolve_policy(cfg)
    prog = rm.program
    fixed = cfg.get("stage")
    n = int(fixed) if fixed is not None else schedule_n_of_N(prog, N, cfg["kappa"])
    F = prog.family(n)
    seg = internal_segments(F, N)
    fmap = glue(seg, policy, F, rm.f)
    U = UnitaryMap(N, fmap)
    spec = full_spectrum(U)
    res = spec.residuals()
    if res.max() > 1e-10:
        raise InvariantViolation(f"eigen-residual {res.max():.3g} above 1e-10 at N = {N}")
    dec = spec.decomposition
    sizes = dec.sizes()

    eps = F.max_width
    S = singularity_points(prog, n)
    fS = rm.f.singular_image(S)
    dl = delta_N(rm.f, fmap, eps, fS)
    dl_int = delta_N(rm.f, fmap, eps, fS, provenance=["internal-segment"])

    targets = resolve_targets(cfg)
    if not targets:
        targets = [("lebesgue", MeasureTarget.lebesgue())]
    leb = MeasureTarget.lebesgue()
    primary = targets[0][1]
    orbits = []
    for i, o in enumerate(dec.orbits):
        om = orbit_measure(o, N, i)
        row = {"orbit_id": i, "K": int(o.shape[0]), "min_Q": int(o[0]),
               "distance_lebesgue": measure_distance(om, leb),
               "distance_target": measure_distance(om, primary)}
        for name, t in targets[1:]:
            row[f"distance_{name}"] = measure_distance(om, t)
        orbits.append(row)

    des = designated_orbit(fmap, dec)
    dom = orbit_measure(dec[des], N, des)
    record = {
        "N": N,
        "stage": n,
        "epsilon_N": float(eps),
        "delta_N": dl.value,
        "delta_N_internal": dl_int.value,
        "delta_by_provenance": dl.by_provenance,
        "delta_excluded_undefined": dl.n_undefined,
        "delta_collar_points": dl.n_collar,
        "provenance_counts": fmap.counts(),
        "n_orbits": len(dec),
        "degeneracy": degeneracy_counts(spec),
        "max_residual": float(res.max()),
        "designated": {"orbit_id": des, "K": int(sizes[des]),
                       "distance_lebesgue": measure_distance(dom, leb),
                       "distance_target": measure_distance(dom, primary),
                       "wasserstein_target": wasserstein1(dom, primary)},
        "orbits": orbits,
        "meta": {k: v for k, v in fmap.meta.items()},
    }
    obs = resolve_observables(cfg)
    if obs:
        record["qe_variance"] = {}
        record["orbit_means"] = {}
        for name, a in obs:
            vals = spectrum_expectations(a, spec)
            record["qe_variance"][name] = float(np.abs(vals - a.mean).sum() / N)
            starts = dec.starts[:-1]
            record["orbit_means"][name] = [float(v) for v in
                                           np.add.reduceat(vals.real, starts) / sizes]
    sel = cfg.get("selection")
    if sel:
        s = select_orbits(sel, F, seg, fmap, dec, N)
        record["selection"] = {k: v for k, v in s.items() if k not in ("ids", "sizes")}
        record["selection"]["n_selected"] = len(s["ids"])
        record["selection"]["beta"] = sum(s["sizes"]) / N
    return record


def _run_one(args):
    raw, base, N = args
    return run_single(validate(raw, base), N)


def run_qlimit_experiment(config, threads: int = 1) -> dict:
    """Run the N-sweep and assemble the summary with convergence fits."""
    cfg = config if isinstance(config, ExperimentConfig) else validate(config)
    for N in cfg.N:
        if N > cfg["max_N"]:
            raise ResourceGuard(f"N = {N} exceeds the memory guard max_N = {cfg['max_N']}")
    if threads > 1 and len(cfg.N) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            sweep = list(ex.map(_run_one, [(cfg.raw, cfg.base_dir, N) for N in cfg.N]))
    else:
        sweep = [run_single(cfg, N) for N in cfg.N]
    sweep.sort(key=lambda r: r["N"])
    return {"config_hash": cfg.config_hash, "sweep": sweep, "fits": summary_fits(sweep)}


def loglog_slope(Ns, vals) -> float:
    x = np.log(np.asarray(Ns, dtype=np.float64))
    y = np.log(np.maximum(np.asarray(vals, dtype=np.float64), 1e-300))
    return float(np.polyfit(x, y, 1)[0])


def summary_fits(sweep: Sequence[dict]) -> dict:
    Ns = [r["N"] for r in sweep]
    fits = {}
    if len(Ns) >= 2:
        d = [r["designated"]["distance_target"] for r in sweep]
        fits["designated_distance"] = {
            "values": d, "loglog_slope": loglog_slope(Ns, d),
            "monotone_decreasing": all(b < a for a, b in zip(d, d[1:])),
            "last_below_first": d[-1] < d[0]}
        dl = [r["delta_N"] for r in sweep]
        fits["delta_N_times_N"] = [x * n for x, n in zip(dl, Ns)]
        if "qe_variance" in sweep[0]:
            fits["qe_variance"] = {}
            for name in sweep[0]["qe_variance"]:
                v = [r["qe_variance"][name] for r in sweep]
                fits["qe_variance"][name] = {"values": v, "loglog_slope": loglog_slope(Ns, v),
                                             "ratio_first_last": v[0] / v[-1] if v[-1] > 0 else None}
    if len(Ns) >= 3:
        sel = {r["N"]: [r["designated"]["K"]] for r in sweep}
        fits["designated_density"] = density_report(sel).to_dict()
        if all("selection" in r for r in sweep):
            fits["selection_beta"] = [r["selection"]["beta"] for r in sweep]
    return fits
