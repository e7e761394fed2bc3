"""Command-line front end.

Subcommands: build, spectrum, qlimit, egorov, trace-check. Every output
file starts with a header line carrying the config hash, floats are
written with 17 significant digits, and reruns with the same config and
seed produce byte-identical files.

Exit codes: 0 ok, 2 configuration error, 3 invariant violation,
4 resource guard.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile

import numpy as np

from .config import (
    ConfigError,
    ExperimentConfig,
    InvariantViolation,
    ResourceGuard,
    dumps17,
    load_config,
    observable_from_dict,
    resolve_map,
    resolve_policy,
)
from .cutstack import IntervalQ, as_rational, singularity_points
from .discretize import delta_N, glue, internal_segments, schedule_n_of_N
from .hilbert import gaussian_state
from .qlimits import run_qlimit_experiment
from .qmap import OracleLimitError, UnitaryMap, full_spectrum
from .skew import FourierObservable, bump_observable
from .weyl import defect_on_state, dense_trace, egorov_defect, op_trace

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_RESOURCE = 0, 2, 3, 4


def header(cfg: ExperimentConfig, command: str) -> str:
    return f"# qcutstack command={command} config_hash={cfg.config_hash} seed={cfg['seed']}"


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _g(x) -> str:
    return format(float(x), ".17g")


def _guard(cfg: ExperimentConfig):
    for N in cfg.N:
        if N > cfg["max_N"]:
            raise ResourceGuard(f"N = {N} exceeds the memory guard max_N = {cfg['max_N']}")


def _build(cfg: ExperimentConfig, N: int):
    rm = resolve_map(cfg)
    fixed = cfg.get("stage")
    n = int(fixed) if fixed is not None else schedule_n_of_N(rm.program, N, cfg["kappa"])
    F = rm.program.family(n)
    fmap = glue(internal_segments(F, N), resolve_policy(cfg), F, rm.f)
    return rm, n, F, fmap


def cmd_build(cfg: ExperimentConfig, out: str, **_) -> int:
    _guard(cfg)
    for N in cfg.N:
        _, n, _, fmap = _build(cfg, N)
        write_atomic(os.path.join(out, f"map_N{N}.csv"), fmap.to_csv(header(cfg, "build") + f" N={N} stage={n}"))
    return EXIT_OK


def cmd_spectrum(cfg: ExperimentConfig, out: str, **_) -> int:
    _guard(cfg)
    summary = {"config_hash": cfg.config_hash, "spectra": []}
    worst = 0.0
    for N in cfg.N:
        _, n, _, fmap = _build(cfg, N)
        spec = full_spectrum(UnitaryMap(N, fmap))
        res = spec.residuals()
        worst = max(worst, float(res.max()))
        write_atomic(os.path.join(out, f"spectrum_N{N}.csv"),
                     spec.to_csv(header(cfg, "spectrum") + f" N={N} stage={n}", res))
        summary["spectra"].append({"N": N, "stage": n, "n_orbits": len(spec.bases),
                                   "max_residual": float(res.max())})
    write_atomic(os.path.join(out, "spectrum_summary.json"), dumps17(summary) + "\n")
    if worst > 1e-10:
        raise InvariantViolation(f"eigen-residual {worst:.3g} exceeds 1e-10")
    return EXIT_OK


def cmd_qlimit(cfg: ExperimentConfig, out: str, threads: int = 1, **_) -> int:
    _guard(cfg)
    rep = run_qlimit_experiment(cfg, threads=threads)
    write_atomic(os.path.join(out, "summary.json"), dumps17(rep) + "\n")
    obs_names = list(rep["sweep"][0].get("orbit_means", {}))
    extra = sorted({k for r in rep["sweep"] for o in r["orbits"] for k in o
                    if k.startswith("distance_") and k not in ("distance_lebesgue", "distance_target")})
    buf = io.StringIO()
    buf.write(header(cfg, "qlimit") + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "orbit_id", "K", "min_Q", "designated", "distance_lebesgue", "distance_target"]
               + extra + [f"mean_{n}" for n in obs_names])
    for r in rep["sweep"]:
        des = r["designated"]["orbit_id"]
        for o in r["orbits"]:
            w.writerow([r["N"], o["orbit_id"], o["K"], o["min_Q"], int(o["orbit_id"] == des),
                        _g(o["distance_lebesgue"]), _g(o["distance_target"])]
                       + [_g(o[k]) for k in extra]
                       + [_g(r["orbit_means"][n][o["orbit_id"]]) for n in obs_names])
    write_atomic(os.path.join(out, "orbits.csv"), buf.getvalue())
    return EXIT_OK


def cmd_egorov(cfg: ExperimentConfig, out: str, oracle_limit: int | None = None, **_) -> int:
    _guard(cfg)
    eg = cfg.get("egorov") or {}
    lim = oracle_limit or cfg["oracle_limit"]
    try:
        if "bump" in eg:
            b = eg["bump"]
            lo, hi = b["support"]
            bump = bump_observable(IntervalQ(as_rational(lo), as_rational(hi)),
                                   as_rational(b["margin"]), int(b.get("n_max", 64)))
            obs, dev = bump.observable, bump.deviation
        elif "observable" in eg:
            obs, dev = observable_from_dict(eg["observable"]), 0.0
        else:
            raise ConfigError("egorov: needs 'bump' or 'observable'")
        p1 = eg.get("prop1")
        if p1:
            s = as_rational(p1["s"])
            a = observable_from_dict(p1["observable"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"egorov: {exc}") from None
    buf = io.StringIO()
    buf.write(header(cfg, "egorov") + "\n")
    w = csv.writer(buf, lineterminator="\n")
    cols = ["N", "stage", "epsilon_N", "delta_N", "delta_N_internal", "defect", "defect_over_delta", "bump_deviation"]
    if p1:
        cols += ["prop1_functional", "prop1_abs_a_s"]
    w.writerow(cols)
    for N in cfg.N:
        rm, n, F, fmap = _build(cfg, N)
        U = UnitaryMap(N, fmap)
        fS = rm.f.singular_image(singularity_points(rm.program, n))
        eps = F.max_width
        try:
            rep = egorov_defect(obs, rm.f, U, eps, fS, oracle_limit=lim, bump_deviation=dev)
        except OracleLimitError as exc:
            raise ResourceGuard(str(exc)) from None
        d_int = delta_N(rm.f, fmap, eps, fS, provenance=["internal-segment"]).value
        row = [N, n, _g(eps), _g(rep.delta.value), _g(d_int), _g(rep.defect), _g(rep.ratio), _g(dev)]
        if p1:
            psi = gaussian_state(s, N)
            try:
                row += [_g(defect_on_state(a, rm.f, U, psi)), _g(abs(a.eval_q(float(s))))]
            except ValueError as exc:
                raise ConfigError(f"egorov.prop1 needs a map defined everywhere: {exc}") from None
        w.writerow(row)
    write_atomic(os.path.join(out, "egorov.csv"), buf.getvalue())
    return EXIT_OK


def random_trig(rng: np.random.Generator, n_max: int, n_modes: int = 6) -> FourierObservable:
    coeffs = {}
    for _ in range(n_modes):
        n = (int(rng.integers(-n_max, n_max + 1)), int(rng.integers(-n_max, n_max + 1)))
        coeffs[n] = coeffs.get(n, 0) + complex(rng.standard_normal(), rng.standard_normal())
    return FourierObservable(coeffs)


def cmd_trace_check(cfg: ExperimentConfig, out: str, oracle_limit: int | None = None, **_) -> int:
    _guard(cfg)
    tc = cfg.get("trace") or {}
    count = int(tc.get("count", 20))
    lim = oracle_limit or cfg["oracle_limit"]
    rng = np.random.default_rng(cfg["seed"])
    buf = io.StringIO()
    buf.write(header(cfg, "trace-check") + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "index", "re_mean", "im_mean", "re_trace", "im_trace", "deviation", "dense_checked"])
    worst = 0.0
    for N in cfg.N:
        for i in range(count):
            a = random_trig(rng, min(int(tc.get("n_max", 8)), N - 1))
            t = op_trace(a, N)
            if N <= lim:
                d = dense_trace(a, N)
                dev = abs(d - a.mean)
                checked = 1
            else:
                d, dev, checked = t, abs(t - a.mean), 0
            worst = max(worst, dev)
            w.writerow([N, i, _g(a.mean.real), _g(a.mean.imag), _g(d.real), _g(d.imag), _g(dev), checked])
    write_atomic(os.path.join(out, "trace.csv"), buf.getvalue())
    if worst > 1e-10:
        raise InvariantViolation(f"trace deviation {worst:.3g} exceeds 1e-10")
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "spectrum": cmd_spectrum,
    "qlimit": cmd_qlimit,
    "egorov": cmd_egorov,
    "trace-check": cmd_trace_check,
}


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcutstack", description="Quantized cutting-and-stacking experiments")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="experiment config (JSON)")
        s.add_argument("--out", default=".", help="output directory")
        s.add_argument("--threads", type=int, default=1, help="worker processes for the N sweep")
        s.add_argument("--oracle-limit", type=int, default=None, help="largest N for dense oracles")
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        seed = os.environ.get("QLIMIT_SEED")
        if seed is not None:
            try:
                cfg = cfg.with_seed(int(seed))
            except ValueError:
                raise ConfigError(f"QLIMIT_SEED: not an integer: {seed!r}") from None
        return COMMANDS[args.command](cfg, args.out, threads=max(args.threads, 1),
                                      oracle_limit=args.oracle_limit)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceGuard as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
