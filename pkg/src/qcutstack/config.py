"""Experiment configuration: parsing, validation, hashing, map builders."""
from __future__ import annotations

import copy
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .cutstack import (
    CutStackProgram,
    IETSpec,
    IntervalQ,
    as_rational,
    build_iet,
    full_shift_program,
    iet_program,
    TwoComponentMap,
)
from .discretize import CrossStackBlend, PeriodicPerStack, SingleOrbitConcat
from .measures import MeasureTarget, target_from_dict
from .skew import FourierObservable, bump_observable, constant, cos_p, cos_q, sin_q


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


class InvariantViolation(RuntimeError):
    pass


class ResourceGuard(RuntimeError):
    pass


DEFAULTS = {
    "kappa": 8,
    "seed": 0,
    "max_N": 1 << 16,
    "oracle_limit": 512,
    "policy": {"kind": "single_orbit"},
    "observables": [],
    "targets": [{"kind": "lebesgue"}],
}


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return "null"
        s = format(x, ".17g")
        if "e" not in s and "." not in s and "inf" not in s:
            s += ".0"
        return s
    return json.dumps(x)


def dumps17(obj, indent: int = 1, _level: int = 0) -> str:
    """JSON text with sorted keys and every float written with 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps17(v, indent, _level + 1)}"
                 for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_fmt(v) for v in obj) + "]"
        items = [pad + dumps17(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        obj = obj.item()
    return _fmt(obj)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    raw: dict
    base_dir: str = "."

    @property
    def N(self) -> list:
        return list(self.raw["N"])

    def __getitem__(self, key):
        return self.raw[key]

    def get(self, key, default=None):
        return self.raw.get(key, default)

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.raw).encode()).hexdigest()[:16]

    def to_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, indent=1) + "\n"

    def with_seed(self, seed: int) -> "ExperimentConfig":
        raw = copy.deepcopy(self.raw)
        raw["seed"] = int(seed)
        return ExperimentConfig(raw, self.base_dir)


def _rat(value, path):
    try:
        return as_rational(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def validate(raw: dict, base_dir: str = ".") -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a JSON object")
    cfg = copy.deepcopy(DEFAULTS)
    cfg.update(copy.deepcopy(raw))
    if "map" not in cfg:
        raise ConfigError("map: missing")
    if "N" not in cfg:
        raise ConfigError("N: missing")
    ns = cfg["N"]
    if not isinstance(ns, list) or not ns or not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in ns):
        raise ConfigError("N: expected a non-empty list of positive integers")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ConfigError("N: values must be strictly increasing")
    for key in ("kappa", "seed", "max_N", "oracle_limit"):
        v = cfg[key]
        if not isinstance(v, int) or isinstance(v, bool) or v < (0 if key == "seed" else 1):
            raise ConfigError(f"{key}: expected a positive integer")
    out = ExperimentConfig(cfg, base_dir)
    # dry-run the builders so errors surface before any work
    resolve_map(out)
    resolve_policy(out)
    resolve_observables(out)
    resolve_targets(out)
    return out


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return validate(raw, os.path.dirname(os.path.abspath(path)))


# ---------------------------------------------------------------------------
# maps


def shipped_program(name: str) -> CutStackProgram:
    """A program stored in the package data directory."""
    ref = resources.files("qcutstack") / "data" / f"{name}.json"
    return CutStackProgram.from_json(ref.read_text(encoding="utf-8"))


def shipped_names() -> list:
    ref = resources.files("qcutstack") / "data"
    return sorted(p.name[:-5] for p in ref.iterdir() if p.name.endswith(".json") and not p.name.startswith("recipe"))


@dataclass(frozen=True, eq=False)
class ResolvedMap:
    f: object
    program: CutStackProgram
    kind: str


def resolve_map(cfg: ExperimentConfig) -> ResolvedMap:
    spec = cfg["map"]
    if not isinstance(spec, dict):
        raise ConfigError("map: expected an object")
    kind = spec.get("kind")
    stages = spec.get("stages")
    if stages is not None and (not isinstance(stages, int) or stages < 1):
        raise ConfigError("map.stages: expected a positive integer")
    try:
        if kind == "iet":
            perm = spec.get("permutation")
            lens = [_rat(v, f"map.lengths[{i}]") for i, v in enumerate(spec.get("lengths", []))]
            try:
                ispec = IETSpec(tuple(perm or ()), tuple(lens))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"map: {exc}") from None
            f, _ = build_iet(ispec)
            return ResolvedMap(f, iet_program(ispec, stages), kind)
        if kind == "rotation":
            alpha = _rat(spec.get("alpha"), "map.alpha")
            if not 0 < alpha < 1:
                raise ConfigError("map.alpha: must lie in (0, 1)")
            ispec = IETSpec((2, 1), (1 - alpha, alpha))
            f, _ = build_iet(ispec)
            return ResolvedMap(f, iet_program(ispec, stages), kind)
        if kind == "two_component":
            m = TwoComponentMap(_rat(spec.get("alpha1"), "map.alpha1"),
                                _rat(spec.get("alpha2"), "map.alpha2"),
                                _rat(spec.get("split", "1/2"), "map.split"))
            return ResolvedMap(m, m.program(stages), kind)
        if kind == "full_shift":
            prog = full_shift_program(stages or 12)
            return ResolvedMap(prog.family(prog.n_stages - 1), prog, kind)
        if kind == "program":
            if "program" in spec:
                prog = CutStackProgram.from_dict(spec["program"])
            elif "path" in spec:
                path = os.path.join(cfg.base_dir, spec["path"])
                with open(path, "r", encoding="utf-8") as fh:
                    prog = CutStackProgram.from_json(fh.read())
            elif "shipped" in spec:
                prog = shipped_program(spec["shipped"])
            else:
                raise ConfigError("map: program needs 'program', 'path' or 'shipped'")
            if stages:
                prog = prog.truncated(stages)
            prog.family(prog.n_stages - 1)
            return ResolvedMap(prog.family(prog.n_stages - 1), prog, kind)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, OSError) as exc:
        raise ConfigError(f"map: {exc}") from None
    raise ConfigError(f"map.kind: unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# policies, observables, targets


def resolve_targets(cfg: ExperimentConfig) -> list:
    out = []
    for i, t in enumerate(cfg.get("targets") or []):
        try:
            out.append((t.get("name") or t.get("kind", "target"), target_from_dict(t)))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(f"targets[{i}]: {exc}") from None
    return out


def resolve_policy(cfg: ExperimentConfig):
    p = cfg["policy"]
    kind = p.get("kind") if isinstance(p, dict) else None
    if kind == "periodic":
        return PeriodicPerStack()
    if kind == "single_orbit":
        return SingleOrbitConcat()
    if kind == "blend":
        try:
            mu1 = target_from_dict(p["mu1"])
            mu2 = target_from_dict(p["mu2"])
            return CrossStackBlend(mu1, mu2, _rat(p.get("alpha1", "1/2"), "policy.alpha1"),
                                   _rat(p.get("alpha2", "1/2"), "policy.alpha2"),
                                   int(p.get("q", 4)), float(p.get("epsilon", 0.1)))
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"policy: {exc}") from None
    raise ConfigError(f"policy.kind: unknown kind {kind!r}")


def observable_from_dict(d: dict) -> FourierObservable:
    kind = d.get("kind", "modes")
    amp = float(d.get("amp", 1.0))
    if kind == "constant":
        return constant(amp)
    if kind == "cos":
        return cos_q(int(d["k"]), amp)
    if kind == "sin":
        return sin_q(int(d["k"]), amp)
    if kind == "cos_p":
        return cos_p(int(d["k"]), amp)
    if kind == "sum":
        obs = [observable_from_dict(t) for t in d["terms"]]
        out = obs[0]
        for o in obs[1:]:
            out = out + o
        return out
    if kind == "modes":
        return FourierObservable.from_dict(d["modes"], real=bool(d.get("real", False)))
    if kind == "bump":
        a, b = d["support"]
        return bump_observable(IntervalQ(as_rational(a), as_rational(b)),
                               as_rational(d["margin"]), int(d.get("n_max", 64))).observable
    raise ValueError(f"unknown observable kind {kind!r}")


def resolve_observables(cfg: ExperimentConfig) -> list:
    out = []
    for i, d in enumerate(cfg.get("observables") or []):
        try:
            out.append((d.get("name") or f"obs{i}", observable_from_dict(d)))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(f"observables[{i}]: {exc}") from None
    return out
