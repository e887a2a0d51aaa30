"""Scenario configuration: YAML document <-> validated ``Scenario``.

Every key is optional; an empty document yields the reference scenario
(M=64, m=16 random antenna selection, three equal-power paths at 0, +20 and
-20 degrees, window nu=50).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import yaml

from ..array_geom import UlaConfig
from ..channel_model import ScatteringGeometry
from ..sdp import SolverConfig

ESTIMATORS = ("oneshot", "time_average", "subspace_ls", "subspace_only")
SKETCH_KINDS = ("random_selection", "coprime_selection", "generic_orthonormal")


class ScenarioError(ValueError):
    """Invalid configuration; ``problems`` maps each offending key to a message."""

    def __init__(self, problems: dict[str, str]):
        self.problems = dict(problems)
        super().__init__("; ".join(f"{k}: {v}" for k, v in self.problems.items()))


@dataclass(frozen=True)
class Scenario:
    M: int = 64
    theta_max_deg: float = 60.0
    path_angles_deg: tuple[float, ...] = (0.0, 20.0, -20.0)
    # None -> equal powers summing to 1
    path_powers: tuple[float, ...] | None = None
    tau: int = 1
    nu: int = 50
    sketch_kind: str = "random_selection"
    m: int = 16
    redraw_sketch: bool = True
    snr_db: tuple[float, ...] = (-10.0, 0.0, 10.0, 20.0)
    # coherence time in fading steps; inf means a channel frozen over the window
    tau_c: tuple[float, ...] = (1.0, 10.0, 100.0, 1000.0)
    trials: int = 100
    seed: int = 0
    estimators: tuple[str, ...] = ESTIMATORS
    rank_rule: str = "known"
    eigengap_threshold: float = 0.05
    subspace_source: str = "rmmv"
    epsilon_scale: float = 1.0
    solver: SolverConfig = field(default_factory=SolverConfig)
    workers: int = 1

    @property
    def ula(self) -> UlaConfig:
        return UlaConfig(self.M, math.radians(self.theta_max_deg))

    @property
    def geometry(self) -> ScatteringGeometry:
        thetas = [math.radians(a) for a in self.path_angles_deg]
        if self.path_powers is None:
            return ScatteringGeometry.equal_power(thetas)
        return ScatteringGeometry(thetas, self.path_powers)

    @property
    def p(self) -> int:
        return len(self.path_angles_deg)

    def with_overrides(self, **kw) -> Scenario:
        solver_kw = {k: kw.pop(k) for k in [k for k in kw if k in _SOLVER_KEYS] if kw[k] is not None}
        kw = {k: v for k, v in kw.items() if v is not None}
        sc = replace(self, **kw)
        if solver_kw:
            sc = replace(sc, solver=replace(sc.solver, **solver_kw))
        validate(sc)
        return sc


_SOLVER_KEYS = {f.name for f in fields(SolverConfig)}
_TUPLE_KEYS = {"path_angles_deg", "path_powers", "snr_db", "tau_c", "estimators"}


def validate(sc: Scenario) -> None:
    bad: dict[str, str] = {}

    def check(key, ok, msg):
        if not ok:
            bad[key] = msg

    check("M", isinstance(sc.M, int) and sc.M >= 1, f"must be a positive integer, got {sc.M!r}")
    check("theta_max_deg", 0 < sc.theta_max_deg < 90, f"must lie in (0, 90), got {sc.theta_max_deg!r}")
    check("path_angles_deg", len(sc.path_angles_deg) >= 1, "at least one path is required")
    if "theta_max_deg" not in bad:
        out = [a for a in sc.path_angles_deg if abs(a) > sc.theta_max_deg]
        check("path_angles_deg", not out, f"angles {out} outside +/-{sc.theta_max_deg} deg")
    if sc.path_powers is not None:
        pw = sc.path_powers
        check("path_powers", len(pw) == len(sc.path_angles_deg), "must have one power per path angle")
        check("path_powers", all(x >= 0 for x in pw) and any(x > 0 for x in pw),
              "powers must be >= 0 with at least one > 0")
    check("tau", isinstance(sc.tau, int) and sc.tau >= 1, f"must be a positive integer, got {sc.tau!r}")
    check("nu", isinstance(sc.nu, int) and sc.nu >= 1, f"must be a positive integer, got {sc.nu!r}")
    check("sketch_kind", sc.sketch_kind in SKETCH_KINDS, f"must be one of {SKETCH_KINDS}, got {sc.sketch_kind!r}")
    check("m", isinstance(sc.m, int) and 1 <= sc.m <= (sc.M if isinstance(sc.M, int) else 0),
          f"must satisfy 1 <= m <= M, got {sc.m!r}")
    check("snr_db", len(sc.snr_db) >= 1 and all(np.isfinite(sc.snr_db)), "needs at least one finite value")
    check("tau_c", len(sc.tau_c) >= 1 and all(t > 0 for t in sc.tau_c), "needs at least one value, all > 0")
    check("trials", isinstance(sc.trials, int) and sc.trials >= 1, f"must be >= 1, got {sc.trials!r}")
    check("seed", isinstance(sc.seed, int) and sc.seed >= 0, f"must be a non-negative integer, got {sc.seed!r}")
    unknown = [e for e in sc.estimators if e not in ESTIMATORS]
    check("estimators", len(sc.estimators) >= 1 and not unknown,
          f"must be a non-empty subset of {ESTIMATORS}, unknown {unknown}")
    check("rank_rule", sc.rank_rule in ("known", "eigengap"), f"must be 'known' or 'eigengap', got {sc.rank_rule!r}")
    check("eigengap_threshold", 0 < sc.eigengap_threshold < 1, "must lie in (0, 1)")
    check("subspace_source", sc.subspace_source in ("rmmv", "oracle"), "must be 'rmmv' or 'oracle'")
    check("epsilon_scale", sc.epsilon_scale >= 0, "must be >= 0")
    check("workers", isinstance(sc.workers, int) and sc.workers >= 1, "must be >= 1")
    if "subspace_ls" in sc.estimators and isinstance(sc.m, int):
        check("m", sc.m >= len(sc.path_angles_deg) or sc.rank_rule != "known",
              "subspace_ls needs m >= p (underdetermined otherwise)")
    if bad:
        raise ScenarioError(bad)


def scenario_from_dict(doc: dict | None) -> Scenario:
    """Build a scenario from a (possibly nested) mapping, reporting every bad key."""
    doc = dict(doc or {})
    flat: dict = {}
    bad: dict[str, str] = {}
    sections = {
        "array": {"M": "M", "theta_max_deg": "theta_max_deg"},
        "paths": None,
        "schedule": {"tau": "tau", "nu": "nu"},
        "sketch": {"kind": "sketch_kind", "m": "m", "redraw_per_trial": "redraw_sketch"},
        "sweep": {"snr_db": "snr_db", "tau_c": "tau_c", "alpha": "alpha"},
        "subspace": {"rank_rule": "rank_rule", "threshold": "eigengap_threshold", "source": "subspace_source"},
        "solver": None,
    }
    top = {f.name for f in fields(Scenario)} - {"solver"}
    for key, value in doc.items():
        if key == "paths":
            try:
                flat["path_angles_deg"] = [float(p["theta_deg"]) for p in value]
                with_power = sum("power" in p for p in value)
                if 0 < with_power < len(value):
                    bad["paths"] = "give a power for every path or for none"
                elif with_power:
                    flat["path_powers"] = [float(p["power"]) for p in value]
            except (TypeError, KeyError, ValueError):
                bad["paths"] = "expected a list of {theta_deg, power?} mappings"
        elif key == "solver":
            if not isinstance(value, dict):
                bad["solver"] = "expected a mapping"
                continue
            for sk, sv in value.items():
                if sk in _SOLVER_KEYS:
                    flat.setdefault("_solver", {})[sk] = sv
                else:
                    bad[f"solver.{sk}"] = "unknown key"
        elif key in sections:
            if not isinstance(value, dict):
                bad[key] = "expected a mapping"
                continue
            for sk, sv in value.items():
                if sk in sections[key]:
                    flat[sections[key][sk]] = sv
                else:
                    bad[f"{key}.{sk}"] = "unknown key"
        elif key in top:
            flat[key] = value
        else:
            bad[key] = "unknown key"
    if "alpha" in flat:
        alphas = flat.pop("alpha")
        if "tau_c" in flat:
            bad["sweep.alpha"] = "give either sweep.tau_c or sweep.alpha, not both"
        else:
            try:
                flat["tau_c"] = [_tau_c_of_alpha(float(a)) for a in _as_list(alphas)]
            except ValueError as exc:
                bad["sweep.alpha"] = str(exc)
    solver_kw = flat.pop("_solver", {})
    for key in list(flat):
        if key in _TUPLE_KEYS:
            try:
                vals = _as_list(flat[key])
                flat[key] = tuple(str(v) if key == "estimators" else _number(v) for v in vals)
            except (TypeError, ValueError):
                bad[key] = f"expected a list, got {flat[key]!r}"
                del flat[key]
    for key in ("M", "tau", "nu", "m", "trials", "seed", "workers"):
        if key in flat and not (isinstance(flat[key], int) and not isinstance(flat[key], bool)):
            bad[key] = f"must be an integer, got {flat[key]!r}"
            del flat[key]
    for key in ("theta_max_deg", "eigengap_threshold", "epsilon_scale"):
        if key in flat:
            try:
                flat[key] = float(flat[key])
            except (TypeError, ValueError):
                bad[key] = f"must be a number, got {flat[key]!r}"
                del flat[key]
    if "redraw_sketch" in flat and not isinstance(flat["redraw_sketch"], bool):
        bad["sketch.redraw_per_trial"] = "must be a boolean"
        del flat["redraw_sketch"]
    try:
        solver = SolverConfig(**{k: _solver_value(k, v) for k, v in solver_kw.items()})
    except (TypeError, ValueError) as exc:
        bad["solver"] = str(exc)
        solver = SolverConfig()
    sc = Scenario(**flat, solver=solver)
    try:
        validate(sc)
    except ScenarioError as exc:
        bad.update({k: v for k, v in exc.problems.items() if k not in bad})
    if bad:
        raise ScenarioError(bad)
    return sc


def _solver_value(key, value):
    if key in ("max_iterations", "adapt_until"):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ValueError(f"solver.{key} must be an integer, got {value!r}")
        return value
    if key == "adaptive_penalty":
        if not isinstance(value, bool):
            raise ValueError("solver.adaptive_penalty must be a boolean")
        return value
    return float(value)


def _number(v) -> float:
    if isinstance(v, str) and v.strip().lower() in (".inf", "+.inf", "inf"):
        return math.inf
    if isinstance(v, bool):
        raise ValueError(v)
    return float(v)


def _as_list(v):
    if isinstance(v, (list, tuple)):
        return list(v)
    if isinstance(v, (int, float, str)):
        return [v]
    raise TypeError(v)


def _tau_c_of_alpha(alpha: float) -> float:
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    return math.inf if alpha == 1 else 1.0 / math.log(1.0 / alpha)


def scenario_to_dict(sc: Scenario) -> dict:
    doc = {
        "array": {"M": sc.M, "theta_max_deg": sc.theta_max_deg},
        "paths": [{"theta_deg": a} for a in sc.path_angles_deg],
        "schedule": {"tau": sc.tau, "nu": sc.nu},
        "sketch": {"kind": sc.sketch_kind, "m": sc.m, "redraw_per_trial": sc.redraw_sketch},
        "sweep": {"snr_db": list(sc.snr_db), "tau_c": list(sc.tau_c)},
        "trials": sc.trials,
        "seed": sc.seed,
        "estimators": list(sc.estimators),
        "subspace": {"rank_rule": sc.rank_rule, "threshold": sc.eigengap_threshold, "source": sc.subspace_source},
        "epsilon_scale": sc.epsilon_scale,
        "solver": {f.name: getattr(sc.solver, f.name) for f in fields(SolverConfig)},
        "workers": sc.workers,
    }
    if sc.path_powers is not None:
        for entry, pw in zip(doc["paths"], sc.path_powers):
            entry["power"] = pw
    return doc


def load_scenario(path: str | Path | None) -> Scenario:
    if path is None:
        return scenario_from_dict({})
    try:
        doc = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ScenarioError({"<document>": f"not valid YAML: {exc}"}) from exc
    if doc is not None and not isinstance(doc, dict):
        raise ScenarioError({"<document>": "top level must be a mapping"})
    return scenario_from_dict(doc)


def dump_scenario(sc: Scenario, path: str | Path | None = None) -> str:
    text = yaml.safe_dump(scenario_to_dict(sc), sort_keys=False)
    if path is not None:
        Path(path).write_text(text)
    return text
