"""Declarative experiment plans: strict-schema JSON on disk.

Unknown keys are rejected everywhere -- a silently ignored typo in a
physics parameter is the main reproducibility hazard this guards against.
Omitted keys fall back to the standard parameter set (mean molecular
energy 2 eV, sigma_e 0.01 eV, L_z 300 nm, epsilon 1, spacing 10 nm, Rabi
target 0.2 eV, dark threshold 5%, 10 derived seeds).
"""

from __future__ import annotations

import json
from pathlib import Path

from .disorder import derive_seed
from .errors import PlanError
from .experiments import KINDS, SWEEP_KINDS, ExperimentPlan, RunConfig
from .geometry import LatticeSpec

DEFAULT_SEED_BASE = 42
DEFAULT_SEED_COUNT = 10

DEFAULT_AXES = {
    "size_sweep": (11, 21, 31, 41, 51, 71),
    "layer_sweep": (1, 3, 5, 7, 9),
    "disorder_sweep": (0.005, 0.01, 0.02),
    "cavity_length_sweep": (260.0, 300.0, 340.0),
    "shell_sweep": (0, 5, 10, 20),
    "dispersion": (),
    "single_run": (),
}

_INT_AXIS_KINDS = ("size_sweep", "layer_sweep", "shell_sweep")


def _require_mapping(value, where):
    if not isinstance(value, dict):
        raise PlanError(f"{where} must be a JSON object, got {type(value).__name__}")
    return value


def _reject_unknown(section: dict, allowed, where):
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise PlanError(
            f"unknown key(s) {unknown} in {where}; valid keys: {sorted(allowed)}"
        )


def _get_int(section, key, default, where):
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise PlanError(f"{where}.{key} must be an integer, got {value!r}")
    return value


def _get_float(section, key, default, where):
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise PlanError(f"{where}.{key} must be a number, got {value!r}")
    return float(value)


def _get_bool(section, key, default, where):
    value = section.get(key, default)
    if not isinstance(value, bool):
        raise PlanError(f"{where}.{key} must be true or false, got {value!r}")
    return value


def _parse_axis(kind, raw):
    if raw is None:
        return DEFAULT_AXES[kind]
    if not isinstance(raw, list):
        raise PlanError(f"axis must be a list, got {type(raw).__name__}")
    if kind not in SWEEP_KINDS and raw:
        raise PlanError(f"kind {kind!r} takes no axis values")
    values = []
    for item in raw:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise PlanError(f"axis entries must be numbers, got {item!r}")
        if kind in _INT_AXIS_KINDS:
            if not isinstance(item, int):
                raise PlanError(f"{kind} axis entries must be integers, got {item!r}")
            values.append(item)
        else:
            values.append(float(item))
    return tuple(values)


def _parse_seeds(raw):
    if raw is None:
        raw = {"base": DEFAULT_SEED_BASE, "count": DEFAULT_SEED_COUNT}
    if isinstance(raw, list):
        seeds = []
        for item in raw:
            if isinstance(item, bool) or not isinstance(item, int):
                raise PlanError(f"seed list entries must be integers, got {item!r}")
            seeds.append(item)
        if not seeds:
            raise PlanError("seed list must not be empty")
        return tuple(seeds)
    if isinstance(raw, dict):
        _reject_unknown(raw, ("base", "count"), "seeds")
        base = _get_int(raw, "base", DEFAULT_SEED_BASE, "seeds")
        count = _get_int(raw, "count", DEFAULT_SEED_COUNT, "seeds")
        if count < 1:
            raise PlanError(f"seeds.count must be >= 1, got {count}")
        return tuple(derive_seed(base, i) for i in range(count))
    raise PlanError("seeds must be a list of integers or {base, count}")


def plan_from_dict(data: dict, where: str = "plan") -> ExperimentPlan:
    """Validate a parsed plan document and materialize the defaults."""
    _require_mapping(data, where)
    _reject_unknown(
        data,
        ("kind", "axis", "lattice", "cavity", "disorder", "coupling", "analysis", "seeds", "allow_large"),
        where,
    )
    kind = data.get("kind")
    if kind not in KINDS:
        raise PlanError(f"{where}.kind must be one of {KINDS}, got {kind!r}")

    lattice_raw = _require_mapping(data.get("lattice", {}), f"{where}.lattice")
    _reject_unknown(lattice_raw, ("n_x", "n_y", "n_z", "a_x", "a_y", "a_z"), f"{where}.lattice")
    lattice = LatticeSpec(
        n_x=_get_int(lattice_raw, "n_x", 31, "lattice"),
        n_y=_get_int(lattice_raw, "n_y", 31, "lattice"),
        n_z=_get_int(lattice_raw, "n_z", 1, "lattice"),
        a_x=_get_float(lattice_raw, "a_x", 10.0, "lattice"),
        a_y=_get_float(lattice_raw, "a_y", 10.0, "lattice"),
        a_z=_get_float(lattice_raw, "a_z", 10.0, "lattice"),
    )

    cavity_raw = _require_mapping(data.get("cavity", {}), f"{where}.cavity")
    _reject_unknown(cavity_raw, ("l_z", "epsilon"), f"{where}.cavity")
    disorder_raw = _require_mapping(data.get("disorder", {}), f"{where}.disorder")
    _reject_unknown(
        disorder_raw,
        ("mean_energy", "sigma_e", "orientational", "positional_fraction"),
        f"{where}.disorder",
    )
    coupling_raw = _require_mapping(data.get("coupling", {}), f"{where}.coupling")
    _reject_unknown(coupling_raw, ("target_rabi",), f"{where}.coupling")
    analysis_raw = _require_mapping(data.get("analysis", {}), f"{where}.analysis")
    _reject_unknown(analysis_raw, ("dark_threshold",), f"{where}.analysis")

    base = RunConfig(
        lattice=lattice,
        l_z=_get_float(cavity_raw, "l_z", 300.0, "cavity"),
        epsilon=_get_float(cavity_raw, "epsilon", 1.0, "cavity"),
        mean_energy=_get_float(disorder_raw, "mean_energy", 2.0, "disorder"),
        sigma_e=_get_float(disorder_raw, "sigma_e", 0.01, "disorder"),
        orientational=_get_bool(disorder_raw, "orientational", True, "disorder"),
        positional_fraction=_get_float(disorder_raw, "positional_fraction", 0.0, "disorder"),
        target_rabi=_get_float(coupling_raw, "target_rabi", 0.2, "coupling"),
        dark_threshold=_get_float(analysis_raw, "dark_threshold", 0.05, "analysis"),
        allow_large=_get_bool(data, "allow_large", False, where),
    )

    return ExperimentPlan(
        kind=kind,
        axis=_parse_axis(kind, data.get("axis")),
        base=base,
        seeds=_parse_seeds(data.get("seeds")),
    )


def load_plan(path) -> ExperimentPlan:
    """Parse and validate a plan file, applying the standard defaults."""
    path = Path(path)
    if not path.exists():
        raise PlanError(f"plan file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise PlanError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return plan_from_dict(data, where=str(path))


def resolved_dict(plan: ExperimentPlan) -> dict:
    """Fully resolved plan parameters as a canonical, JSON-ready mapping."""
    lattice = plan.base.lattice
    return {
        "kind": plan.kind,
        "axis": list(plan.axis),
        "lattice": {
            "n_x": lattice.n_x,
            "n_y": lattice.n_y,
            "n_z": lattice.n_z,
            "a_x": lattice.a_x,
            "a_y": lattice.a_y,
            "a_z": lattice.a_z,
        },
        "cavity": {"l_z": plan.base.l_z, "epsilon": plan.base.epsilon},
        "disorder": {
            "mean_energy": plan.base.mean_energy,
            "sigma_e": plan.base.sigma_e,
            "orientational": plan.base.orientational,
            "positional_fraction": plan.base.positional_fraction,
        },
        "coupling": {"target_rabi": plan.base.target_rabi},
        "analysis": {"dark_threshold": plan.base.dark_threshold},
        "seeds": list(plan.seeds),
        "allow_large": plan.base.allow_large,
    }
