"""Results persistence: CSV tables, JSON summaries, and run manifests.

Result files are deterministic: floats are serialized with 17 significant
digits (exact round trip for 64-bit values), rows are emitted in a fixed
order, and anything volatile (timestamps, per-cell runtimes) lives only in
the manifest.  Rerunning a plan with the same seeds therefore reproduces
the CSV and summary byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import ResultsError
from .experiments import DispersionResult, SweepResult
from .planfile import resolved_dict
from .version import __version__

SWEEP_CELL_COLUMNS = (
    "kind",
    "axis_name",
    "axis_value",
    "seed",
    "status",
    "dimension",
    "n_molecules",
    "dark_count",
    "bright_count",
    "dark_pr_mean",
    "gap_k0",
    "error",
)

DISPERSION_COLUMNS = ("band", "k_mag", "energy", "photon_fraction")


def format_float(value) -> str:
    """17-significant-digit decimal text; exact round trip for float64."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"


def _format_cell_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def _sanitize(obj):
    """JSON-ready copy: NaN/inf become null, numpy scalars become python."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    return obj


def plan_hash(plan) -> str:
    """Content hash of the fully resolved physical parameters and seeds."""
    canonical = json.dumps(resolved_dict(plan), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _write_text(path: Path, text: str):
    path.write_text(text)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell_value(v) for v in row])


def _stat_entry(axis_value, stat):
    if stat is None:
        return {
            "axis_value": axis_value,
            "mean": None,
            "std": None,
            "sem": None,
            "n_realizations": 0,
            "n_states_per_realization": [],
        }
    return {
        "axis_value": axis_value,
        "mean": stat.mean,
        "std": stat.std,
        "sem": stat.sem,
        "n_realizations": stat.n_realizations,
        "n_states_per_realization": list(stat.n_states_per_realization),
    }


def _sweep_summary(result: SweepResult) -> dict:
    fit = None
    if result.fit is not None:
        fit = {
            "slope": result.fit.slope,
            "intercept": result.fit.intercept,
            "r_squared": result.fit.r_squared,
            "n_points": result.fit.n_points,
        }
    return {
        "kind": result.kind,
        "axis_name": result.axis_name,
        "axis_values": list(result.axis_values),
        "seeds": list(result.seeds),
        "stats": [_stat_entry(v, result.stats[v]) for v in result.axis_values],
        "axis_meta": [
            {"axis_value": v, **result.axis_meta[v]} for v in result.axis_values
        ],
        "fit": fit,
        "warnings": list(result.warnings),
    }


def _dispersion_summary(result: DispersionResult) -> dict:
    s = result.summary
    return {
        "kind": "dispersion",
        "seed": result.seed,
        "mean_energy": result.mean_energy,
        "bare_modes": [[k, w] for k, w in result.bare_modes],
        "run": {
            "dimension": s.dimension,
            "n_molecules": s.n_molecules,
            "n_modes": s.n_modes,
            "dark_count": s.dark_count,
            "bright_count": s.bright_count,
            "gap_k0": s.gap_k0,
            "eta": s.eta,
            "g0": s.g0,
        },
        "warnings": list(result.warnings),
    }


def write_results(result, outdir, plan, force: bool = False, run_info: dict = None) -> dict:
    """Persist a sweep or dispersion result; returns {name: Path}.

    Refuses to overwrite existing result files unless ``force`` is set.
    The manifest carries the config hash, tool version, per-cell status and
    timing, and the creation timestamp; nothing volatile goes anywhere else.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    if isinstance(result, SweepResult):
        files = {
            "cells": outdir / "cells.csv",
            "summary": outdir / "summary.json",
            "manifest": outdir / "manifest.json",
        }
    elif isinstance(result, DispersionResult):
        files = {
            "dispersion": outdir / "dispersion.csv",
            "energies": outdir / "energies.csv",
            "summary": outdir / "summary.json",
            "manifest": outdir / "manifest.json",
        }
    else:
        raise ResultsError(f"cannot persist object of type {type(result).__name__}")

    existing = [str(p) for p in files.values() if p.exists()]
    if existing and not force:
        raise ResultsError(
            f"refusing to overwrite existing result files {existing}; pass force to allow"
        )

    if isinstance(result, SweepResult):
        rows = [
            (
                result.kind,
                result.axis_name,
                cell.axis_value,
                cell.seed,
                cell.status,
                cell.dimension,
                cell.n_molecules,
                cell.dark_count,
                cell.bright_count,
                cell.dark_pr_mean,
                cell.gap_k0,
                cell.error,
            )
            for cell in result.cells
        ]
        _write_csv(files["cells"], SWEEP_CELL_COLUMNS, rows)
        summary = _sweep_summary(result)
        manifest_cells = [
            {
                "axis_value": _sanitize(cell.axis_value),
                "seed": cell.seed,
                "status": cell.status,
                "runtime_s": cell.runtime_s,
                "error": cell.error,
            }
            for cell in result.cells
        ]
    else:
        rows = [(p.band, p.k_mag, p.energy, p.photon_fraction) for p in result.points]
        _write_csv(files["dispersion"], DISPERSION_COLUMNS, rows)
        _write_csv(files["energies"], ("energy",), [(e,) for e in result.molecular_energies])
        summary = _dispersion_summary(result)
        manifest_cells = [{"seed": result.seed, "status": "ok"}]

    _write_text(files["summary"], json.dumps(_sanitize(summary), indent=2, sort_keys=True) + "\n")

    manifest = {
        "config_hash": plan_hash(plan),
        "tool_version": __version__,
        "resolved_plan": resolved_dict(plan),
        "cells": manifest_cells,
        "warnings": _sanitize(list(getattr(result, "warnings", ()))),
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    if run_info:
        manifest["run_info"] = dict(run_info)
    _write_text(files["manifest"], json.dumps(_sanitize(manifest), indent=2, sort_keys=True) + "\n")
    return files


def _parse_value(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def load_results(outdir) -> dict:
    """Read back a results directory: summary plus parsed CSV tables."""
    outdir = Path(outdir)
    summary_path = outdir / "summary.json"
    if not summary_path.exists():
        raise ResultsError(f"no summary.json under {outdir}")
    loaded = {"summary": json.loads(summary_path.read_text())}
    manifest_path = outdir / "manifest.json"
    if manifest_path.exists():
        loaded["manifest"] = json.loads(manifest_path.read_text())
    for name in ("cells", "dispersion", "energies"):
        path = outdir / f"{name}.csv"
        if not path.exists():
            continue
        with open(path, newline="") as handle:
            reader = csv.DictReader(handle)
            loaded[name] = [
                {k: _parse_value(v) for k, v in row.items()} for row in reader
            ]
    return loaded
