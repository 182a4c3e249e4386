"""Command-line surface: run plans, validate them, emit figures, run oracles.

Exit codes: 0 success, 1 validation failure (bad flags, bad plan, refusal
to overwrite), 2 runtime failure (solver error, failed cells, I/O error).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import (
    AnalysisError,
    BudgetError,
    ConfigurationError,
    DarkCavityError,
    DomainError,
    EigensolveError,
    PlanError,
    ResultsError,
)
from .eigensolve import diagonalize
from .experiments import MAX_DIMENSION, RunConfig, rwa_guard, run_plan, run_single
from .figures import FIGURE_KINDS, emit_figure
from .geometry import HBAR_C_EV_NM, LatticeSpec, PhotonMode
from .hamiltonian import HamiltonianMatrix
from .planfile import load_plan
from .results import load_results, write_results
from .version import __version__

OUTPUT_DIR_ENV = "DARKCAVITY_OUT"

_VALIDATION_ERRORS = (PlanError, ConfigurationError, BudgetError, ResultsError, DomainError)
_RUNTIME_ERRORS = (EigensolveError, AnalysisError)


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="darkcavity", description=__doc__)
    parser.add_argument("--version", action="version", version=f"darkcavity {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="execute an experiment plan and persist results")
    run.add_argument("plan", help="path to a plan JSON file")
    run.add_argument("--out", default=None, help=f"output directory (default ${OUTPUT_DIR_ENV} or ./results/<plan-stem>)")
    run.add_argument("--seeds", default=None, help="override: a count (first K plan seeds) or a comma-separated seed list")
    run.add_argument("--threads", type=int, default=1, help="worker threads over (axis value, seed) cells")
    run.add_argument("--blas-threads", type=int, default=None, help="BLAS threads per cell (default: 1 when --threads > 1, library default otherwise)")
    run.add_argument("--force", action="store_true", help="overwrite existing result files")
    run.add_argument("--allow-large", action="store_true", help="lift the matrix-dimension budget")

    val = sub.add_parser("validate", help="dry-run checks: schema, RWA guard, memory estimate")
    val.add_argument("plan", help="path to a plan JSON file")
    val.add_argument("--allow-large", action="store_true", help="lift the matrix-dimension budget")

    fig = sub.add_parser("fig", help="emit a figure from stored results")
    fig.add_argument("results", help="results directory written by `run`")
    fig.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    fig.add_argument("--out", default=None, help="output SVG path (default <results>/<kind>.svg)")
    fig.add_argument("--png", action="store_true", help="also emit a PNG next to the SVG")

    sub.add_parser("oracle", help="run the analytic oracle suite (fast)")
    return parser


def _parse_seed_override(text, plan):
    if "," in text:
        try:
            return tuple(int(part) for part in text.split(","))
        except ValueError:
            raise PlanError(f"--seeds list must contain integers, got {text!r}")
    try:
        count = int(text)
    except ValueError:
        raise PlanError(f"--seeds must be a count or a comma-separated list, got {text!r}")
    if not 1 <= count <= len(plan.seeds):
        raise PlanError(
            f"--seeds count must lie in [1, {len(plan.seeds)}] (the plan's seed list); got {count}"
        )
    return plan.seeds[:count]


def _cmd_run(args) -> int:
    plan = load_plan(args.plan)
    if args.seeds is not None:
        plan = replace(plan, seeds=_parse_seed_override(args.seeds, plan))
    if args.allow_large:
        plan = replace(plan, base=replace(plan.base, allow_large=True))

    if args.out is not None:
        outdir = Path(args.out)
    else:
        root = Path(os.environ.get(OUTPUT_DIR_ENV, "results"))
        outdir = root / Path(args.plan).stem

    workers = max(1, args.threads)
    blas_threads = args.blas_threads
    if blas_threads is None and workers > 1:
        blas_threads = 1  # avoid oversubscription; results independent of worker count

    def progress(cell):
        label = f"{cell.axis_value}" if cell.axis_value is not None else "-"
        print(
            f"[cell] axis={label} seed={cell.seed} status={cell.status} "
            f"dim={cell.dimension} {cell.runtime_s:.1f}s",
            file=sys.stderr,
        )

    result = run_plan(plan, workers=workers, blas_threads=blas_threads, progress=progress)
    files = write_results(
        result,
        outdir,
        plan,
        force=args.force,
        run_info={"workers": workers, "blas_threads": blas_threads},
    )
    for name, path in sorted(files.items()):
        print(f"wrote {name}: {path}")

    failed = [c for c in getattr(result, "cells", []) if c.status != "ok"]
    if failed:
        print(f"{len(failed)} cell(s) failed; see manifest for details", file=sys.stderr)
        return 2
    return 0


def _cmd_validate(args) -> int:
    plan = load_plan(args.plan)
    if args.allow_large:
        plan = replace(plan, base=replace(plan.base, allow_large=True))
    axis_values = plan.axis if plan.axis else (None,)

    print(f"plan kind: {plan.kind}   seeds: {len(plan.seeds)}")
    print(f"{'axis':>10} {'dim':>8} {'memory':>10} {'budget':>8}  rwa")
    over_budget = False
    for value in axis_values:
        config = plan.config_for(value)
        dim = config.dimension
        mem_gb = 16 * dim**2 * 2 / 1e9
        ok = dim <= MAX_DIMENSION or config.allow_large
        over_budget = over_budget or not ok
        warnings = rwa_guard(config)
        label = f"{value}" if value is not None else "-"
        print(
            f"{label:>10} {dim:>8} {mem_gb:>9.2f}G {'ok' if ok else 'OVER':>8}  "
            f"{'warning' if warnings else 'ok'}"
        )
        for message in warnings:
            print(f"           rwa: {message}")
    if over_budget:
        print("one or more configurations exceed the dimension budget; use --allow-large", file=sys.stderr)
        return 1
    print("plan is valid")
    return 0


def _cmd_fig(args) -> int:
    loaded = load_results(args.results)
    out = Path(args.out) if args.out else Path(args.results) / f"{args.kind}.svg"
    for path in emit_figure(loaded, args.kind, out, png=args.png):
        print(f"wrote {path}")
    return 0


def _oracle_two_level() -> list:
    omega_e, omega_c, g = 2.0, 2.0661, 0.1
    mode = PhotonMode(
        m_x=0, m_y=0, polarization="p", k_x=0.0, k_y=0.0, omega=omega_c, l_z=300.0,
        omega0=omega_c,
    )
    matrix = np.array([[omega_e, g], [g, omega_c]], dtype=complex)
    eigen = diagonalize(HamiltonianMatrix(matrix=matrix, n_molecules=1, modes=(mode,)))
    delta = omega_c - omega_e
    split = math.sqrt(delta**2 / 4.0 + g**2)
    expected = np.array([(omega_e + omega_c) / 2.0 - split, (omega_e + omega_c) / 2.0 + split])
    err = np.abs(eigen.eigenvalues - expected).max()
    return [("two-level detuned splitting", err < 1e-10, f"max |dE| = {err:.2e}")]


def _oracle_collective() -> list:
    checks = []
    n_side = 19  # 361 molecules
    omega_e = 2.0
    resonant_l_z = HBAR_C_EV_NM * math.pi / omega_e

    base = RunConfig(
        lattice=LatticeSpec(n_x=n_side, n_y=n_side, n_z=1),
        sigma_e=0.0,
        orientational=False,
        shell_m_max=0,
    )
    n = base.lattice.n_molecules

    out = run_single(base, seed=1, keep_eigen=True)
    w = out.eigen.eigenvalues
    n_dark = int(np.sum(np.abs(w - omega_e) <= 1e-10))
    checks.append(
        (
            "collective limit: N-1 uncoupled molecular levels",
            n_dark == n - 1,
            f"{n_dark} of expected {n - 1}",
        )
    )
    omega_c = out.modes[0].omega
    uncoupled = np.abs(w - omega_c).min()
    checks.append(
        (
            "collective limit: one uncoupled photon mode",
            uncoupled <= 1e-10,
            f"|dE| = {uncoupled:.2e}",
        )
    )

    resonant = run_single(replace(base, l_z=resonant_l_z), seed=1, keep_eigen=True)
    w = resonant.eigen.eigenvalues
    g0 = resonant.summary.g0
    expected_split = 2.0 * g0 * math.sqrt(n)
    err = abs((w.max() - w.min()) - expected_split)
    checks.append(
        (
            "collective limit: resonant splitting 2 g sqrt(N)",
            err <= 1e-8,
            f"|d(split)| = {err:.2e}",
        )
    )
    return checks


def _oracle_decoupled() -> list:
    config = RunConfig(lattice=LatticeSpec(n_x=11, n_y=11, n_z=1), target_rabi=0.0)
    out = run_single(config, seed=3)
    fractions = np.array([r.photon_fraction for r in out.records])
    pure = bool(np.all((fractions == 0.0) | (fractions == 1.0)))
    n = config.lattice.n_molecules
    return [
        ("decoupled limit: photon fractions exactly {0, 1}", pure, f"N = {n}"),
        (
            "decoupled limit: dark count equals N",
            out.summary.dark_count == n,
            f"{out.summary.dark_count} of {n}",
        ),
    ]


def _cmd_oracle() -> int:
    checks = _oracle_two_level() + _oracle_collective() + _oracle_decoupled()
    failures = 0
    for name, passed, detail in checks:
        print(f"[{'ok' if passed else 'FAIL'}] {name}  ({detail})")
        if not passed:
            failures += 1
    if failures:
        print(f"{failures} oracle check(s) failed", file=sys.stderr)
        return 2
    print("all oracle checks passed")
    return 0


def cli(argv) -> int:
    """Entry point used by tests; returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "fig":
            return _cmd_fig(args)
        if args.command == "oracle":
            return _cmd_oracle()
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _RUNTIME_ERRORS as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except DarkCavityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser.error(f"unknown command {args.command!r}")
    return 1


def main():
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
