"""Config-driven experiment runs: single diagonalizations and seed-ensemble sweeps.

A sweep executes a grid of (axis value, seed) cells.  The same seed list is
reused across axis values so trend comparisons are paired, and cells are
merged in a fixed order so the output is byte-identical regardless of how
many workers computed them.  Worker threads hold the GIL only briefly (the
eigensolver releases it); pin ``blas_threads`` to stop the pool and the
BLAS from oversubscribing the machine, and to make results independent of
the worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from threadpoolctl import threadpool_limits

from . import analysis
from .analysis import FitResult, classify_states, linear_fit
from .disorder import DisorderSpec, sample_realization
from .eigensolve import EigenSystem, diagonalize, trace_check
from .errors import AnalysisError, BudgetError, ConfigurationError, DarkCavityError, EigensolveError
from .geometry import (
    CavityConfig,
    LatticeSpec,
    molecule_positions,
    position_array,
    wavevector_grid,
)
from .hamiltonian import ShellSpec, assemble, calibrate, eta_factor, shell_filter

MAX_DIMENSION = 16000  # complex matrix + eigenvectors ~ 8 GB at this size
FRACTION_SUM_RTOL = 1e-8
PR_BOUND_TOL = 1e-9

SWEEP_KINDS = ("size_sweep", "layer_sweep", "disorder_sweep", "cavity_length_sweep", "shell_sweep")
KINDS = SWEEP_KINDS + ("dispersion", "single_run")

AXIS_NAMES = {
    "size_sweep": "n_xy",
    "layer_sweep": "n_z",
    "disorder_sweep": "sigma_e",
    "cavity_length_sweep": "l_z",
    "shell_sweep": "m_max",
    "dispersion": "",
    "single_run": "",
}


@dataclass(frozen=True)
class RunConfig:
    """One fully resolved physical configuration."""

    lattice: LatticeSpec
    l_z: float = 300.0
    epsilon: float = 1.0
    mean_energy: float = 2.0
    sigma_e: float = 0.01
    orientational: bool = True
    positional_fraction: float = 0.0
    target_rabi: float = 0.2
    dark_threshold: float = 0.05
    shell_m_max: int = None  # restrict photon modes to one shell
    allow_large: bool = False

    def __post_init__(self):
        if self.lattice.n_z * self.lattice.a_z >= self.l_z:
            raise ConfigurationError(
                f"molecule stack n_z*a_z = {self.lattice.n_z * self.lattice.a_z} nm does not fit "
                f"inside the cavity (l_z = {self.l_z} nm)"
            )
        if self.shell_m_max is not None:
            if self.lattice.n_x != self.lattice.n_y:
                raise ConfigurationError("shell runs require a square lattice (n_x == n_y)")
            limit = (self.lattice.n_x - 1) // 2
            if not 0 <= self.shell_m_max <= limit:
                raise ConfigurationError(
                    f"shell m_max = {self.shell_m_max} outside the grid range [0, {limit}]"
                )
        if self.target_rabi < 0:
            raise ConfigurationError(f"target_rabi must be >= 0, got {self.target_rabi!r}")
        if not 0.0 < self.dark_threshold < 1.0:
            raise ConfigurationError(
                f"dark_threshold must lie in (0, 1), got {self.dark_threshold!r}"
            )
        # delegate range checks on the disorder fields
        self.disorder_spec(seed=0)

    def cavity(self) -> CavityConfig:
        return CavityConfig.for_lattice(self.lattice, l_z=self.l_z, epsilon=self.epsilon)

    def disorder_spec(self, seed: int) -> DisorderSpec:
        return DisorderSpec(
            mean_energy=self.mean_energy,
            sigma_e=self.sigma_e,
            orientational=self.orientational,
            positional_fraction=self.positional_fraction,
            seed=seed,
        )

    @property
    def n_photon_modes(self) -> int:
        if self.shell_m_max is None:
            return 2 * self.lattice.n_x * self.lattice.n_y
        return 2 if self.shell_m_max == 0 else 16 * self.shell_m_max

    @property
    def dimension(self) -> int:
        return self.lattice.n_molecules + self.n_photon_modes


def rwa_guard(config: RunConfig) -> list:
    """Warnings when the Rabi target strains the rotating-wave approximation.

    Flags target_rabi above 10% of the doubly-excited energy scale
    (mean molecular energy plus the lowest photon energy).
    """
    bound = 0.1 * (config.mean_energy + config.cavity().omega_min)
    if config.target_rabi > bound:
        return [
            f"target_rabi = {config.target_rabi} eV exceeds 10% of the doubly-excited "
            f"energy scale ({bound:.4f} eV); rotating-wave approximation is strained"
        ]
    return []


@dataclass(frozen=True)
class RunSummary:
    seed: int
    dimension: int
    n_molecules: int
    n_modes: int
    dark_count: int
    bright_count: int
    dark_pr_mean: float  # NaN when sigma_e = 0 (degenerate dark manifold)
    gap_k0: float  # NaN when no k = 0 mode is present
    eta: float
    g0: float
    photon_fraction_sum: float


@dataclass(eq=False)
class RunResult:
    summary: RunSummary
    records: list
    modes: tuple
    molecular_energies: np.ndarray
    eigen: EigenSystem = None


def run_single(config: RunConfig, seed: int, keep_eigen: bool = False) -> RunResult:
    """Assemble, diagonalize, and classify one (config, seed) cell.

    Enforces the numerical contract on every run: eigen-residuals and
    normalization (inside diagonalize), the trace identity, photon-fraction
    completeness, and dark-state PR bounds.  Raises BudgetError when the
    matrix dimension exceeds MAX_DIMENSION and allow_large is off.
    """
    dim = config.dimension
    if dim > MAX_DIMENSION and not config.allow_large:
        raise BudgetError(
            f"matrix dimension {dim} exceeds the budget of {MAX_DIMENSION} "
            f"(~{16 * dim**2 * 2 / 1e9:.1f} GB for matrix + eigenvectors); "
            "set allow_large to override"
        )

    cavity = config.cavity()
    lattice = config.lattice
    sites = molecule_positions(lattice, cavity)
    modes = wavevector_grid(lattice, cavity)
    if config.shell_m_max is not None:
        modes = shell_filter(modes, ShellSpec(config.shell_m_max))

    z_coords = position_array(sites)[:, 2]
    eta = eta_factor(z_coords, cavity.l_z)
    calib = calibrate(config.target_rabi, lattice.n_molecules, eta, config.mean_energy)

    realization = sample_realization(config.disorder_spec(seed), lattice)
    ham = assemble(sites, realization, modes, calib)
    eigen = diagonalize(ham, check=True)
    if not trace_check(ham, eigen):
        raise EigensolveError("eigenvalue sum does not reproduce tr(H) to 1e-8 relative")

    records = classify_states(eigen, modes, threshold=config.dark_threshold)

    n_modes = len(modes)
    fraction_sum = float(sum(r.photon_fraction for r in records))
    if abs(fraction_sum - n_modes) > FRACTION_SUM_RTOL * n_modes:
        raise AnalysisError(
            f"photon fractions sum to {fraction_sum!r}, expected {n_modes} "
            f"(completeness violated)"
        )

    dark_prs = [r.pr for r in records if r.classification == analysis.DARK]
    n = lattice.n_molecules
    if dark_prs:
        lo, hi = min(dark_prs), max(dark_prs)
        if lo < 1.0 - PR_BOUND_TOL or hi > n + PR_BOUND_TOL:
            raise AnalysisError(f"dark-state PR range [{lo}, {hi}] outside [1, {n}]")
    # At sigma_e = 0 the dark manifold is degenerate and per-state PR is an
    # artifact of the solver's basis choice; do not aggregate it.
    dark_pr_mean = float(np.mean(dark_prs)) if dark_prs and config.sigma_e > 0 else float("nan")

    summary = RunSummary(
        seed=seed,
        dimension=dim,
        n_molecules=n,
        n_modes=n_modes,
        dark_count=len(dark_prs),
        bright_count=len(records) - len(dark_prs),
        dark_pr_mean=dark_pr_mean,
        gap_k0=analysis.polariton_gap(eigen, modes, config.mean_energy),
        eta=eta,
        g0=calib.g0,
        photon_fraction_sum=fraction_sum,
    )
    return RunResult(
        summary=summary,
        records=records,
        modes=tuple(modes),
        molecular_energies=realization.energies,
        eigen=eigen if keep_eigen else None,
    )


@dataclass(frozen=True)
class ExperimentPlan:
    """A sweep kind, its axis, the base configuration, and the seed list.

    The seed list is shared by every axis value, so per-seed comparisons
    across the axis are paired.
    """

    kind: str
    axis: tuple
    base: RunConfig
    seeds: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if not self.seeds:
            raise ConfigurationError("seed list must not be empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigurationError("seed list contains duplicates")
        if self.kind in SWEEP_KINDS:
            self._validate_axis()
        elif self.axis:
            raise ConfigurationError(f"kind {self.kind!r} takes no axis values")

    def _validate_axis(self):
        if not self.axis:
            raise ConfigurationError(f"{self.kind} needs a nonempty axis")
        if any(b <= a for a, b in zip(self.axis, self.axis[1:])):
            raise ConfigurationError(f"axis values must be strictly increasing, got {self.axis}")
        if self.kind in ("size_sweep", "layer_sweep", "shell_sweep"):
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in self.axis):
                raise ConfigurationError(f"{self.kind} axis must contain integers, got {self.axis}")
        if self.kind == "disorder_sweep":
            if any(v <= 0 for v in self.axis):
                raise ConfigurationError("disorder sweep axis must contain positive sigma_e values")
        elif self.base.sigma_e <= 0:
            raise ConfigurationError(
                "PR statistics require sigma_e > 0 (the dark manifold is degenerate otherwise)"
            )
        # Materializing each configuration runs its full validation (odd
        # sizes, stack fitting the cavity, shell range, ...).
        for value in self.axis:
            self.config_for(value)

    def config_for(self, axis_value) -> RunConfig:
        if axis_value is None or self.kind in ("dispersion", "single_run"):
            return self.base
        if self.kind == "size_sweep":
            lattice = replace(self.base.lattice, n_x=axis_value, n_y=axis_value, n_z=1)
            return replace(self.base, lattice=lattice)
        if self.kind == "layer_sweep":
            return replace(self.base, lattice=replace(self.base.lattice, n_z=axis_value))
        if self.kind == "disorder_sweep":
            return replace(self.base, sigma_e=float(axis_value))
        if self.kind == "cavity_length_sweep":
            return replace(self.base, l_z=float(axis_value))
        if self.kind == "shell_sweep":
            return replace(self.base, shell_m_max=axis_value)
        raise ConfigurationError(f"kind {self.kind!r} has no axis mapping")


@dataclass(frozen=True)
class CellResult:
    axis_value: object
    seed: int
    status: str  # "ok" | "failed"
    dimension: int
    n_molecules: int
    dark_count: int
    bright_count: int
    dark_pr_mean: float
    gap_k0: float
    runtime_s: float
    error: str = ""


@dataclass(eq=False)
class SweepResult:
    kind: str
    axis_name: str
    axis_values: tuple
    seeds: tuple
    cells: list
    stats: dict  # axis value -> EnsembleStat or None
    axis_meta: dict  # axis value -> dict of per-axis scalars
    fit: FitResult = None
    warnings: tuple = ()


@dataclass(eq=False)
class DispersionResult:
    kind: str
    seed: int
    points: list  # analysis.DispersionPoint rows
    bare_modes: list  # (|k|, hbar*omega) pairs, ascending |k|
    mean_energy: float
    molecular_energies: np.ndarray
    summary: RunSummary
    warnings: tuple = ()


def _run_cell(task) -> CellResult:
    axis_value, config, seed = task
    start = time.perf_counter()
    try:
        out = run_single(config, seed)
    except DarkCavityError as exc:
        return CellResult(
            axis_value=axis_value,
            seed=seed,
            status="failed",
            dimension=config.dimension,
            n_molecules=config.lattice.n_molecules,
            dark_count=0,
            bright_count=0,
            dark_pr_mean=float("nan"),
            gap_k0=float("nan"),
            runtime_s=time.perf_counter() - start,
            error=str(exc),
        )
    s = out.summary
    return CellResult(
        axis_value=axis_value,
        seed=seed,
        status="ok",
        dimension=s.dimension,
        n_molecules=s.n_molecules,
        dark_count=s.dark_count,
        bright_count=s.bright_count,
        dark_pr_mean=s.dark_pr_mean,
        gap_k0=s.gap_k0,
        runtime_s=time.perf_counter() - start,
    )


def _execute(tasks, workers: int = 1, blas_threads: int = None, progress=None) -> list:
    """Run cells, optionally on a thread pool, merging in submission order."""

    def run_all():
        if workers <= 1:
            results = []
            for task in tasks:
                cell = _run_cell(task)
                if progress is not None:
                    progress(cell)
                results.append(cell)
            return results
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_cell, task) for task in tasks]
            results = []
            for future in futures:
                cell = future.result()
                if progress is not None:
                    progress(cell)
                results.append(cell)
            return results

    if blas_threads is not None:
        with threadpool_limits(limits=int(blas_threads)):
            return run_all()
    return run_all()


def _aggregate(cells_by_axis) -> dict:
    """Per-axis EnsembleStat of dark PR; None when nothing contributes.

    Cells whose dark-state count is zero (or whose PR mean is NaN, e.g.
    sigma_e = 0) stay visible through n_states_per_realization.
    """
    stats = {}
    for value, cells in cells_by_axis.items():
        ok = [c for c in cells if c.status == "ok"]
        means = [c.dark_pr_mean for c in ok if c.dark_count > 0 and not math.isnan(c.dark_pr_mean)]
        counts = [c.dark_count for c in ok]
        if means:
            stats[value] = analysis.ensemble_stat(means, counts)
        else:
            stats[value] = None
    return stats


def _gap_meta(cells) -> dict:
    gaps = [c.gap_k0 for c in cells if c.status == "ok" and not math.isnan(c.gap_k0)]
    if not gaps:
        return {"gap_mean": float("nan"), "gap_std": float("nan"), "gap_n": 0}
    std = float(np.std(gaps, ddof=1)) if len(gaps) > 1 else 0.0
    return {"gap_mean": float(np.mean(gaps)), "gap_std": std, "gap_n": len(gaps)}


def _sweep(plan: ExperimentPlan, workers, blas_threads, progress) -> SweepResult:
    axis_values = plan.axis if plan.kind in SWEEP_KINDS else (None,)
    configs = [(value, plan.config_for(value)) for value in axis_values]

    warnings = []
    for value, config in configs:
        for message in rwa_guard(config):
            tag = f"[{AXIS_NAMES[plan.kind]}={value}] " if value is not None else ""
            warnings.append(tag + message)

    tasks = [(value, config, seed) for value, config in configs for seed in plan.seeds]
    cells = _execute(tasks, workers=workers, blas_threads=blas_threads, progress=progress)

    cells_by_axis = {value: [] for value in axis_values}
    for cell in cells:
        cells_by_axis[cell.axis_value].append(cell)
    stats = _aggregate(cells_by_axis)

    axis_meta = {}
    for value, config in configs:
        meta = _gap_meta(cells_by_axis[value])
        meta["n_molecules"] = config.lattice.n_molecules
        if plan.kind == "layer_sweep":
            cavity = config.cavity()
            sites = molecule_positions(config.lattice, cavity)
            meta["eta"] = eta_factor(position_array(sites)[:, 2], cavity.l_z)
        if plan.kind == "cavity_length_sweep":
            meta["omega_min"] = config.cavity().omega_min
        if plan.kind == "shell_sweep":
            shell_modes = shell_filter(
                wavevector_grid(config.lattice, config.cavity()), ShellSpec(config.shell_m_max)
            )
            omegas = [m.omega for m in shell_modes]
            meta["n_shell_modes"] = len(shell_modes)
            meta["omega_shell_min"] = min(omegas)
            meta["omega_shell_max"] = max(omegas)
        axis_meta[value] = meta

    fit = None
    if plan.kind == "size_sweep":
        points = [
            (axis_meta[value]["n_molecules"], stats[value].mean)
            for value in axis_values
            if stats[value] is not None
        ]
        try:
            fit = linear_fit(points)
        except AnalysisError:
            fit = None  # fewer than two sizes beyond the onset; fit withheld

    return SweepResult(
        kind=plan.kind,
        axis_name=AXIS_NAMES[plan.kind],
        axis_values=tuple(axis_values),
        seeds=tuple(plan.seeds),
        cells=cells,
        stats=stats,
        axis_meta=axis_meta,
        fit=fit,
        warnings=tuple(warnings),
    )


def size_sweep(plan, workers=1, blas_threads=None, progress=None) -> SweepResult:
    """Dark PR vs in-plane system size (single layer, recalibrated per size)."""
    _expect_kind(plan, "size_sweep")
    return _sweep(plan, workers, blas_threads, progress)


def layer_sweep(plan, workers=1, blas_threads=None, progress=None) -> SweepResult:
    """Dark PR vs number of molecular layers at fixed in-plane size."""
    _expect_kind(plan, "layer_sweep")
    return _sweep(plan, workers, blas_threads, progress)


def disorder_sweep(plan, workers=1, blas_threads=None, progress=None) -> SweepResult:
    """Dark PR vs energetic disorder at fixed Rabi splitting."""
    _expect_kind(plan, "disorder_sweep")
    return _sweep(plan, workers, blas_threads, progress)


def cavity_length_sweep(plan, workers=1, blas_threads=None, progress=None) -> SweepResult:
    """Dark PR vs cavity length; photon energies recomputed per length."""
    _expect_kind(plan, "cavity_length_sweep")
    return _sweep(plan, workers, blas_threads, progress)


def shell_sweep(plan, workers=1, blas_threads=None, progress=None) -> SweepResult:
    """Dark PR when only one shell of photon modes is coupled.

    g0 keeps its full-system calibration (all-mode eta and N); the shell
    Hamiltonian simply omits the other modes.
    """
    _expect_kind(plan, "shell_sweep")
    return _sweep(plan, workers, blas_threads, progress)


def ensemble_run(plan, workers=1, blas_threads=None, progress=None) -> SweepResult:
    """The base configuration across the seed list, no axis."""
    _expect_kind(plan, "single_run")
    return _sweep(plan, workers, blas_threads, progress)


def dispersion_run(config: RunConfig, seed: int) -> DispersionResult:
    """Bright-state dispersion rows plus the bare-mode curve for one run."""
    out = run_single(config, seed)
    points = analysis.dispersion_table(out.records, out.modes, config.mean_energy)
    bare = {}
    for mode in out.modes:
        bare[mode.k_mag] = mode.omega
    return DispersionResult(
        kind="dispersion",
        seed=seed,
        points=points,
        bare_modes=sorted(bare.items()),
        mean_energy=config.mean_energy,
        molecular_energies=out.molecular_energies,
        summary=out.summary,
        warnings=tuple(rwa_guard(config)),
    )


def run_plan(plan: ExperimentPlan, workers=1, blas_threads=None, progress=None):
    """Execute a plan of any kind; sweeps return SweepResult, dispersion its table."""
    if plan.kind == "dispersion":
        return dispersion_run(plan.base, plan.seeds[0])
    if plan.kind == "single_run":
        return ensemble_run(plan, workers, blas_threads, progress)
    runner = {
        "size_sweep": size_sweep,
        "layer_sweep": layer_sweep,
        "disorder_sweep": disorder_sweep,
        "cavity_length_sweep": cavity_length_sweep,
        "shell_sweep": shell_sweep,
    }[plan.kind]
    return runner(plan, workers, blas_threads, progress)


def _expect_kind(plan, kind):
    if plan.kind != kind:
        raise ConfigurationError(f"plan kind {plan.kind!r} handed to the {kind} runner")
