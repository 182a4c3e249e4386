"""Dark-state delocalization of disordered molecules in a multimode cavity.

Builds and diagonalizes the single-excitation Hamiltonian of N molecules
coupled to the lowest photon band of a 3D Fabry-Perot cavity, classifies
the eigenstates by photon fraction, and measures dark-state participation
ratios across ensembles of disorder realizations.
"""

from .analysis import (
    BRIGHT,
    DARK,
    DispersionPoint,
    EnsembleStat,
    FitResult,
    StateRecord,
    classify_states,
    dark_pr_stat,
    dispersion_table,
    linear_fit,
    participation_ratio,
    photon_fraction,
    polariton_gap,
)
from .disorder import (
    DisorderSpec,
    Realization,
    derive_seed,
    resample_with_seed,
    sample_realization,
)
from .eigensolve import EigenSystem, diagonalize, trace_check
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
from .experiments import (
    MAX_DIMENSION,
    CellResult,
    DispersionResult,
    ExperimentPlan,
    RunConfig,
    RunResult,
    RunSummary,
    SweepResult,
    cavity_length_sweep,
    dispersion_run,
    disorder_sweep,
    ensemble_run,
    layer_sweep,
    run_plan,
    run_single,
    rwa_guard,
    shell_sweep,
    size_sweep,
)
from .figures import FIGURE_KINDS, emit_figure
from .geometry import (
    HBAR_C_EV_NM,
    CavityConfig,
    LatticeSpec,
    MoleculeSite,
    PhotonMode,
    mode_frequency,
    molecule_positions,
    polarization_vector,
    position_array,
    wavevector_grid,
)
from .hamiltonian import (
    CouplingCalibration,
    HamiltonianMatrix,
    ShellSpec,
    assemble,
    calibrate,
    coupling_element,
    eta_factor,
    shell_filter,
)
from .planfile import load_plan, plan_from_dict, resolved_dict
from .results import format_float, load_results, plan_hash, write_results
from .version import __version__

__all__ = [name for name in dir() if not name.startswith("_")]
