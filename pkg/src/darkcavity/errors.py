"""Exception hierarchy shared by all darkcavity modules."""


class DarkCavityError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(DarkCavityError):
    """Invalid geometry, lattice, coupling, or plan parameters."""


class DomainError(DarkCavityError):
    """Argument outside the physical domain of an operation."""


class BudgetError(DarkCavityError):
    """Projected matrix dimension exceeds the memory budget."""


class EigensolveError(DarkCavityError):
    """Eigensolver failure or violated numerical contract."""


class AnalysisError(DarkCavityError):
    """Post-processing called on inputs it cannot interpret."""


class PlanError(ConfigurationError):
    """Experiment plan file missing, malformed, or inconsistent."""


class ResultsError(DarkCavityError):
    """Refusal or failure while persisting or loading result files."""
