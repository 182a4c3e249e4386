"""Coupling calibration and single-excitation Hamiltonian assembly.

The absolute dipole moment, dielectric constant, and mode volume never
appear individually: they are folded into a single scalar g0, fixed by the
requested Rabi splitting through Omega = 2 * eta * sqrt(N) * g0.  Each
molecule-mode element then reads

    -g0 * sqrt(omega_k / omega_ref) * exp(i k.r) * (mu_hat . e_{k,lambda}(z))

with the dot product taken without conjugation.  The matrix is Hermitian by
mirrored storage; the molecule and photon diagonal blocks carry the bare
energies and there is no direct intermolecular coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .disorder import Realization
from .errors import ConfigurationError, DomainError
from .geometry import PhotonMode, polarization_vector, position_array

SHELL_ALL = "all"


@dataclass(frozen=True)
class CouplingCalibration:
    """Single-molecule coupling scale g0 tied to a target Rabi splitting.

    ``reference_energy`` is the mean molecular transition energy at which
    g0 is anchored; mode prefactors scale as sqrt(omega_k / reference).
    """

    target_rabi: float
    eta: float
    g0: float
    reference_energy: float


def eta_factor(z_coords, l_z: float) -> float:
    """Orientation-and-position factor sqrt(<sin^2(pi z / L_z)>_z / 3)."""
    z = np.asarray(z_coords, dtype=float)
    if z.size == 0:
        raise DomainError("eta_factor needs at least one molecule z-coordinate")
    if np.any(z < 0.0) or np.any(z > l_z):
        raise DomainError("molecule z-coordinates must lie inside [0, L_z]")
    return math.sqrt(np.mean(np.sin(np.pi * z / l_z) ** 2) / 3.0)


def calibrate(
    target_rabi: float, n_molecules: int, eta: float, reference_energy: float
) -> CouplingCalibration:
    """g0 such that the collective splitting 2*eta*sqrt(N)*g0 hits the target.

    target_rabi = 0 is allowed and yields the decoupled limit g0 = 0.
    """
    if n_molecules < 1:
        raise ConfigurationError(f"n_molecules must be >= 1, got {n_molecules}")
    if target_rabi < 0:
        raise ConfigurationError(f"target_rabi must be >= 0, got {target_rabi!r}")
    if not eta > 0:
        raise ConfigurationError(
            "eta must be positive; all molecules sit at field nodes, coupling cannot be calibrated"
        )
    if not reference_energy > 0:
        raise ConfigurationError(f"reference_energy must be positive, got {reference_energy!r}")
    g0 = target_rabi / (2.0 * eta * math.sqrt(n_molecules))
    return CouplingCalibration(
        target_rabi=target_rabi, eta=eta, g0=g0, reference_energy=reference_energy
    )


def coupling_element(
    position, dipole_unit, mode: PhotonMode, calib: CouplingCalibration
) -> complex:
    """Molecule-photon matrix element at (row molecule, column mode), in eV."""
    x, y, z = position
    phase = np.exp(1j * (mode.k_x * x + mode.k_y * y))
    pol = polarization_vector(mode, z)
    prefactor = -calib.g0 * math.sqrt(mode.omega / calib.reference_energy)
    return complex(prefactor * phase * np.dot(np.asarray(dipole_unit), pol))


@dataclass(frozen=True)
class ShellSpec:
    """Selects modes with max(|m_x|, |m_y|) == m_max, or every mode ('all')."""

    m_max: object = SHELL_ALL

    def __post_init__(self):
        if self.m_max == SHELL_ALL:
            return
        if not isinstance(self.m_max, int) or isinstance(self.m_max, bool) or self.m_max < 0:
            raise ConfigurationError(f"m_max must be 'all' or a non-negative integer, got {self.m_max!r}")


def shell_filter(modes, shell: ShellSpec):
    """Modes in the square ring m_max: 2 members for m_max=0, else 16*m_max."""
    if shell.m_max == SHELL_ALL:
        return list(modes)
    grid_max = max(max(abs(m.m_x), abs(m.m_y)) for m in modes)
    if shell.m_max > grid_max:
        raise ConfigurationError(
            f"shell m_max = {shell.m_max} exceeds the grid maximum {grid_max}"
        )
    return [m for m in modes if max(abs(m.m_x), abs(m.m_y)) == shell.m_max]


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Dense Hermitian single-excitation Hamiltonian in eV.

    Rows 0..N-1 are molecular excitations in site order; rows N..N+M-1 are
    photon modes in grid order.
    """

    matrix: np.ndarray
    n_molecules: int
    modes: tuple

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_modes(self) -> int:
        return len(self.modes)


def assemble(sites, realization: Realization, modes, calib: CouplingCalibration) -> HamiltonianMatrix:
    """Build the (N + M) x (N + M) Hamiltonian for one disorder realization.

    Rotating-wave, single-excitation form: both diagonal blocks are bare
    energies, the only off-diagonal entries are the molecule-photon block
    and its mirrored conjugate.  Positional offsets displace the in-plane
    coordinates entering exp(i k.r); z (and hence the mode profile) is
    untouched.
    """
    n = len(sites)
    m = len(modes)
    if n < 1 or m < 1:
        raise ConfigurationError("need at least one molecule and one photon mode")
    if realization.n_molecules != n:
        raise ConfigurationError(
            f"realization has {realization.n_molecules} molecules, lattice has {n}"
        )

    pos = position_array(sites)
    xy = pos[:, :2] + realization.offsets

    k_arr = np.array([[mode.k_x, mode.k_y] for mode in modes])
    omega_arr = np.array([mode.omega for mode in modes])
    prefactor = -calib.g0 * np.sqrt(omega_arr / calib.reference_energy)

    coupling = np.exp(1j * (xy @ k_arr.T))  # (N, M) phase factors
    coupling *= prefactor[np.newaxis, :]

    # mu_hat . e_{k,lambda}(z) varies only with the layer z-coordinate.
    z_values = pos[:, 2]
    for z in np.unique(z_values):
        rows = z_values == z
        e_matrix = np.array([polarization_vector(mode, z) for mode in modes])  # (M, 3)
        coupling[rows] *= realization.dipole_units[rows] @ e_matrix.T

    dim = n + m
    h = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(n)
    h[idx, idx] = realization.energies
    jdx = np.arange(n, dim)
    h[jdx, jdx] = omega_arr
    h[:n, n:] = coupling
    h[n:, :n] = coupling.conj().T
    return HamiltonianMatrix(matrix=h, n_molecules=n, modes=tuple(modes))
