"""Cavity geometry, photon-mode basis, and molecular lattice placement.

Everything is expressed in eV and nm.  Planck's constant and the speed of
light enter only through the product ``HBAR_C_EV_NM``, so no other unit
conversion appears anywhere downstream.

The cavity confines light between mirrors at z = 0 and z = L_z and is
periodic in x and y.  Only the lowest longitudinal photon band is kept:
each mode is labelled by integers (m_x, m_y) and a polarization ('s' or
'p'), with in-plane wavevector k_w = 2*pi*m_w / L_w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

HBAR_C_EV_NM = 197.3269804  # hbar * c in eV nm (CODATA)

POL_S = "s"
POL_P = "p"
POLARIZATIONS = (POL_S, POL_P)

# Lattice/cavity consistency checks are exact up to this absolute slack (nm).
_GEOM_ATOL = 1e-9


@dataclass(frozen=True)
class LatticeSpec:
    """Finite molecular lattice: counts per axis and fixed spacings in nm.

    N_x and N_y must be odd so that the in-plane mode indices m_w run over
    a symmetric integer range -(N_w-1)/2 .. (N_w-1)/2.
    """

    n_x: int
    n_y: int
    n_z: int = 1
    a_x: float = 10.0
    a_y: float = 10.0
    a_z: float = 10.0

    def __post_init__(self):
        for name in ("n_x", "n_y", "n_z"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {value!r}")
        for name in ("n_x", "n_y"):
            if getattr(self, name) % 2 == 0:
                raise ConfigurationError(
                    f"{name} must be odd so the mode grid is symmetric, got {getattr(self, name)}"
                )
        for name in ("a_x", "a_y", "a_z"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigurationError(f"{name} must be positive, got {value!r}")

    @property
    def n_molecules(self) -> int:
        return self.n_x * self.n_y * self.n_z


@dataclass(frozen=True)
class CavityConfig:
    """Cavity dimensions (nm) and dielectric constant.

    L_x and L_y are tied to the lattice, L_w = a_w * (N_w - 1), so the
    in-plane box just contains the molecules; L_z sets the photon energies.
    """

    l_z: float
    epsilon: float = 1.0
    l_x: float = 0.0
    l_y: float = 0.0

    def __post_init__(self):
        if not self.l_z > 0:
            raise ConfigurationError(f"l_z must be positive, got {self.l_z!r}")
        if not self.epsilon >= 1.0:
            raise ConfigurationError(f"epsilon must be >= 1, got {self.epsilon!r}")
        if self.l_x < 0 or self.l_y < 0:
            raise ConfigurationError("in-plane cavity lengths cannot be negative")

    @classmethod
    def for_lattice(cls, lattice: LatticeSpec, l_z: float, epsilon: float = 1.0) -> "CavityConfig":
        return cls(
            l_z=l_z,
            epsilon=epsilon,
            l_x=lattice.a_x * (lattice.n_x - 1),
            l_y=lattice.a_y * (lattice.n_y - 1),
        )

    @property
    def omega_min(self) -> float:
        """Energy of the lowest photon mode, hbar*c*pi / (sqrt(eps) * L_z), in eV."""
        return HBAR_C_EV_NM * math.pi / (math.sqrt(self.epsilon) * self.l_z)


@dataclass(frozen=True)
class PhotonMode:
    """One cavity mode (m_x, m_y, polarization) of the lowest photon band.

    ``omega`` stores hbar*omega_{c,k} in eV.  ``l_z`` and ``omega0`` (the
    k = 0 mode energy of the same cavity) are carried along so the mode can
    evaluate its own polarization vector.
    """

    m_x: int
    m_y: int
    polarization: str
    k_x: float
    k_y: float
    omega: float
    l_z: float
    omega0: float

    def __post_init__(self):
        if self.polarization not in POLARIZATIONS:
            raise ConfigurationError(f"polarization must be 's' or 'p', got {self.polarization!r}")

    @property
    def k_mag(self) -> float:
        return math.hypot(self.k_x, self.k_y)

    @property
    def key(self) -> tuple:
        return (self.m_x, self.m_y, self.polarization)


@dataclass(frozen=True)
class MoleculeSite:
    """One lattice site: flat index (site ordering) and position in nm."""

    index: int
    position: tuple


def _check_consistent(lattice: LatticeSpec, cavity: CavityConfig) -> None:
    want_x = lattice.a_x * (lattice.n_x - 1)
    want_y = lattice.a_y * (lattice.n_y - 1)
    if abs(cavity.l_x - want_x) > _GEOM_ATOL or abs(cavity.l_y - want_y) > _GEOM_ATOL:
        raise ConfigurationError(
            f"cavity in-plane lengths ({cavity.l_x}, {cavity.l_y}) do not match "
            f"lattice extent ({want_x}, {want_y}); use CavityConfig.for_lattice"
        )


def mode_frequency(k_mag: float, cavity: CavityConfig) -> float:
    """hbar*omega for in-plane wavevector magnitude k_mag (nm^-1), in eV."""
    if k_mag < 0:
        raise DomainError(f"k_mag must be non-negative, got {k_mag}")
    return (HBAR_C_EV_NM / math.sqrt(cavity.epsilon)) * math.sqrt(
        k_mag**2 + (math.pi / cavity.l_z) ** 2
    )


def wavevector_grid(lattice: LatticeSpec, cavity: CavityConfig) -> list:
    """All 2*N_x*N_y photon modes of the lowest band, deterministically ordered.

    Order is lexicographic in (m_x, m_y, polarization) with 's' before 'p'.
    Axes with N_w = 1 contribute only m_w = 0 (k_w = 0).  The extreme |k|
    is pi/a_w per axis, independent of N_w.
    """
    _check_consistent(lattice, cavity)
    omega0 = cavity.omega_min

    def m_range(n):
        return range(-(n - 1) // 2, (n - 1) // 2 + 1)

    modes = []
    for m_x in m_range(lattice.n_x):
        k_x = 2.0 * math.pi * m_x / cavity.l_x if m_x != 0 else 0.0
        for m_y in m_range(lattice.n_y):
            k_y = 2.0 * math.pi * m_y / cavity.l_y if m_y != 0 else 0.0
            omega = mode_frequency(math.hypot(k_x, k_y), cavity)
            for pol in POLARIZATIONS:
                modes.append(
                    PhotonMode(
                        m_x=m_x,
                        m_y=m_y,
                        polarization=pol,
                        k_x=k_x,
                        k_y=k_y,
                        omega=omega,
                        l_z=cavity.l_z,
                        omega0=omega0,
                    )
                )
    return modes


def polarization_vector(mode: PhotonMode, z: float) -> np.ndarray:
    """Complex polarization vector e_{k,lambda}(z) of a mode, dimensionless.

    For k = 0 the transverse directions are fixed by convention: 's' along
    i*y_hat and 'p' along x_hat, both with the sin(pi z / L_z) profile.
    """
    if z < 0.0 or z > mode.l_z:
        raise DomainError(f"z = {z} lies outside the cavity [0, {mode.l_z}]")
    sin_z = math.sin(math.pi * z / mode.l_z)
    k = mode.k_mag
    if k == 0.0:
        if mode.polarization == POL_S:
            return np.array([0.0, 1j * sin_z, 0.0])
        return np.array([sin_z, 0.0, 0.0], dtype=complex)
    kx_hat = mode.k_x / k
    ky_hat = mode.k_y / k
    if mode.polarization == POL_S:
        # k_hat x z_hat = (k_hat_y, -k_hat_x, 0)
        return 1j * sin_z * np.array([ky_hat, -kx_hat, 0.0])
    cos_z = math.cos(math.pi * z / mode.l_z)
    scale = mode.omega0 / mode.omega
    return scale * np.array(
        [sin_z * kx_hat, sin_z * ky_hat, -1j * (k * mode.l_z / math.pi) * cos_z]
    )


def molecule_positions(lattice: LatticeSpec, cavity: CavityConfig) -> list:
    """Lattice sites in (n_x, n_y, n_z)-lexicographic order.

    In-plane coordinates are centred on 0; the z stack is centred on the
    antinode plane L_z / 2, so a single layer sits exactly at L_z / 2.
    """
    _check_consistent(lattice, cavity)
    sites = []
    index = 0
    z_base = cavity.l_z / 2.0 + (0.5 - lattice.n_z / 2.0) * lattice.a_z
    for n_x in range(lattice.n_x):
        x = n_x * lattice.a_x - cavity.l_x / 2.0
        for n_y in range(lattice.n_y):
            y = n_y * lattice.a_y - cavity.l_y / 2.0
            for n_z in range(lattice.n_z):
                sites.append(MoleculeSite(index=index, position=(x, y, z_base + n_z * lattice.a_z)))
                index += 1
    return sites


def position_array(sites) -> np.ndarray:
    """Stack site positions into an (N, 3) float array."""
    return np.array([s.position for s in sites], dtype=float)
