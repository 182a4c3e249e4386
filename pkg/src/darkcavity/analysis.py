"""Photon fractions, dark-state classification, participation ratios, and fits.

A state is dark when its photonic weight is strictly below the threshold
(default 5%).  The participation ratio over molecular amplitudes,
(sum |a|^2)^2 / sum |a|^4, counts how many molecules a state effectively
spans; it is invariant under rescaling of a, so no renormalization is done.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AnalysisError
from .eigensolve import EigenSystem

DARK = "dark"
BRIGHT = "bright"
DARK_THRESHOLD = 0.05

LOWER_BAND = "LP"
UPPER_BAND = "UP"


@dataclass(frozen=True)
class StateRecord:
    """Per-eigenstate summary: energy, photonic weight, PR, dominant mode."""

    index: int
    energy: float
    photon_fraction: float
    pr: float  # NaN when the molecular part is exactly zero
    assigned_mode: tuple  # (m_x, m_y, polarization) with the largest |b|^2
    classification: str


@dataclass(frozen=True)
class EnsembleStat:
    """Mean of per-realization means with across-realization sample std."""

    mean: float
    std: float
    n_realizations: int
    n_states_per_realization: tuple

    @property
    def sem(self) -> float:
        return self.std / math.sqrt(self.n_realizations)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def photon_fraction(photonic_amplitudes) -> float:
    """Total squared amplitude on the photon modes, sum |b(k, lambda)|^2."""
    b = np.asarray(photonic_amplitudes)
    return float(np.sum(np.abs(b) ** 2))


def participation_ratio(molecular_amplitudes) -> float:
    """(sum |a|^2)^2 / sum |a|^4 over the molecular amplitudes."""
    a2 = np.abs(np.asarray(molecular_amplitudes)) ** 2
    s2 = float(a2.sum())
    if s2 == 0.0:
        raise AnalysisError("participation ratio undefined for an all-zero molecular part")
    return s2**2 / float((a2**2).sum())


def classify_states(eigen: EigenSystem, modes, threshold: float = DARK_THRESHOLD) -> list:
    """StateRecords for every eigenstate; dark iff photon fraction < threshold.

    The assigned mode is the argmax of |b|^2, ties resolved by the
    deterministic mode ordering.  Pure-photon states get pr = NaN.
    """
    if len(modes) != eigen.n_modes:
        raise AnalysisError(f"got {len(modes)} modes for an eigensystem with {eigen.n_modes}")
    a2 = np.abs(eigen.molecular_amplitudes) ** 2
    b2 = np.abs(eigen.photonic_amplitudes) ** 2
    fractions = b2.sum(axis=0)
    s2 = a2.sum(axis=0)
    s4 = (a2**2).sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        pr = np.where(s2 > 0.0, s2**2 / s4, np.nan)
    assigned = b2.argmax(axis=0)

    records = []
    for i in range(eigen.n_states):
        fraction = float(fractions[i])
        records.append(
            StateRecord(
                index=i,
                energy=float(eigen.eigenvalues[i]),
                photon_fraction=fraction,
                pr=float(pr[i]),
                assigned_mode=modes[assigned[i]].key,
                classification=DARK if fraction < threshold else BRIGHT,
            )
        )
    return records


def ensemble_stat(per_realization_means, n_states_per_realization) -> EnsembleStat:
    """Aggregate per-realization means; sample std (ddof=1), 0 for n = 1."""
    means = [float(m) for m in per_realization_means]
    if not means:
        raise AnalysisError("ensemble statistic needs at least one realization")
    mean = float(np.mean(means))
    std = float(np.std(means, ddof=1)) if len(means) > 1 else 0.0
    return EnsembleStat(
        mean=mean,
        std=std,
        n_realizations=len(means),
        n_states_per_realization=tuple(int(c) for c in n_states_per_realization),
    )


def dark_pr_stat(realizations) -> EnsembleStat:
    """PR averaged over dark states per realization, then across realizations.

    ``realizations`` is a sequence of StateRecord sequences, one per
    disorder draw.  A realization without any dark state is an error (it is
    reported by index, never silently dropped).
    """
    means = []
    counts = []
    empty = []
    for i, records in enumerate(realizations):
        dark_prs = [r.pr for r in records if r.classification == DARK]
        counts.append(len(dark_prs))
        if not dark_prs:
            empty.append(i)
        else:
            means.append(float(np.mean(dark_prs)))
    if empty:
        raise AnalysisError(f"realizations {empty} contain no dark states")
    return ensemble_stat(means, counts)


def polariton_gap(eigen: EigenSystem, modes, reference_energy: float) -> float:
    """Mean k = 0 polariton gap across the k = 0 modes.

    Per mode, the gap is measured between the highest-weight state above
    ``reference_energy`` (the mean molecular energy) and the one below it.
    The upper and lower polaritons always straddle that energy, and their
    energies are insensitive to how the solver mixes the two nearly
    degenerate k = 0 polarizations, which raw weight ranking is not.

    NaN when the mode list has no k = 0 member (e.g. an outer shell) or a
    side carries no photonic weight at all (decoupled limit).
    """
    k0 = [j for j, mode in enumerate(modes) if mode.m_x == 0 and mode.m_y == 0]
    if not k0:
        return float("nan")
    b2 = np.abs(eigen.photonic_amplitudes) ** 2
    above = eigen.eigenvalues >= reference_energy
    gaps = []
    for j in k0:
        upper = np.where(above, b2[j], 0.0)
        lower = np.where(above, 0.0, b2[j])
        if upper.max() == 0.0 or lower.max() == 0.0:
            gaps.append(float("nan"))
            continue
        gaps.append(float(eigen.eigenvalues[upper.argmax()] - eigen.eigenvalues[lower.argmax()]))
    return float(np.mean(gaps))


@dataclass(frozen=True)
class DispersionPoint:
    band: str
    k_mag: float
    energy: float
    photon_fraction: float


def dispersion_table(records, modes, mean_energy: float, per_band: int = 25) -> list:
    """Bright states as (band, |k|, energy, fraction) rows, LP below the mean
    molecular energy and UP at or above it.

    Each band keeps its ``per_band`` lowest-energy states (ties broken by
    energy then |k|), mirroring how dispersion plots are drawn.
    """
    k_of = {mode.key: mode.k_mag for mode in modes}
    bands = {LOWER_BAND: [], UPPER_BAND: []}
    for r in records:
        if r.classification != BRIGHT:
            continue
        band = LOWER_BAND if r.energy < mean_energy else UPPER_BAND
        bands[band].append(
            DispersionPoint(
                band=band,
                k_mag=k_of[r.assigned_mode],
                energy=r.energy,
                photon_fraction=r.photon_fraction,
            )
        )
    rows = []
    for band in (LOWER_BAND, UPPER_BAND):
        selected = sorted(bands[band], key=lambda p: (p.energy, p.k_mag))[:per_band]
        rows.extend(selected)
    return rows


def linear_fit(points, n_min: float = 2000) -> FitResult:
    """Ordinary least squares PR-vs-N fit restricted to points with N >= n_min."""
    qualifying = [(float(n), float(pr)) for n, pr in points if n >= n_min]
    if len(qualifying) < 2:
        raise AnalysisError(
            f"linear fit needs >= 2 points with N >= {n_min}, got {len(qualifying)}"
        )
    x = np.array([p[0] for p in qualifying])
    y = np.array([p[1] for p in qualifying])
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return FitResult(
        slope=float(slope), intercept=float(intercept), r_squared=r_squared, n_points=len(qualifying)
    )
