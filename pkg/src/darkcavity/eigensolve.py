"""Full dense Hermitian diagonalization with verified numerical contracts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigensolveError
from .hamiltonian import HamiltonianMatrix

RESIDUAL_RTOL = 1e-8  # residual norm per pair, relative to ||H||_F
NORM_ATOL = 1e-10  # eigenvector normalization slack
TRACE_RTOL = 1e-8


@dataclass(eq=False)
class EigenSystem:
    """Ascending eigenvalues and orthonormal eigenvectors (columns).

    The first ``n_molecules`` rows of each eigenvector are the molecular
    amplitudes a(r); the remaining rows are the photonic amplitudes
    b(k, lambda), both in the deterministic site/mode orderings.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    n_molecules: int

    @property
    def dimension(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def n_states(self) -> int:
        return self.eigenvectors.shape[1]

    @property
    def n_modes(self) -> int:
        return self.dimension - self.n_molecules

    @property
    def molecular_amplitudes(self) -> np.ndarray:
        """(N, dim) view: column i holds a(r) of eigenstate i."""
        return self.eigenvectors[: self.n_molecules]

    @property
    def photonic_amplitudes(self) -> np.ndarray:
        """(M, dim) view: column i holds b(k, lambda) of eigenstate i."""
        return self.eigenvectors[self.n_molecules :]


def diagonalize(ham: HamiltonianMatrix, check: bool = True) -> EigenSystem:
    """Complete spectrum and eigenbasis of the assembled Hamiltonian.

    With ``check`` on (the default), normalization and the residual bound
    ||H v - lambda v|| <= 1e-8 * ||H||_F are verified for every pair and a
    violation raises EigensolveError instead of returning silently.
    """
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(ham.matrix)
    except np.linalg.LinAlgError as exc:
        raise EigensolveError(f"eigh failed to converge: {exc}") from exc
    system = EigenSystem(
        eigenvalues=eigenvalues, eigenvectors=eigenvectors, n_molecules=ham.n_molecules
    )
    if check:
        norm_err = np.abs(np.sum(np.abs(eigenvectors) ** 2, axis=0) - 1.0)
        if norm_err.max() > NORM_ATOL:
            raise EigensolveError(
                f"eigenvector normalization off by {norm_err.max():.3e} (> {NORM_ATOL})"
            )
        h_norm = np.linalg.norm(ham.matrix)
        residual = ham.matrix @ eigenvectors - eigenvectors * eigenvalues[np.newaxis, :]
        res_max = np.linalg.norm(residual, axis=0).max()
        if res_max > RESIDUAL_RTOL * h_norm and h_norm > 0:
            raise EigensolveError(
                f"max eigen-residual {res_max:.3e} exceeds {RESIDUAL_RTOL} * ||H||_F = "
                f"{RESIDUAL_RTOL * h_norm:.3e}"
            )
    return system


def trace_check(ham: HamiltonianMatrix, eigen: EigenSystem) -> bool:
    """True when the eigenvalue sum reproduces tr(H) to 1e-8 relative."""
    if eigen.dimension != ham.dimension:
        raise EigensolveError(
            f"dimension mismatch: eigensystem {eigen.dimension}, matrix {ham.dimension}"
        )
    trace = float(np.trace(ham.matrix).real)
    return abs(float(eigen.eigenvalues.sum()) - trace) <= TRACE_RTOL * abs(trace)
