"""Sinc-DVR on the radial half-line and contracted radial bases.

Grid points sit at ``k * spacing`` for ``k = 1..N``; the wavefunction
vanishes at the origin. A hard inner wall simply drops the first few
points, which keeps the kinetic matrix elements of the surviving points
unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from .quantities import CONSTANTS

__all__ = [
    "DvrGrid",
    "ContractedBasis",
    "SingularityError",
    "default_grid",
    "kinetic_matrix",
    "kinetic_matrix_full_line",
    "reference_hamiltonian",
    "contract",
    "hard_wall",
]


class SingularityError(ValueError):
    """The potential is not finite on some grid point."""


@dataclass(frozen=True)
class DvrGrid:
    """Uniform radial grid; ``first`` > 1 when an inner hard wall is present.

    ``mass`` is the kinetic mass of the coordinate (m/2 for the relative
    coordinate of two molecules, 2m for their centre of mass).
    """

    spacing: float
    n_points: int
    mass: float
    first: int = 1

    def __post_init__(self):
        if self.spacing <= 0 or self.mass <= 0:
            raise ValueError("spacing and mass must be positive")
        if not 1 <= self.first <= self.n_points:
            raise ValueError("inner wall removes every grid point")

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.first, self.n_points + 1)

    @property
    def points(self) -> np.ndarray:
        return self.spacing * self.indices

    @property
    def r_max(self) -> float:
        return self.n_points * self.spacing

    def __len__(self):
        return self.n_points - self.first + 1


def default_grid(mass, waist, R6, depth=0.0, r_max=None, spacing=None, refine=1.0):
    """Grid resolving both the shield range and the tweezer.

    The spacing puts at least 8 points across min(R6, w0)/4 and at least 3
    per harmonic-oscillator length of the coordinate at depth ``depth``;
    the box extends to max(6 w0, 3 R6). ``refine`` > 1 shrinks the spacing.
    """
    if spacing is None:
        spacing = min(R6, waist) / 32.0
        if depth > 0:
            omega = math.sqrt(4.0 * depth / (mass * waist**2))
            # one-molecule trap frequency; scale the length to this coordinate's mass
            osc = math.sqrt(CONSTANTS.hbar / (mass * omega))
            spacing = min(spacing, osc / 3.0)
        spacing /= refine
    if r_max is None:
        r_max = max(6.0 * waist, 3.0 * R6)
    n = int(math.ceil(r_max / spacing))
    return DvrGrid(spacing=spacing, n_points=n, mass=mass)


def kinetic_matrix(grid: DvrGrid) -> np.ndarray:
    """Colbert-Miller kinetic energy on (0, inf) in J."""
    k = grid.indices.astype(float)
    diff = k[:, None] - k[None, :]
    summ = k[:, None] + k[None, :]
    sign = np.where(np.abs(diff) % 2 == 1, -1.0, 1.0)
    with np.errstate(divide="ignore"):
        t = sign * (2.0 / diff**2 - 2.0 / summ**2)
    np.fill_diagonal(t, np.pi**2 / 3.0 - 1.0 / (2.0 * k**2))
    return CONSTANTS.hbar**2 / (2.0 * grid.mass * grid.spacing**2) * t


def kinetic_matrix_full_line(n_points: int, spacing: float, mass: float) -> np.ndarray:
    """Colbert-Miller kinetic energy on (-inf, inf), n_points centred nodes."""
    i = np.arange(n_points)
    diff = i[:, None] - i[None, :]
    sign = np.where(diff % 2 == 0, 1.0, -1.0)
    with np.errstate(divide="ignore"):
        t = sign * 2.0 / diff.astype(float) ** 2
    np.fill_diagonal(t, np.pi**2 / 3.0)
    return CONSTANTS.hbar**2 / (2.0 * mass * spacing**2) * t


def _potential_on(grid, potential):
    if potential is None:
        return np.zeros(len(grid))
    v = np.asarray(potential(grid.points) if callable(potential) else potential, dtype=float)
    if v.shape != (len(grid),):
        raise ValueError("potential has the wrong length for this grid")
    if not np.all(np.isfinite(v)):
        bad = grid.points[~np.isfinite(v)][0]
        raise SingularityError(f"potential is not finite at r = {bad:.3e} m")
    return v


def reference_hamiltonian(grid: DvrGrid, potential=None, l: int = 0) -> np.ndarray:
    """T + V + hbar^2 l(l+1) / (2 mass r^2) on the grid."""
    h = kinetic_matrix(grid)
    diag = _potential_on(grid, potential)
    if l:
        diag = diag + CONSTANTS.hbar**2 * l * (l + 1) / (2.0 * grid.mass * grid.points**2)
    h[np.diag_indices_from(h)] += diag
    return h


def hard_wall(grid: DvrGrid, repulsion, ceiling: float) -> DvrGrid:
    """Drop inner points where ``repulsion(r)`` exceeds ``ceiling``.

    ``repulsion`` must be decreasing in r (as c6/r^6 is).
    """
    with np.errstate(over="ignore", divide="ignore"):
        v = np.asarray(repulsion(grid.points))
    above = np.nonzero(~(v <= ceiling))[0]
    if above.size == 0:
        return grid
    return replace(grid, first=grid.first + int(above[-1]) + 1)


@dataclass(frozen=True)
class ContractedBasis:
    """Lowest eigenvectors of a reference radial Hamiltonian.

    ``vectors`` has shape (len(grid), n) with DVR-weighted (unit-norm) columns.
    """

    grid: DvrGrid
    vectors: np.ndarray
    energies: np.ndarray

    @property
    def size(self) -> int:
        return self.vectors.shape[1]

    def project(self, diagonal) -> np.ndarray:
        """Matrix of a grid-diagonal operator in the contracted basis."""
        return self.vectors.T @ (np.asarray(diagonal)[:, None] * self.vectors)

    def project_matrix(self, mat) -> np.ndarray:
        return self.vectors.T @ mat @ self.vectors


def contract(grid: DvrGrid, potential=None, l: int = 0, n: int = 20) -> ContractedBasis:
    if n > len(grid):
        raise ValueError(f"cannot keep {n} contractions on a {len(grid)}-point grid")
    h = reference_hamiltonian(grid, potential, l)
    e, v = linalg.eigh(h, subset_by_index=[0, n - 1])
    # fix the sign so that results are reproducible across LAPACK builds
    signs = np.sign(v[np.argmax(np.abs(v), axis=0), np.arange(n)])
    return ContractedBasis(grid, v * signs, e)
