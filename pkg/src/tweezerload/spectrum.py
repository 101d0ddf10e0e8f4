"""Single- and two-molecule tweezer spectra.

The two-molecule Hamiltonian is written in the product basis

    (r contractions) x (R contractions) x |l L J M>

where r = r1 - r2 (kinetic mass m/2) and R = (r1 + r2)/2 (mass 2m). The
trap couples r and R through its Legendre expansion; the shield c6/r^6 is
diagonal in the channels. Interaction energies are measured against the
same machinery run with the shield switched off, so that basis errors
common to both calculations cancel.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy import linalg

from . import angular
from .quantities import CONSTANTS, Species, TweezerConfig, characteristic_energy
from .radial import ContractedBasis, contract, default_grid, hard_wall, kinetic_matrix, reference_hamiltonian

log = logging.getLogger(__name__)

__all__ = [
    "BasisParams",
    "SingleLevel",
    "SingleSpectrum",
    "PairLevel",
    "PairSpectrum",
    "PairHamiltonian",
    "solve_single",
    "solve_pair",
    "regime_classify",
    "DepthPoint",
    "solve_depth",
    "scan_depths",
    "REGIMES",
]

REGIMES = ("no-single-bound", "no-pair-bound", "blockaded", "unblockaded")


@dataclass(frozen=True)
class BasisParams:
    """Truncation and grid parameters shared by all solves.

    ``bound_threshold`` is in units of E6: a level counts as bound only if
    it lies below -bound_threshold * E6.

    ``min_trapped`` > 0 keeps a pair eigenstate only if the probability of
    finding both molecules within ``trap_radius`` waists of the centre is at
    least that fraction of the non-interacting pair ground state's. This
    drops box-discretised states in which one molecule has left the tweezer.
    The default 0 keeps every level below threshold.
    """

    l_max: int = 6
    n_contractions: int = 20
    bosonic: bool = True
    grid_refine: float = 1.0
    r_max: float | None = None
    wall_ratio: float = 1e6
    bound_threshold: float = 1e-3
    n_levels: int = 50
    l1_max: int | None = None
    shield_in_reference: bool = True
    trap_radius: float = 1.5
    min_trapped: float = 0.0

    def single_l_max(self) -> int:
        return self.l_max if self.l1_max is None else self.l1_max

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class SingleLevel:
    epsilon: float
    l1: int
    n: int

    @property
    def degeneracy(self) -> int:
        return 2 * self.l1 + 1


@dataclass(frozen=True)
class SingleSpectrum:
    """Bound one-molecule levels, deepest first.

    ``epsilon0`` is the ground binding energy used for interaction energies.
    It comes from half the ground energy of two non-interacting molecules in
    the pair basis when that route was run, else from the direct solve.
    """

    levels: tuple[SingleLevel, ...]
    epsilon0_pair: float | None = None
    trapped_free: float | None = None

    @property
    def bound(self) -> bool:
        return bool(self.levels)

    @property
    def epsilon(self) -> float:
        if self.epsilon0_pair is not None:
            return self.epsilon0_pair
        return self.levels[0].epsilon if self.levels else 0.0

    @property
    def epsilon_direct(self) -> float:
        return self.levels[0].epsilon if self.levels else 0.0

    def energies(self) -> np.ndarray:
        return np.array([lv.epsilon for lv in self.levels])

    def degeneracies(self) -> np.ndarray:
        return np.array([lv.degeneracy for lv in self.levels], dtype=float)


@dataclass(frozen=True)
class PairLevel:
    U: float
    J: int
    energy: float
    trapped: float = 1.0

    @property
    def degeneracy(self) -> int:
        return 2 * self.J + 1


@dataclass(frozen=True)
class PairSpectrum:
    """Two-molecule levels with E = -2 eps0 + U < 0, sorted by energy."""

    levels: tuple[PairLevel, ...]
    epsilon0: float
    J_values: tuple[int, ...] = (0,)
    n_escaped: int = 0

    @property
    def two_body_bound_exists(self) -> bool:
        return bool(self.levels)

    @property
    def U0(self) -> float | None:
        """Interaction energy of the lowest J = 0 level (None if unbound)."""
        for lv in self.levels:
            if lv.J == 0:
                return lv.U
        return None

    def energies(self) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels])

    def degeneracies(self) -> np.ndarray:
        return np.array([lv.degeneracy for lv in self.levels], dtype=float)


def _gauss(depth, width_factor, waist):
    def v(x):
        return -depth * np.exp(-width_factor * x**2 / waist**2)
    return v


class PairHamiltonian:
    """Two-molecule Hamiltonian blocks for one (species, tweezer, c6).

    Radial pieces are built once and reused for every requested J.
    """

    def __init__(self, species: Species, tweezer: TweezerConfig, params: BasisParams = BasisParams(),
                 c6: float | None = None):
        self.species = species
        self.tweezer = tweezer
        self.params = params
        self.c6 = species.c6 if c6 is None else float(c6)
        m, w0, D = species.mass, tweezer.waist, tweezer.depth
        refine = params.grid_refine
        r_grid = default_grid(m / 2, w0, species.R6, D, r_max=params.r_max, refine=refine)
        R_grid = default_grid(2 * m, w0, species.R6, D, r_max=params.r_max, refine=refine)
        n = params.n_contractions

        c6v = self.c6
        if c6v > 0:
            r_grid = hard_wall(r_grid, lambda r: c6v / r**6, params.wall_ratio * D)

        ref_r = _gauss(D, 0.5, w0)
        if c6v > 0 and params.shield_in_reference:
            def ref_r(x, _g=ref_r):
                return _g(x) + c6v / x**6
        self.basis_r = contract(r_grid, ref_r, 0, n)
        self.basis_R = contract(R_grid, _gauss(D, 2.0, w0), 0, n)

    @cached_property
    def _radial(self):
        br, bR = self.basis_r, self.basis_R
        r, R = br.grid.points, bR.grid.points
        hb2 = CONSTANTS.hbar**2
        t_r = br.project_matrix(kinetic_matrix(br.grid))
        t_R = bR.project_matrix(kinetic_matrix(bR.grid))
        inv_r2 = br.project(hb2 / (2.0 * br.grid.mass * r**2))
        inv_R2 = bR.project(hb2 / (2.0 * bR.grid.mass * R**2))
        shield = br.project(self.c6 / r**6) if self.c6 else np.zeros_like(t_r)
        return t_r, t_R, inv_r2, inv_R2, shield

    @cached_property
    def _trap_terms(self) -> dict[int, np.ndarray]:
        # W_ell[(a b), (a' b')] = sum_ij u_a(r_i) u_a'(r_i) V_ell(r_i, R_j) v_b(R_j) v_b'(R_j)
        br, bR = self.basis_r, self.basis_R
        n = br.size
        r, R = br.grid.points, bR.grid.points
        A = (br.vectors[:, :, None] * br.vectors[:, None, :]).reshape(len(r), n * n)
        B = (bR.vectors[:, :, None] * bR.vectors[:, None, :]).reshape(len(R), n * n)
        out = {}
        for ell in range(0, 2 * self.params.l_max + 1, 2):
            v = angular.trap_legendre_term(ell, r[:, None], R[None, :], self.tweezer.depth, self.tweezer.waist)
            w = (A.T @ v @ B).reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)
            out[ell] = 0.5 * (w + w.T)
        return out

    @cached_property
    def _trapped_mask(self) -> np.ndarray:
        # projector onto max(|r1|, |r2|) <= trap_radius * w0, in the (a b) product basis
        br, bR = self.basis_r, self.basis_R
        n = br.size
        r, R = br.grid.points, bR.grid.points
        A = (br.vectors[:, :, None] * br.vectors[:, None, :]).reshape(len(r), n * n)
        B = (bR.vectors[:, :, None] * bR.vectors[:, None, :]).reshape(len(R), n * n)
        inside = (R[None, :] + 0.5 * r[:, None] <= self.params.trap_radius * self.tweezer.waist)
        m = (A.T @ inside.astype(float) @ B).reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)
        return 0.5 * (m + m.T)

    def trapped_fraction(self, vectors: np.ndarray) -> np.ndarray:
        """Probability that both molecules sit inside the trap radius, per column."""
        nb = self.basis_r.size ** 2
        m = self._trapped_mask
        vectors = np.asarray(vectors)
        v = vectors.reshape(vectors.shape[0] // nb, nb, vectors.shape[-1])
        return np.einsum("cas,ab,cbs->s", v, m, v)

    def channel_basis(self, J: int) -> angular.ChannelBasis:
        return angular.enumerate_channels(J, self.params.l_max, self.params.bosonic)

    def matrix(self, J: int) -> np.ndarray:
        basis = self.channel_basis(J)
        n = self.basis_r.size
        nb = n * n
        t_r, t_R, inv_r2, inv_R2, shield = self._radial
        eye = np.eye(n)
        trap = self._trap_terms
        chans = basis.channels
        H = np.zeros((len(chans) * nb, len(chans) * nb))
        for i, ci in enumerate(chans):
            for j in range(i, len(chans)):
                cj = chans[j]
                block = np.zeros((nb, nb))
                for ell, w in trap.items():
                    p = angular.legendre_matrix_element(ci, cj, ell, J)
                    if p:
                        block += p * w
                if i == j:
                    h_r = t_r + ci.l * (ci.l + 1) * inv_r2 + shield
                    h_R = t_R + ci.L * (ci.L + 1) * inv_R2
                    block += np.kron(h_r, eye) + np.kron(eye, h_R)
                H[i * nb:(i + 1) * nb, j * nb:(j + 1) * nb] = block
                if i != j:
                    H[j * nb:(j + 1) * nb, i * nb:(i + 1) * nb] = block.T
        return H

    def eigenvalues(self, J: int, k: int | None = None) -> np.ndarray:
        """Lowest ``k`` eigenvalues (J) of the J block."""
        H = self.matrix(J)
        k = min(k or self.params.n_levels, H.shape[0])
        return linalg.eigh(H, eigvals_only=True, subset_by_index=[0, k - 1], driver="evr")

    def eigenpairs(self, J: int, k: int | None = None):
        H = self.matrix(J)
        k = min(k or self.params.n_levels, H.shape[0])
        return linalg.eigh(H, subset_by_index=[0, k - 1], driver="evr")

    def ground_state(self, J: int = 0):
        H = self.matrix(J)
        e, v = linalg.eigh(H, subset_by_index=[0, 0], driver="evr")
        return e[0], v[:, 0]


def _free_pair(species, tweezer, params) -> tuple[float | None, float | None]:
    """Half the non-interacting pair ground energy (sign flipped) and its trapped fraction."""
    ham = PairHamiltonian(species, tweezer, params, c6=0.0)
    e, v = ham.ground_state(0)
    if e >= 0:
        return None, None
    return -0.5 * e, float(ham.trapped_fraction(v[:, None])[0])


def solve_single(species: Species, tweezer: TweezerConfig, params: BasisParams = BasisParams(),
                 pair_route: bool = True) -> SingleSpectrum:
    """Bound levels of one molecule in -D exp(-2 r^2/w0^2), channels l1 <= l1_max.

    With ``pair_route`` the ground binding energy used downstream is recomputed
    as minus half the ground energy of two non-interacting molecules in the
    pair basis.
    """
    D, w0, m = tweezer.depth, tweezer.waist, species.mass
    if D <= 0:
        return SingleSpectrum(())
    cut = -params.bound_threshold * characteristic_energy(species)
    grid = default_grid(m, w0, species.R6, D, r_max=params.r_max, refine=params.grid_refine)
    pot = _gauss(D, 2.0, w0)(grid.points)
    levels = []
    for l1 in range(params.single_l_max() + 1):
        e = linalg.eigh(reference_hamiltonian(grid, pot, l1), eigvals_only=True,
                        subset_by_value=(-np.inf, cut), driver="evr")
        if e.size == 0:
            break  # centrifugal barrier only raises higher l1
        levels.extend(SingleLevel(-float(x), l1, n) for n, x in enumerate(e))
    levels.sort(key=lambda lv: -lv.epsilon)
    eps_pair = p_free = None
    if pair_route and levels:
        eps_pair, p_free = _free_pair(species, tweezer, params)
    return SingleSpectrum(tuple(levels), eps_pair, p_free)


def solve_pair(species: Species, tweezer: TweezerConfig, J_values=(0,),
               params: BasisParams = BasisParams(), epsilon0: float | None = None,
               c6: float | None = None, trapped_free: float | None = None) -> PairSpectrum:
    """Two-molecule tweezer levels E = -2 eps0 + U below zero energy, for each J.

    ``epsilon0`` defaults to the non-interacting pair route; ``c6`` overrides
    the species shield (0 switches the interaction off). ``trapped_free`` is
    the trapped fraction of the non-interacting ground state, the reference
    for the escaped-state filter.
    """
    if isinstance(J_values, int):
        J_values = (J_values,)
    J_values = tuple(J_values)
    if tweezer.species != species:
        raise ValueError("tweezer was configured for a different species")
    if epsilon0 is None or trapped_free is None:
        eps_free, p_free = _free_pair(species, tweezer, params)
        if eps_free is None:
            return PairSpectrum((), 0.0, J_values)
        epsilon0 = eps_free if epsilon0 is None else epsilon0
        trapped_free = p_free if trapped_free is None else trapped_free
    cut = -params.bound_threshold * characteristic_energy(species)
    ham = PairHamiltonian(species, tweezer, params, c6=c6)
    levels = []
    escaped = 0
    for J in J_values:
        e, v = ham.eigenpairs(J)
        if e.size and e[-1] < cut and e.size == params.n_levels:
            log.info("J=%d: all %d computed pair levels are bound; higher ones are truncated", J, e.size)
        bound = e < cut
        frac = ham.trapped_fraction(v[:, bound]) / trapped_free
        for x, f in zip(e[bound], frac):
            if f >= params.min_trapped:
                levels.append(PairLevel(float(x) + 2 * epsilon0, J, float(x), float(f)))
            else:
                escaped += 1
    levels.sort(key=lambda lv: lv.energy)
    return PairSpectrum(tuple(levels), epsilon0, J_values, escaped)


def regime_classify(single: SingleSpectrum, pair: PairSpectrum) -> str:
    if not single.bound:
        return "no-single-bound"
    U = pair.U0
    if U is None:
        return "no-pair-bound"
    return "blockaded" if U > single.epsilon else "unblockaded"


@dataclass(frozen=True)
class DepthPoint:
    depth: float
    single: SingleSpectrum
    pair: PairSpectrum

    @property
    def regime(self) -> str:
        return regime_classify(self.single, self.pair)

    @property
    def epsilon(self) -> float:
        return self.single.epsilon

    @property
    def U(self) -> float | None:
        return self.pair.U0


def solve_depth(species: Species, waist: float, depth: float, params: BasisParams = BasisParams(),
                J_values=(0,)) -> DepthPoint:
    tw = TweezerConfig(waist, depth, species)
    single = solve_single(species, tw, params)
    if single.epsilon0_pair is None:
        pair = PairSpectrum((), single.epsilon, tuple(J_values))
    else:
        pair = solve_pair(species, tw, J_values, params, epsilon0=single.epsilon0_pair,
                          trapped_free=single.trapped_free)
    return DepthPoint(depth, single, pair)


def _solve_depth_args(args):
    return solve_depth(*args)


def scan_depths(species: Species, waist: float, depths, params: BasisParams = BasisParams(),
                J_values=(0,), jobs: int = 1) -> list[DepthPoint]:
    """Independent solves over a list of depths; output order follows ``depths``."""
    tasks = [(species, waist, float(d), params, tuple(J_values)) for d in depths]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_solve_depth_args, tasks))
    out = []
    for t in tasks:
        out.append(_solve_depth_args(t))
        log.info("D/h = %.4g kHz: %s", t[2] / (CONSTANTS.h * 1e3), out[-1].regime)
    return out
