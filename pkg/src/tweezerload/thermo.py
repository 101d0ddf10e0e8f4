"""Occupation statistics of a tweezer in contact with a molecular reservoir.

The reservoir enters only through its fugacity z. Occupation weights are

    empty        1
    one          z g_i exp(eps_i / kT)
    two          s z^2 (2J+1) exp(-E_i / kT),   E_i = -2 eps0 + U_i

with s = 1/2 for a classical gas and s = 1 for bosons, whose pair states
are already symmetrised. Everything is accumulated as log-weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from .quantities import CONSTANTS, Species
from .specfun import ZETA_3_2, polylog_3_2
from .spectrum import BasisParams, DepthPoint, PairSpectrum, SingleSpectrum, solve_depth

__all__ = [
    "ReservoirState",
    "FidelityResult",
    "CollisionRates",
    "CondensedReservoirError",
    "NoBlockadeWindowError",
    "STATISTICS",
    "thermal_wavelength",
    "bose_fugacity",
    "fugacity",
    "reservoir_from_psd",
    "occupation_probabilities",
    "microcanonical_ratio",
    "triple_occupancy_bound",
    "optimize_depth",
    "fidelity_at_optimum",
    "elastic_rates",
    "intra_tweezer_density",
]

STATISTICS = ("classical", "bose")


class CondensedReservoirError(ValueError):
    """Phase-space density at or beyond Bose condensation."""

    def __init__(self, psd: float):
        self.psd = psd
        self.rho_max = ZETA_3_2
        super().__init__(
            f"phase-space density {psd:.4g} exceeds zeta(3/2) = {ZETA_3_2:.6f}; "
            "the reservoir would be condensed"
        )


class NoBlockadeWindowError(ValueError):
    """No depth in the grid satisfies 2 eps > U > eps."""


def thermal_wavelength(T: float, mass: float) -> float:
    return CONSTANTS.h / math.sqrt(2.0 * math.pi * mass * CONSTANTS.k_B * T)


def bose_fugacity(psd: float, tol: float = 1e-12) -> float:
    """Solve Li_{3/2}(z) = psd for 0 <= z <= 1."""
    if psd < 0:
        raise ValueError("phase-space density must be non-negative")
    if psd == 0:
        return 0.0
    if psd > ZETA_3_2:
        raise CondensedReservoirError(psd)
    if psd == ZETA_3_2:
        return 1.0
    # Li_{3/2} is increasing on [0, 1]; z <= psd always holds
    return optimize.bisect(lambda z: polylog_3_2(z) - psd, 0.0, min(1.0, psd), xtol=tol * 1e-3)


@dataclass(frozen=True)
class ReservoirState:
    temperature: float
    density: float
    wavelength: float
    psd: float
    fugacity: float
    statistics: str = "bose"

    @property
    def kT(self) -> float:
        return CONSTANTS.k_B * self.temperature

    @property
    def pair_symmetry(self) -> float:
        return 0.5 if self.statistics == "classical" else 1.0


def _check_statistics(statistics):
    if statistics not in STATISTICS:
        raise ValueError(f"statistics must be one of {STATISTICS}, got {statistics!r}")


def reservoir_from_psd(T: float, psd: float, mass: float, statistics: str = "bose") -> ReservoirState:
    """Reservoir specified by temperature and phase-space density."""
    _check_statistics(statistics)
    if not T > 0:
        raise ValueError("temperature must be positive")
    lam = thermal_wavelength(T, mass)
    z = psd if statistics == "classical" else bose_fugacity(psd)
    return ReservoirState(T, psd / lam**3, lam, psd, z, statistics)


def fugacity(T: float, n: float, mass: float, statistics: str = "bose") -> ReservoirState:
    """Reservoir specified by temperature (K) and number density (m^-3)."""
    if not T > 0 or not n > 0:
        raise ValueError("temperature and density must be positive")
    lam = thermal_wavelength(T, mass)
    return reservoir_from_psd(T, n * lam**3, mass, statistics)


@dataclass(frozen=True)
class FidelityResult:
    p0: float
    p1: float
    p2: float
    F_sp: float
    F_gs: float
    log_Q: float
    depth: float | None = None
    constraint_ok: bool | None = None
    epsilon: float | None = None
    U: float | None = None
    p3_over_p2: float | None = None
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def Q(self) -> float:
        return math.exp(self.log_Q) if self.log_Q < 709 else math.inf

    @property
    def infidelity_sp(self) -> float:
        return self.p0 + self.p2

    @property
    def infidelity_gs(self) -> float:
        return 1.0 - self.F_gs


def _single_bindings(single: SingleSpectrum) -> np.ndarray:
    # excitation gaps from the direct solve, ground level from the pair route
    eps = single.energies()
    if eps.size:
        eps = eps - single.epsilon_direct + single.epsilon
    return eps


def occupation_probabilities(single: SingleSpectrum, pair: PairSpectrum, res: ReservoirState) -> FidelityResult:
    kT = res.kT
    z = res.fugacity
    if z <= 0:
        return FidelityResult(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    logz = math.log(z)
    eps = _single_bindings(single)
    log_one = logz + np.log(single.degeneracies()) + eps / kT if eps.size else np.empty(0)
    if pair.levels and single.bound:
        pair_e = np.array([-2.0 * single.epsilon + lv.U for lv in pair.levels])
        log_two = 2 * logz + math.log(res.pair_symmetry) + np.log(pair.degeneracies()) - pair_e / kT
    else:
        log_two = np.empty(0)
    log_q = logsumexp(np.concatenate(([0.0], log_one, log_two)))
    p0 = math.exp(-log_q)
    p1 = float(np.exp(logsumexp(log_one) - log_q)) if log_one.size else 0.0
    p2 = float(np.exp(logsumexp(log_two) - log_q)) if log_two.size else 0.0
    # ground level is non-degenerate (l1 = 0)
    f_gs = float(math.exp(log_one[0] - log_q)) if log_one.size else 0.0
    U0 = pair.U0
    p32 = None
    if U0 is not None and single.bound:
        p32 = triple_occupancy_bound(res, single.epsilon, U0)
    return FidelityResult(
        p0=p0, p1=p1, p2=p2, F_sp=p1, F_gs=f_gs, log_Q=float(log_q),
        epsilon=single.epsilon if single.bound else None, U=U0, p3_over_p2=p32,
    )


def microcanonical_ratio(N: int, E_tot: float, V: float, epsilon: float, mass: float) -> float:
    """W(N-1, E_tot + eps, V) / W(N, E_tot, V) for an ideal gas of N molecules.

    W(N, E, V) = V^N / (N! h^{3N}) * 2 pi^{3N/2} / Gamma(3N/2) * (2 m E)^{(3N-1)/2}.
    The ratio is assembled from differences of logs so that no term of
    size N log V is ever formed.
    """
    if N < 2:
        raise ValueError("need at least two molecules")
    if not E_tot > 0 or not V > 0:
        raise ValueError("energy and volume must be positive")
    h = CONSTANTS.h
    log_r = (
        -math.log(V)
        + math.log(N)
        + 3.0 * math.log(h)
        - 1.5 * math.log(math.pi)
        + math.lgamma(1.5 * N)
        - math.lgamma(1.5 * (N - 1))
        + 0.5 * (3 * N - 4) * math.log1p(epsilon / E_tot)
        - 1.5 * math.log(2.0 * mass * E_tot)
    )
    return math.exp(log_r)


def triple_occupancy_bound(res: ReservoirState, epsilon: float, U: float) -> float:
    """p3/p2 = z exp((eps - 2U)/kT) for pairwise-additive repulsion.

    The three-sector model (0, 1 or 2 molecules) is considered valid when
    this is below 1e-3.
    """
    return res.fugacity * math.exp((epsilon - 2.0 * U) / res.kT)


def _constraint(point: DepthPoint) -> bool:
    U = point.U
    eps = point.epsilon
    return point.single.bound and U is not None and eps < U < 2.0 * eps


def optimize_depth(points: list[DepthPoint], res: ReservoirState) -> FidelityResult:
    """Depth maximising F_sp among points with 2 eps > U > eps.

    ``extra`` records the depth of the largest U - eps within the window
    (``depth_max_gap``) for comparison with the optimum.
    """
    ok = [p for p in points if _constraint(p)]
    if not ok:
        raise NoBlockadeWindowError("no depth in the grid satisfies 2*eps > U > eps")
    results = [occupation_probabilities(p.single, p.pair, res) for p in ok]
    best = max(range(len(ok)), key=lambda i: (results[i].F_sp, -ok[i].depth))
    gap = max(range(len(ok)), key=lambda i: ok[i].U - ok[i].epsilon)
    r = results[best]
    extra = {
        "depth_max_gap": ok[gap].depth,
        "max_gap": ok[gap].U - ok[gap].epsilon,
        "window": (min(p.depth for p in ok), max(p.depth for p in ok)),
    }
    return FidelityResult(
        r.p0, r.p1, r.p2, r.F_sp, r.F_gs, r.log_Q, depth=ok[best].depth, constraint_ok=True,
        epsilon=r.epsilon, U=r.U, p3_over_p2=r.p3_over_p2, extra=extra,
    )


def fidelity_at_optimum(points: list[DepthPoint], res: ReservoirState, species: Species, waist: float,
                        params: BasisParams = BasisParams(), j_max: int = 2, cache: dict | None = None
                        ) -> FidelityResult:
    """Optimise the depth on J = 0 spectra, then re-evaluate there with pair J <= j_max.

    Excited-J pair levels only enter the partition sum, so they are solved
    at the chosen depth alone. ``cache`` (depth -> DepthPoint) avoids
    repeating those solves across reservoir points.
    """
    best = optimize_depth(points, res)
    if j_max == 0:
        return best
    cache = {} if cache is None else cache
    point = cache.get(best.depth)
    if point is None:
        point = solve_depth(species, waist, best.depth, params, tuple(range(j_max + 1)))
        cache[best.depth] = point
    r = occupation_probabilities(point.single, point.pair, res)
    return FidelityResult(r.p0, r.p1, r.p2, r.F_sp, r.F_gs, r.log_Q, depth=best.depth, constraint_ok=True,
                          epsilon=r.epsilon, U=r.U, p3_over_p2=r.p3_over_p2, extra=dict(best.extra, j_max=j_max))


@dataclass(frozen=True)
class CollisionRates:
    sigma: float  # m^2
    velocity: float  # m/s
    beta: float  # m^3/s
    tau: float  # s


def elastic_rates(species: Species, T: float, n: float) -> CollisionRates:
    """Hard-sphere-like estimate sigma = 4 pi R6^2, v = sqrt(2 kT/m), tau = 1/(n v sigma)."""
    if not T > 0 or not n > 0:
        raise ValueError("temperature and density must be positive")
    sigma = 4.0 * math.pi * species.R6**2
    v = math.sqrt(2.0 * CONSTANTS.k_B * T / species.mass)
    beta = v * sigma
    return CollisionRates(sigma, v, beta, 1.0 / (n * beta))


def intra_tweezer_density(species: Species, omega: float) -> float:
    """One molecule per cubed oscillator length sqrt(hbar / 2 m omega), in m^-3."""
    if not omega > 0:
        raise ValueError("trap frequency must be positive")
    return (CONSTANTS.hbar / (2.0 * species.mass * omega)) ** -1.5
