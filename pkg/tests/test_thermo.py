import math

import mpmath
import numpy as np
import pytest

from tweezerload.quantities import CONSTANTS, Species, get_species
from tweezerload.spectrum import DepthPoint, PairLevel, PairSpectrum, SingleLevel, SingleSpectrum
from tweezerload.thermo import (
    CondensedReservoirError,
    NoBlockadeWindowError,
    ReservoirState,
    bose_fugacity,
    elastic_rates,
    fugacity,
    intra_tweezer_density,
    microcanonical_ratio,
    occupation_probabilities,
    optimize_depth,
    reservoir_from_psd,
    thermal_wavelength,
    triple_occupancy_bound,
)

KB = CONSTANTS.k_B
KAG = get_species("KAg")


def reservoir(z, T=1e-7, statistics="classical"):
    return ReservoirState(T, 1.0, 1.0, z, z, statistics)


def spectra(eps_list, U_list=(), J_list=None, l_list=None):
    l_list = l_list or [0] * len(eps_list)
    single = SingleSpectrum(tuple(SingleLevel(e, l, i) for i, (e, l) in enumerate(zip(eps_list, l_list))))
    J_list = J_list or [0] * len(U_list)
    eps0 = eps_list[0] if eps_list else 0.0
    pair = PairSpectrum(tuple(PairLevel(U, J, U - 2 * eps0) for U, J in zip(U_list, J_list)), eps0)
    return single, pair


def test_thermal_wavelength_formula():
    m, T = KAG.mass, 2e-7
    assert thermal_wavelength(T, m) == pytest.approx(CONSTANTS.h / math.sqrt(2 * math.pi * m * KB * T))


def test_classical_fugacity_is_psd():
    res = fugacity(1e-7, 1e18, KAG.mass, "classical")
    assert res.fugacity == res.psd == pytest.approx(1e18 * res.wavelength**3)


def test_bose_fugacity_series():
    rho = 0.01
    assert bose_fugacity(rho) == pytest.approx(rho * (1 - rho / 2**1.5), abs=1e-6)


def test_bose_fugacity_zero_and_limit():
    assert bose_fugacity(0.0) == 0.0
    assert reservoir_from_psd(1e-7, 0.0, KAG.mass).fugacity == 0.0
    assert bose_fugacity(float(mpmath.zeta(1.5))) == pytest.approx(1.0)


@pytest.mark.parametrize("rho", [1e-4, 0.01, 0.5, 1.5, 2.5])
def test_bose_fugacity_against_mpmath(rho):
    z = bose_fugacity(rho)
    ref = float(mpmath.findroot(lambda x: mpmath.polylog(1.5, x) - rho, (1e-12, 0.999999), solver="bisect"))
    assert z == pytest.approx(ref, rel=1e-9)
    assert abs(float(mpmath.polylog(1.5, z)) - rho) < 1e-12


@pytest.mark.parametrize("rho", [1e-3, 0.01, 0.0279])
def test_low_density_fugacity_close_to_psd(rho):
    assert abs(bose_fugacity(rho) - rho) / rho < 0.01


def test_condensed_reservoir_error():
    with pytest.raises(CondensedReservoirError) as exc:
        bose_fugacity(3.0)
    assert exc.value.rho_max == pytest.approx(2.612375, rel=1e-6)


def test_reservoir_validation():
    with pytest.raises(ValueError):
        fugacity(0.0, 1e18, KAG.mass)
    with pytest.raises(ValueError):
        fugacity(1e-7, 1e18, KAG.mass, "fermi")


def test_single_level_ratio():
    kT = KB * 1e-7
    single, pair = spectra([3 * kT])
    r = occupation_probabilities(single, pair, reservoir(0.02))
    assert r.p1 / r.p0 == pytest.approx(0.02 * math.exp(3.0), rel=1e-12)
    assert r.p2 == 0.0


def test_pair_ratio_classical_and_bose():
    kT = KB * 1e-7
    eps, U = 4 * kT, 5.5 * kT
    single, pair = spectra([eps], [U])
    r = occupation_probabilities(single, pair, reservoir(0.03, statistics="classical"))
    assert r.p2 / r.p1 == pytest.approx(0.5 * 0.03 * math.exp((eps - U) / kT), rel=1e-10)
    b = occupation_probabilities(single, pair, reservoir(0.03, statistics="bose"))
    assert b.p2 / b.p1 == pytest.approx(0.03 * math.exp((eps - U) / kT), rel=1e-10)


def test_zero_temperature_limit():
    kT = KB * 1e-9
    single, pair = spectra([40 * kT * 10], [60 * kT * 10])
    r = occupation_probabilities(single, pair, reservoir(0.01, T=1e-9))
    assert r.p1 == pytest.approx(1.0, abs=1e-12)


def test_huge_exponents_do_not_overflow():
    kT = KB * 1e-9
    single, pair = spectra([2000 * kT], [2500 * kT])
    r = occupation_probabilities(single, pair, reservoir(1e-3, T=1e-9))
    assert math.isfinite(r.log_Q) and r.Q == math.inf
    assert r.p0 + r.p1 + r.p2 == pytest.approx(1.0, abs=1e-12)


def test_degeneracies_weight_levels():
    kT = KB * 1e-7
    single, pair = spectra([5 * kT, 3 * kT], [7 * kT, 8 * kT], J_list=[0, 2], l_list=[0, 1])
    r = occupation_probabilities(single, pair, reservoir(0.01, statistics="bose"))
    z = 0.01
    w1 = z * (math.exp(5) + 3 * math.exp(3))
    w2 = z**2 * (math.exp(10 - 7) + 5 * math.exp(10 - 8))
    Q = 1 + w1 + w2
    assert r.F_sp == pytest.approx(w1 / Q, rel=1e-12)
    assert r.F_gs == pytest.approx(z * math.exp(5) / Q, rel=1e-12)
    assert r.p2 == pytest.approx(w2 / Q, rel=1e-12)


def test_empty_spectra():
    r = occupation_probabilities(SingleSpectrum(()), PairSpectrum((), 0.0), reservoir(0.1))
    assert r.p0 == 1.0 and r.F_sp == 0.0


def _micro_vs_grand(N, eps_over_kT, rho=0.01, T=1e-7):
    m = KAG.mass
    lam = thermal_wavelength(T, m)
    V = N * lam**3 / rho
    kT = KB * T
    return microcanonical_ratio(N, 1.5 * N * kT, V, eps_over_kT * kT, m) / (rho * math.exp(eps_over_kT))


def test_microcanonical_examples():
    assert _micro_vs_grand(10**4, 0.0) == pytest.approx(1.0, rel=1e-3)
    assert _micro_vs_grand(10**4, 3.0) == pytest.approx(1.0, rel=5e-3)


def test_microcanonical_one_over_N():
    Ns = np.array([1e3, 1e4, 1e5, 1e6])
    dev = np.array([abs(_micro_vs_grand(int(N), 3.0) - 1) for N in Ns])
    slope = np.polyfit(np.log(Ns), np.log(dev), 1)[0]
    assert -1.2 <= slope <= -0.8


def test_microcanonical_brute_force_small_N():
    # direct evaluation of W for small N with exact log-gamma arithmetic in mpmath
    N, T, m = 40, 1e-7, KAG.mass
    kT = KB * T
    V, E, eps = 1e-15, 1.5 * N * kT, 2 * kT

    def logW(n, e):
        return (n * mpmath.log(V) - mpmath.loggamma(n + 1) - 3 * n * mpmath.log(CONSTANTS.h)
                + 1.5 * n * mpmath.log(mpmath.pi) + mpmath.log(2) - mpmath.loggamma(1.5 * n)
                + (3 * n - 1) / 2 * mpmath.log(2 * m * e))

    with mpmath.workdps(50):
        ref = float(mpmath.exp(logW(N - 1, E + eps) - logW(N, E)))
    assert microcanonical_ratio(N, E, V, eps, m) == pytest.approx(ref, rel=1e-10)


def test_microcanonical_rejects_tiny_N():
    with pytest.raises(ValueError):
        microcanonical_ratio(1, 1.0, 1.0, 0.0, 1.0)


def test_triple_occupancy_examples():
    kT = KB * 1e-7
    res = reservoir(0.01)
    assert triple_occupancy_bound(res, 10 * kT, 10 * kT) == pytest.approx(0.01 * math.exp(-10))
    assert triple_occupancy_bound(res, 3 * kT, 0.0) == pytest.approx(0.01 * math.exp(3))
    # equals the bosonic p2/p1 times exp(-U/kT)
    single, pair = spectra([4 * kT], [6 * kT])
    b = occupation_probabilities(single, pair, reservoir(0.01, statistics="bose"))
    assert triple_occupancy_bound(res, 4 * kT, 6 * kT) == pytest.approx(b.p2 / b.p1 * math.exp(-6), rel=1e-10)


def _point(depth, eps, U):
    single, pair = spectra([eps], [U] if U is not None else [])
    return DepthPoint(depth, single, pair)


def test_optimize_depth_respects_constraint():
    kT = KB * 1e-7
    pts = [
        _point(1.0, 2 * kT, 5 * kT),  # U > 2 eps: excluded
        _point(2.0, 5 * kT, 8 * kT),
        _point(3.0, 7 * kT, 9 * kT),
        _point(4.0, 12 * kT, 10 * kT),  # U < eps: excluded even though eps is largest
    ]
    r = optimize_depth(pts, reservoir(0.01))
    assert r.depth == 3.0 and r.constraint_ok
    assert r.extra["depth_max_gap"] == 2.0
    assert r.extra["window"] == (2.0, 3.0)


def test_optimize_depth_without_window():
    kT = KB * 1e-7
    with pytest.raises(NoBlockadeWindowError):
        optimize_depth([_point(1.0, 5 * kT, 2 * kT), _point(2.0, 5 * kT, None)], reservoir(0.01))


def test_rates_formulae():
    r = elastic_rates(KAG, 1e-7, 1e18)
    assert r.sigma == pytest.approx(4 * math.pi * KAG.R6**2)
    assert r.velocity == pytest.approx(math.sqrt(2 * KB * 1e-7 / KAG.mass))
    assert r.tau == pytest.approx(1 / (1e18 * r.beta))


def test_cross_section_scales_with_R6_squared():
    big = Species("big", KAG.mass, R6=2 * KAG.R6)
    assert elastic_rates(big, 1e-7, 1e18).sigma == pytest.approx(4 * elastic_rates(KAG, 1e-7, 1e18).sigma)


def test_intra_tweezer_density():
    n = intra_tweezer_density(KAG, 2 * math.pi * 40e3) * 1e-6
    assert 1e15 < n < 1e17
    n4 = intra_tweezer_density(KAG, 2 * math.pi * 10e3) * 1e-6
    assert n / n4 == pytest.approx(8.0)
    with pytest.raises(ValueError):
        intra_tweezer_density(KAG, 0.0)
