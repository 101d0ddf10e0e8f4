import math

import numpy as np
import pytest

from oracles import numerov_ground
from tweezerload.quantities import CONSTANTS, get_species
from tweezerload.radial import (
    DvrGrid,
    SingularityError,
    contract,
    default_grid,
    hard_wall,
    kinetic_matrix,
    kinetic_matrix_full_line,
    reference_hamiltonian,
)

HBAR = CONSTANTS.hbar
MASS = get_species("KAg").mass


def harmonic_grid(omega, per_osc=6, n=60):
    osc = math.sqrt(HBAR / (MASS * omega))
    return DvrGrid(osc / per_osc, n, MASS), osc


def test_kinetic_symmetric_positive():
    t = kinetic_matrix(DvrGrid(1e-8, 40, MASS))
    np.testing.assert_allclose(t, t.T)
    assert np.linalg.eigvalsh(t).min() > 0


def test_kinetic_element_values():
    g = DvrGrid(2e-8, 5, MASS)
    t = kinetic_matrix(g)
    pref = HBAR**2 / (2 * MASS * g.spacing**2)
    assert t[0, 0] == pytest.approx(pref * (math.pi**2 / 3 - 0.5))
    # k = 1, k' = 2: (-1)^1 [2/1 - 2/9]
    assert t[0, 1] == pytest.approx(pref * -(2 - 2 / 9))


@pytest.mark.parametrize("l", [0, 2, 4])
def test_harmonic_levels(l):
    omega = 2 * math.pi * 20e3
    g, _ = harmonic_grid(omega)
    e = np.linalg.eigvalsh(reference_hamiltonian(g, lambda r: 0.5 * MASS * omega**2 * r**2, l))
    # radial levels of the 3D oscillator: (2n + l + 3/2) hbar omega
    expected = (2 * np.arange(3) + l + 1.5) * HBAR * omega
    np.testing.assert_allclose(e[:3], expected, rtol=1e-7)


def test_odd_l_converges_algebraically():
    # u ~ r^2 near the origin has a kink in its odd extension, so odd l
    # only converge as spacing^3 on the half-line grid
    omega = 2 * math.pi * 20e3
    errs = []
    for per in (12, 24, 48):
        g, _ = harmonic_grid(omega, per, 10 * per)
        e = np.linalg.eigvalsh(reference_hamiltonian(g, lambda r: 0.5 * MASS * omega**2 * r**2, 1))[0]
        errs.append(abs(e / (HBAR * omega) - 2.5))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 2.7)
    assert errs[-1] < 1e-6


def test_full_line_harmonic():
    omega = 2 * math.pi * 20e3
    osc = math.sqrt(HBAR / (MASS * omega))
    n, dx = 81, osc / 5
    x = (np.arange(n) - n // 2) * dx
    h = kinetic_matrix_full_line(n, dx, MASS) + np.diag(0.5 * MASS * omega**2 * x**2)
    e = np.linalg.eigvalsh(h)[:3] / (HBAR * omega)
    np.testing.assert_allclose(e, [0.5, 1.5, 2.5], rtol=1e-8)


def test_gaussian_well_against_numerov(kHz):
    sp = get_species("KAg")
    w0, D = 300e-9, 60 * kHz
    pot = lambda r: -D * np.exp(-2 * r**2 / w0**2)  # noqa: E731
    g = default_grid(sp.mass, w0, sp.R6, D)
    e = np.linalg.eigvalsh(reference_hamiltonian(g, pot))[0]
    ref = numerov_ground(sp.mass, pot, g.r_max, 20000, -D, 0.9 * e)
    assert e == pytest.approx(ref, rel=1e-8)


def test_singularity_error():
    g = DvrGrid(1e-8, 10, MASS)
    with pytest.raises(SingularityError):
        reference_hamiltonian(g, lambda r: np.where(r < 3e-8, np.inf, 0.0))


def test_potential_length_checked():
    g = DvrGrid(1e-8, 10, MASS)
    with pytest.raises(ValueError):
        reference_hamiltonian(g, np.zeros(5))


def test_hard_wall_drops_inner_points():
    g = DvrGrid(1e-8, 100, MASS)
    c6 = 1e-69
    walled = hard_wall(g, lambda r: c6 / r**6, 1e-26)
    assert walled.first > 1
    assert np.all(c6 / walled.points**6 <= 1e-26)
    assert c6 / ((walled.first - 1) * g.spacing) ** 6 > 1e-26
    # no repulsion above the ceiling -> unchanged
    assert hard_wall(g, lambda r: 0 * r, 1.0) is g


def test_wall_keeps_kinetic_submatrix():
    g = DvrGrid(1e-8, 30, MASS)
    sub = DvrGrid(1e-8, 30, MASS, first=5)
    np.testing.assert_allclose(kinetic_matrix(sub), kinetic_matrix(g)[4:, 4:])


def test_contraction_orthonormal_and_exact_in_span(kHz):
    sp = get_species("KAg")
    w0, D = 300e-9, 50 * kHz
    g = default_grid(sp.mass, w0, sp.R6, D)
    pot = lambda r: -D * np.exp(-2 * r**2 / w0**2)  # noqa: E731
    b = contract(g, pot, 0, 10)
    np.testing.assert_allclose(b.vectors.T @ b.vectors, np.eye(10), atol=1e-12)
    h = reference_hamiltonian(g, pot)
    np.testing.assert_allclose(np.diag(b.project_matrix(h)), b.energies, rtol=1e-10)
    with pytest.raises(ValueError):
        contract(DvrGrid(1e-8, 5, MASS), None, 0, 10)


def test_grid_validation():
    with pytest.raises(ValueError):
        DvrGrid(-1.0, 10, MASS)
    with pytest.raises(ValueError):
        DvrGrid(1e-8, 10, MASS, first=11)
    g = default_grid(MASS, 300e-9, 476e-9, refine=2.0)
    assert g.spacing == pytest.approx(300e-9 / 64)
    assert g.r_max >= 6 * 300e-9
