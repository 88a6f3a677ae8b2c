import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlslab.energy import EnergyModel, abs_pow, mass, total_energy
from nlslab.grid import integrate, make_grid
from nlslab.groundstate import SolverOptions
from nlslab.potentials import PotentialSpec, clip_min, eval_potential
from nlslab.theory import (
    brezis_lieb_gap,
    check_negative_infimum,
    check_strict_inequality,
    check_subadditivity,
    dilate,
    dilation_energy,
    empirical_threshold,
    gaussian_profile,
    lq_norm,
    spreading_family,
    translating_bump_gaps,
    vanishing_diagnostics,
    vanishing_profile,
)
from conftest import smooth_field

OPTS = SolverOptions(step=4.0)


@pytest.fixture(scope="module")
def g1():
    return make_grid(1, 20.0, 512)


def test_negative_infimum_fourth_order(g1):
    m = EnergyModel(g1, "fourth", 3, 0.0, 1.0)
    res = check_negative_infimum(m, 1.0, np.geomspace(1, 100, 30))
    assert res.strict_holds.any()
    assert res.lhs[0] > 0  # at lambda=1 the kinetic term wins


def test_negative_infimum_q_zero_control(g1):
    m = EnergyModel(g1, "fourth", 3, 0.0, 0.0)
    res = check_negative_infimum(m, 1.0, np.geomspace(1, 100, 30))
    assert np.all(res.lhs >= 0) and not res.strict_holds.any()


@given(st.floats(0.5, 3.0))
def test_dilation_mass_invariant(lam):
    g = make_grid(1, 20.0, 512)
    v = gaussian_profile(g, 1.0)
    assert mass(g, dilate(g, v, lam)) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("order,p", [("second", 4), ("fourth", 3)])
def test_dilation_formula_matches_direct(g1, order, p):
    m = EnergyModel(g1, order, p, 0.0, 1.0)
    v = gaussian_profile(g1, 1.0)
    for lam in (0.6, 1.0, 1.7, 3.0):
        direct = total_energy(m, dilate(g1, v, lam))
        assert float(dilation_energy(m, v, lam)) == pytest.approx(direct, abs=1e-8)


def test_dilation_needs_constant_coefficients(g1):
    m = EnergyModel(g1, "second", 4, eval_potential(PotentialSpec.gaussian_well(-1, 1), g1), 1.0)
    with pytest.raises(ValueError):
        dilation_energy(m, gaussian_profile(g1, 1.0), 2.0)


def test_subadditivity_cubic_ratio(g1):
    m = EnergyModel(g1, "second", 4, 0.0, 1.0)
    thetas = np.array([1.2, 1.5, 2.0])
    res = check_subadditivity(m, 1.0, thetas, SolverOptions(step=4.0, seed_width=3.0),
                              mus=[0.3, 0.6, 0.9])
    assert res.strict_holds.all()
    assert np.all(np.abs(res.lhs / res.rhs / thetas**4 - 1) <= 0.03)
    assert res.binary.strict_holds.all()


def test_subadditivity_fourth_order(g1):
    m = EnergyModel(g1, "fourth", 3, 0.0, 1.0)
    res = check_subadditivity(m, 1.0, [1.2, 1.5, 2.0], OPTS)
    assert res.strict_holds.all()


def test_subadditivity_linear_case_fails(g1):
    m = EnergyModel(g1, "second", 4, 0.5, 0.0)
    res = check_subadditivity(m, 1.0, [1.2, 2.0], OPTS)
    assert not res.strict_holds.any()
    assert np.allclose(res.lhs, res.rhs, rtol=1e-8)


def test_subadditivity_rejects_theta_one(g1):
    with pytest.raises(ValueError):
        check_subadditivity(EnergyModel(g1, "second", 4, 0.0, 1.0), 1.0, [1.0])


@pytest.fixture(scope="module")
def plateau_setup():
    g = make_grid(1, 10.0, 512)
    V = eval_potential(PotentialSpec.gaussian_well(-1.0, 1.0), g)
    Q = eval_potential(PotentialSpec.plateau(2.0, 1.0), g)
    return g, V, Q


@pytest.mark.parametrize("order,p", [("second", 4), ("fourth", 3)])
def test_strict_inequality_threshold(plateau_setup, order, p):
    g, V, Q = plateau_setup
    rhos = np.geomspace(0.1, 4.0, 12)
    res = check_strict_inequality(g, V, Q, 1.0, p, rhos, order, OPTS)
    assert res.empirical_threshold is not None
    i = int(np.searchsorted(rhos, res.empirical_threshold))
    assert res.strict_holds[i:].all()
    assert np.all(res.lhs <= res.rhs + res.margin)  # domination


@pytest.mark.parametrize("order,p", [("second", 4), ("fourth", 3)])
def test_strict_inequality_control(plateau_setup, order, p):
    g, V, _ = plateau_setup
    Qlow = eval_potential(PotentialSpec.plateau(0.8, 1.0), g)
    rhos = np.geomspace(0.1, 4.0, 5)
    res = check_strict_inequality(g, V, Qlow, 1.0, p, rhos, order, OPTS, require_hypothesis=False)
    assert np.all(np.abs(res.lhs - res.rhs) <= res.margin)
    assert not res.strict_holds.any()


def test_strict_inequality_zero_potential_example():
    g = make_grid(1, 10.0, 512)
    Q = eval_potential(PotentialSpec.plateau(2.0, 1.0), g)
    res = check_strict_inequality(g, np.zeros(g.shape), Q, 1.0, 4, np.geomspace(0.2, 4, 6),
                                  "second", OPTS)
    assert res.empirical_threshold is not None


def test_strict_inequality_requires_hypothesis(plateau_setup):
    g, V, _ = plateau_setup
    with pytest.raises(ValueError, match="hypothesis"):
        check_strict_inequality(g, V, np.full(g.shape, 0.5), 1.0, 4, [1.0], "second", OPTS)


def test_empirical_threshold_helper():
    p = np.array([1, 2, 3, 4, 5.0])
    assert empirical_threshold(p, [False, True, False, True, True]) == (4.0, 1.0)
    assert empirical_threshold(p, [True] * 5) == (1.0, 0.0)
    assert empirical_threshold(p, [True, True, True, True, False]) == (None, None)


def test_spreading_family_vanishes(g1):
    ks = 10.0 ** np.arange(0, 9)
    rep = vanishing_diagnostics(g1, spreading_family(g1, ks), window=1.0)
    assert np.all(np.diff(rep.sup) < 0) and np.all(np.diff(rep.lq_norm) < 0)
    assert rep.sup[-1] < 1e-3 and rep.lq_norm[-1] < 1e-3
    assert np.all(np.diff(rep.h2_norm) <= 0)  # bounded in H^2


def test_constant_soliton_family_does_not_vanish(g1):
    u = (1 / np.cosh(g1.x)).astype(complex)
    sups = vanishing_profile(g1, [np.roll(u, s) for s in (0, 50, 100, 150)], 1.0)
    assert np.ptp(sups) < 1e-12 and sups.min() > 0.5


def test_zero_sequence(g1):
    assert np.all(vanishing_profile(g1, [np.zeros(g1.shape)] * 3, 1.0) == 0)


def test_lq_norm_constant(g1):
    u = np.full(g1.shape, 0.5)
    assert lq_norm(g1, u, 4) == pytest.approx((40 * 0.5**4) ** 0.25)


def test_brezis_lieb_trivial_cases(g1, rng):
    Q = clip_min(eval_potential(PotentialSpec.plateau(2.0, 1.0), g1) + 0.5, 1.0)
    u = smooth_field(g1, rng)
    assert brezis_lieb_gap(g1, u, u, Q, 4.0) == 0.0
    assert brezis_lieb_gap(g1, u, np.zeros(g1.shape), Q, 3.3) == 0.0


def test_brezis_lieb_translating_bumps(g1):
    Q = np.ones(g1.shape)
    seps = np.arange(2.0, 13.0, 1.0)
    gaps = translating_bump_gaps(g1, seps, 4.0, Q, width=1.0)
    assert np.all(np.diff(gaps) < 0)
    assert np.all(gaps[seps >= 8] < 1e-6)


def test_brezis_lieb_formula(g1):
    Q = np.full(g1.shape, 0.7)
    a = np.exp(-g1.x**2).astype(complex)
    b = np.exp(-(g1.x - 1) ** 2)
    expect = abs(integrate(g1, (abs_pow(a + b, 3) - abs_pow(b, 3) - abs_pow(a, 3)) * Q))
    assert brezis_lieb_gap(g1, a + b, a, Q, 3) == pytest.approx(expect, rel=1e-14)


def test_sweep_rows_columns(g1):
    res = check_negative_infimum(EnergyModel(g1, "second", 4, 0.0, 1.0), 1.0, [1.0, 2.0])
    rows = list(res.rows())
    assert list(rows[0]) == ["param", "lhs", "rhs", "strict", "margin"]
