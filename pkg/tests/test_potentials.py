import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlslab.grid import make_grid
from nlslab.potentials import (
    PotentialSpec,
    check_hypothesis,
    clip_min,
    eval_potential,
    shift_nonneg,
)


@pytest.fixture
def g():
    return make_grid(1, 10.0, 1000)


def test_zero(g):
    assert np.all(eval_potential(PotentialSpec.zero(), g) == 0)


def test_plateau_is_indicator(g):
    Q = eval_potential(PotentialSpec.plateau(2.0, 1.0, 0.0), g)
    inside = np.abs(g.x) <= 1.0
    assert np.all(Q[inside] == 2.0)
    assert np.all(Q[~inside] == 0.0)


def test_gaussian_well_minimum(g):
    V = eval_potential(PotentialSpec.gaussian_well(-1.0, 1.0, 0.0), g)
    assert V.min() == -1.0
    assert g.x[np.argmin(V)] == 0.0


def test_sum_and_2d_center():
    g2 = make_grid(2, 4.0, 32)
    spec = PotentialSpec.sum_of(PotentialSpec.constant(0.5),
                                PotentialSpec.plateau(1.0, 1.0, (1.0, -1.0)))
    V = eval_potential(spec, g2)
    assert V.max() == 1.5 and V.min() == 0.5


@pytest.mark.parametrize("bad", [dict(kind="gaussian-well", width=-1.0),
                                 dict(kind="plateau", radius=-0.5),
                                 dict(kind="nonsense")])
def test_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        PotentialSpec(**bad)


def test_spec_dict_round_trip():
    spec = PotentialSpec.sum_of(PotentialSpec.gaussian_well(-1.0, 0.7, 2.0),
                                PotentialSpec.plateau(2.0, 1.0))
    assert PotentialSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(KeyError):
        PotentialSpec.from_dict({"kind": "zero", "value": 1.0})


def test_shift_examples(g):
    Vt, s = shift_nonneg(np.full(g.shape, -3.0))
    assert s == -3.0 and np.all(Vt == 0)
    Vt, s = shift_nonneg(np.zeros(g.shape))
    assert s == 0.0 and np.all(Vt == 0)
    V = eval_potential(PotentialSpec.gaussian_well(-1.0, 1.0), g)
    Vt, s = shift_nonneg(V)
    assert Vt.min() == 0.0 and np.all(Vt >= 0)
    assert g.x[np.argmin(Vt)] == 0.0


@given(st.lists(st.floats(-1e3, 1e3), min_size=8, max_size=8))
def test_shift_zero_minimum_and_restore(vals):
    V = np.array(vals)
    Vt, s = shift_nonneg(V)
    assert Vt.min() == 0.0
    # restoring is exact up to one rounding of the subtraction
    scale = np.max(np.abs(V)) + abs(s)
    assert np.all(np.abs((Vt + s) - V) <= np.spacing(scale) * 2)


def test_hypothesis_examples(g):
    Q = eval_potential(PotentialSpec.plateau(2.0, 1.0), g)
    rep = check_hypothesis(g, Q, 1.0)
    assert abs(rep.superlevel_measure - 2.0) <= rep.measure_uncertainty * (1 + 1e-9)
    assert rep.satisfied
    rep = check_hypothesis(g, np.full(g.shape, 0.5), 1.0)
    assert rep.superlevel_measure == 0 and not rep.satisfied
    Qn = Q.copy()
    Qn[0] = -0.1
    rep = check_hypothesis(g, Qn, 1.0)
    assert not rep.q_nonneg and not rep.satisfied


def test_hypothesis_whole_box_counts_as_infinite(g):
    assert not check_hypothesis(g, np.full(g.shape, 2.0), 1.0).satisfied


def test_clip_examples(g):
    Q = eval_potential(PotentialSpec.plateau(2.0, 1.0), g)
    assert np.array_equal(clip_min(Q, 1.0), eval_potential(PotentialSpec.plateau(1.0, 1.0), g))
    low = 0.5 * Q
    assert np.array_equal(clip_min(low, 1.0), low)


@given(st.lists(st.floats(-5, 5), min_size=16, max_size=16), st.floats(0.01, 4))
def test_clip_properties(vals, lam):
    Q = np.array(vals)
    c = clip_min(Q, lam)
    assert np.all(c <= lam) and np.all(c <= Q)
    assert np.array_equal(c + (Q - c), Q)
    assert np.array_equal((Q - c) != 0, Q > lam)


@given(st.floats(0.05, 3.0), st.floats(0.05, 3.0))
def test_superlevel_measure_monotone(l1, l2):
    g = make_grid(1, 5.0, 128)
    Q = 2.5 * np.exp(-g.x**2)
    lo, hi = sorted((l1, l2))
    assert check_hypothesis(g, Q, hi).superlevel_measure <= check_hypothesis(g, Q, lo).superlevel_measure
