import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import grid_exponent, grid_min_over_gamma, mp_e_x_given_y, mp_e_xy
from streamsw import JointPmf, make_dsbs, make_zchannel, profile
from streamsw.exponents import (derivative_checks, e_x_given_y, e_xy, e_y_given_x, exponent_x, exponent_y,
                                golden_max, golden_min, min_exponent_over_gamma)

pmf_2x2 = st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4).map(
    lambda w: JointPmf(np.array(w).reshape(2, 2) / sum(w)))
DSBS = make_dsbs(0.11)


def test_golden_finds_interior_and_endpoints():
    x, v = golden_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-8) and v == pytest.approx(0.0, abs=1e-15)
    x, _ = golden_max(lambda t: t, 0.0, 1.0)
    assert x == 1.0
    x, _ = golden_min(lambda t: t, 0.0, 1.0)
    assert x == 0.0


@given(pmf_2x2)
def test_gallager_functions_vanish_at_zero(pmf):
    for f in (e_xy, e_x_given_y, e_y_given_x):
        assert f(pmf, 0.0) == pytest.approx(0.0, abs=1e-14)


def test_e_xy_uniform():
    assert e_xy(make_dsbs(0.5), 1.0) == pytest.approx(2 * math.log(2), abs=1e-14)


def test_e_xy_high_precision():
    assert e_xy(DSBS, 0.5) == pytest.approx(float(mp_e_xy(DSBS.probs, 0.5)), abs=1e-13)


def test_e_x_given_y_deterministic_pairing():
    pmf = make_dsbs(0.0)
    for rho in (0.0, 0.3, 1.0):
        assert e_x_given_y(pmf, rho) == pytest.approx(0.0, abs=1e-14)


def test_e_x_given_y_high_precision():
    pmf = make_zchannel(0.6)
    assert e_x_given_y(pmf, 1.0) == pytest.approx(float(mp_e_x_given_y(pmf.probs, 1.0)), abs=1e-13)
    assert e_y_given_x(pmf, 1.0) == pytest.approx(float(mp_e_x_given_y(pmf.probs.T, 1.0)), abs=1e-13)


@pytest.mark.parametrize("gamma", [0.0, 0.4, 1.0])
def test_exponent_zero_on_boundary(gamma):
    prof = profile(DSBS)
    rx = prof.H_x_given_y
    assert exponent_x(DSBS, rx, prof.H_joint - rx, gamma) == pytest.approx(0.0, abs=1e-12)


def test_exponent_zero_inside_region():
    prof = profile(DSBS)
    assert exponent_x(DSBS, prof.H_x_given_y - 0.05, prof.H_y - 0.05, 0.5) == 0.0


def test_exponent_matches_rho_grid():
    prof = profile(DSBS)
    rx, ry = prof.H_x_given_y + 0.05, prof.H_y + 0.05
    want = grid_exponent(DSBS.probs, rx, rx + ry, 0.5)
    assert exponent_x(DSBS, rx, ry, 0.5) == pytest.approx(want, abs=1e-8)


@pytest.mark.parametrize("pmf", [DSBS, make_zchannel(0.6)], ids=["dsbs", "zchannel"])
def test_min_over_gamma_matches_grid(pmf):
    prof = profile(pmf)
    rx, ry = prof.H_x_given_y + 0.08, prof.H_y_given_x + 0.3
    g = min_exponent_over_gamma(pmf, rx, ry)
    want_x = grid_min_over_gamma(pmf.probs, rx, rx + ry)
    want_y = grid_min_over_gamma(pmf.probs.T, ry, rx + ry)
    assert g.x_value > 0
    assert g.x_value == pytest.approx(want_x, abs=1e-7)
    assert g.y_value == pytest.approx(want_y, abs=1e-7)
    assert g.value == min(g.x_value, g.y_value)


def test_derivative_lemmas_dsbs():
    rep = derivative_checks(DSBS)
    assert rep.worst_d1 < 1e-6
    assert rep.worst_d2 < 1e-4
    assert rep.worst_convexity >= -1e-8


@given(pmf_2x2, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_exponent_sign_follows_first_order_condition(pmf, gamma, push):
    prof = profile(pmf)
    rx, ry = prof.H_x_given_y + push * 0.2, prof.H_y_given_x + push * 0.2
    margin = gamma * (rx - prof.H_x_given_y) + (1 - gamma) * (rx + ry - prof.H_joint)
    v = exponent_x(pmf, rx, ry, gamma)
    assert v >= 0
    if margin <= 0:
        assert v == pytest.approx(0.0, abs=1e-12)
    elif margin > 1e-3:
        assert v > 0


@given(pmf_2x2, st.floats(0.0, 0.5), st.floats(0.0, 0.5))
def test_exponent_monotone_in_rate(pmf, a, b):
    prof = profile(pmf)
    rx, ry = prof.H_x_given_y + a, prof.H_y_given_x + b
    assert exponent_x(pmf, rx + 0.05, ry, 0.5) >= exponent_x(pmf, rx, ry, 0.5) - 1e-12
