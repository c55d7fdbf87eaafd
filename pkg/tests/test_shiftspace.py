import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from subdyn import shiftspace as sh
from subdyn.errors import Inconsistent, WindowExhausted, WindowMismatch


def config(cells, W, k=2):
    return sh.Configuration(k, W, 2, np.asarray(cells))


def random_config(seed, W, k=2, alphabet=2):
    rng = np.random.default_rng(seed)
    return sh.Configuration(k, W, alphabet, rng.integers(0, alphabet, size=(2 * W + 1,) * k))


def test_origin_difference_costs_one():
    x = config(np.zeros((7, 7)), 3)
    c = x.cells.copy()
    c[3, 3] = 1
    assert sh.metric_d(x, config(c, 3))[0] == 1.0


def test_full_difference_in_one_dimension():
    a = sh.Configuration(1, 1, 2, np.zeros(3))
    b = sh.Configuration(1, 1, 2, np.ones(3))
    assert sh.metric_d(a, b)[0] == 2.0


def test_metric_needs_matching_windows():
    with pytest.raises(WindowMismatch):
        sh.metric_d(config(np.zeros((3, 3)), 1), config(np.zeros((5, 5)), 2))


@given(st.integers(0, 10_000), st.integers(0, 10_000), st.integers(1, 5))
def test_metric_is_symmetric_and_bounded(s1, s2, W):
    x, y = random_config(s1, W), random_config(s2, W)
    dxy, tail = sh.metric_d(x, y)
    assert dxy == sh.metric_d(y, x)[0]
    assert 0 <= dxy <= float(np.sum(sh.weights(W, 2)))
    assert (dxy == 0) == (x == y)
    assert tail == sh.tail_outside(W, 2) > 0


@given(st.integers(0, 10_000), st.integers(-2, 2), st.integers(-2, 2))
def test_shift_definition(seed, a, b):
    x = random_config(seed, 4)
    y = sh.shift_apply((a, b), x)
    assert y.W == 4 - max(abs(a), abs(b))
    for i in range(-y.W, y.W + 1):
        for j in range(-y.W, y.W + 1):
            assert y[(i, j)] == x[(a + i, b + j)]


@given(st.integers(0, 10_000))
def test_shift_composition(seed):
    x = random_config(seed, 5)
    lhs = sh.shift_apply((1, -1), sh.shift_apply((0, 2), x))
    rhs = sh.shift_apply((1, 1), x)
    assert lhs == rhs.restrict(lhs.W)


def test_shift_beyond_window():
    with pytest.raises(WindowExhausted):
        sh.shift_apply((3, 0), random_config(0, 2))


def test_tail_bounds_are_consistent():
    # the Euclidean tail is dominated by the crude box tail and decreases in r
    for W in (2, 5, 10):
        assert sh.tail_outside(W, 2) <= sh.box_tail(W, 2)
    vals = [sh.tail_bound(r, 2) for r in (2, 4, 8, 16)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    # whole-lattice total is the r = 0 tail
    assert math.isclose(sh.tail_bound(0, 1), 3.0, rel_tol=1e-12)


@given(st.integers(0, 10_000))
def test_shadow_of_random_pseudo_orbit(seed):
    orb = sh.random_pseudo_orbit(2, 10, 8, 2, flips=1, min_norm=7, seed=seed)
    star = sh.shadow_shift(orb)
    # x*(i) = x_i(0)
    assert star[(3, -2)] == orb.config((3, -2))[(0, 0)]
    chk = sh.check_shadow(orb, star, 2, 0.05)
    assert chk.worst <= chk.epsilon


def test_single_one_on_the_bottom_row_spreads_upward():
    W = 3
    bottom = np.zeros(2 * W + 1, dtype=int)
    bottom[W] = 1
    x = sh.ledrappier_complete(W, bottom, np.zeros(2 * W + 1, dtype=int))
    assert sh.ledrappier_validate(x)
    assert x[(0, -W + 1)] == 1 and x[(-1, -W + 1)] == 1 and x[(1, -W + 1)] == 0


def test_relation_forces_the_third_cell():
    # a 1 at the origin with zero right neighbour forces a 1 above it
    W = 2
    c = np.zeros((5, 5), dtype=int)
    c[W, W] = 1
    assert not sh.ledrappier_validate(config(c, W))
    c[W, W + 1] = 1
    c[W - 1, W + 1] = 1  # relation at (-1, 0) then needs x(-1, 1) = 1
    s = (c[:-1, :-1] + c[1:, :-1] + c[:-1, 1:]) % 2
    assert s[W, W] == 0


def test_inconsistent_corner():
    with pytest.raises(Inconsistent):
        sh.ledrappier_complete(1, [0, 0, 1], [0, 0, 0])


@given(st.integers(0, 10_000), st.integers(1, 8))
def test_random_ledrappier_is_valid(seed, W):
    assert sh.ledrappier_validate(sh.ledrappier_random(W, seed))


@given(st.integers(0, 10_000))
def test_ledrappier_shadow_stays_in_the_subshift(seed):
    orb = sh.ledrappier_pseudo_orbit(8, 8, seed=seed)
    assert sh.ledrappier_validate_orbit(orb)
    assert sh.ledrappier_validate(sh.shadow_shift(orb))


def test_json_roundtrip():
    x = random_config(3, 2)
    d = x.to_json()
    assert d["cells"]["0,0"] == x[(0, 0)]
    assert sh.Configuration.from_json(d) == x
