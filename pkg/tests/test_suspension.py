import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from subdyn.errors import InvalidInput, JumpOffLine
from subdyn.geometry import Direction
from subdyn.spectrum import cat_pair
from subdyn.suspension import (
    Chain,
    SuspensionPoint,
    fiber_at,
    flow,
    modulus_constant,
    normalize,
    perturbed_chain,
    separation_along_line,
    shadow_chain,
    verify_chain,
)
from subdyn.toral import apply, torus_dist

SPEC = cat_pair()
unit = st.floats(0.0, 1.0, exclude_max=True)
vec = st.tuples(st.floats(-3, 3), st.floats(-3, 3)).map(np.array)
pt = st.builds(lambda a, b, c, d: SuspensionPoint([a, b], [c, d]), unit, unit, unit, unit)
X_AXIS = Direction.from_integers((1, 0))


def test_zero_flow_is_identity():
    p = SuspensionPoint([0.3, 0.4], [0.1, 0.2])
    q = flow(SPEC, [0, 0], p)
    assert np.array_equal(q.u, p.u) and np.array_equal(q.x, p.x)


def test_unit_flow_applies_generator():
    x = np.array([0.1, 0.7])
    q = flow(SPEC, [1, 0], SuspensionPoint([0, 0], x))
    assert np.all(q.u == 0) and torus_dist(q.x, apply(SPEC, (1, 0), x)) == 0


@given(pt, vec, vec)
def test_group_law(p, w1, w2):
    a = flow(SPEC, w1, flow(SPEC, w2, p))
    b = flow(SPEC, w1 + w2, p)
    # u + w1 + w2 can land on the other side of an integer in floating point
    if np.any(np.abs(a.u - b.u) > 0.5):
        return
    assert np.max(np.abs(a.u - b.u)) <= 1e-12
    assert torus_dist(a.x, b.x) <= 1e-12


@given(pt, vec, st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_quotient_well_defined(p, w, n):
    n = np.array(n)
    moved = normalize(SPEC, p.u + n, apply(SPEC, -n, p.x))
    a, b = flow(SPEC, w, moved), flow(SPEC, w, p)
    assert torus_dist(a.x, b.x) <= 1e-12


def test_u_must_be_normalized():
    with pytest.raises(InvalidInput):
        SuspensionPoint([1.2, 0], [0, 0])


def test_exact_chain_has_zero_defect_and_error(cat):
    spec, sp = cat
    ch = perturbed_chain(spec, X_AXIS, [0.3, 0.6], 40, 0.0, 1.0, seed=0)
    assert verify_chain(spec, ch).defect == 0.0
    assert shadow_chain(spec, sp, ch, X_AXIS).sup_error <= 1e-12


def test_single_node_chain():
    ch = Chain([SuspensionPoint([0, 0], [0.5, 0.5])], np.zeros((0, 2)), 1e-6, 1.0)
    c = verify_chain(SPEC, ch)
    assert c.defect == 0.0 and c.min_jump == np.inf


def test_chain_from_toral_pseudo_orbit(cat):
    # integer jumps turn a toral pseudo-orbit into a chain with the same defect
    from subdyn.geometry import LatticeWindow
    from subdyn.toral import perturbed_pseudo_orbit, verify_pseudo_orbit

    spec = cat[0]
    win = LatticeWindow.from_points([(j, 0) for j in range(30)], X_AXIS)
    orb = perturbed_pseudo_orbit(spec, win, [0.2, 0.4], 1e-7, seed=3)
    ch = Chain([SuspensionPoint([0, 0], x) for x in orb.points], np.tile([1.0, 0.0], (29, 1)), 1e-7, 0.5)
    gen = max(np.abs(np.array(g)).sum(axis=1).max() for g in spec.generators)
    assert verify_chain(spec, ch).defect <= verify_pseudo_orbit(spec, orb) * gen


def test_chain_shadow(cat):
    spec, sp = cat
    ch = perturbed_chain(spec, X_AXIS, [0.3, 0.7], 200, 1e-6, 1.0, seed=2)
    r = shadow_chain(spec, sp, ch, X_AXIS)
    assert r.passed and r.sup_error <= r.L * r.chain_defect * r.C
    assert r.C == modulus_constant(spec)


def test_chain_quasi_shadow(cat_center):
    spec, sp = cat_center
    ch = perturbed_chain(spec, X_AXIS, [0.3, 0.7, 0.2], 200, 1e-6, 1.0, seed=2)
    r = shadow_chain(spec, sp, ch, X_AXIS)
    assert r.kind == "quasi-shadow" and r.passed


def test_jump_off_line(cat):
    spec, sp = cat
    ch = perturbed_chain(spec, X_AXIS, [0.3, 0.7], 5, 1e-6, 1.0)
    with pytest.raises(JumpOffLine):
        shadow_chain(spec, sp, ch, Direction.from_integers((1, 2)))


def test_fiber_projection():
    x = np.array([0.2, 0.9])
    assert torus_dist(fiber_at(SPEC, [2.5, 0.2], x), apply(SPEC, (2, 0), x)) == 0


def test_separation_sampling():
    d = separation_along_line(SPEC, X_AXIS, [0.1, 0.1], [0.1 + 1e-6, 0.1], 20.0, 1.0)
    assert d > 0.1


def test_json_roundtrip():
    ch = perturbed_chain(SPEC, X_AXIS, [0.3, 0.7], 4, 1e-6, 1.0, seed=1)
    back = Chain.from_json(ch.to_json())
    assert np.array_equal(back.jumps, ch.jumps)
    assert all(np.array_equal(a.x, b.x) for a, b in zip(back.nodes, ch.nodes))
