import numpy as np
import pytest
from hypothesis import given, strategies as st

from chorea.errors import GridNotClosed, GridNotDivisible
from chorea.loops import synthesize
from chorea.ngon import NGonLabel, build_ngon
from chorea.sampled import SampledLoop
from chorea.symmetry import (
    R_XZ,
    GroupElementAction,
    Kind,
    SymmetryClass,
    act,
    boundary_conditions,
    coefficient_constraints,
    expand_choreography,
    generator_f,
    generator_g,
    generator_h,
    identity,
)
from conftest import random_loop


def power(e, k):
    out = identity(e.n)
    for _ in range(k):
        out = e @ out
    return out


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_group_relations_on_sampled_loops(n, rng):
    sl = synthesize(random_loop(SymmetryClass(n), 6, rng), 24 * n)
    probe = SampledLoop(rng.normal(size=sl.positions.shape))  # generic, not symmetric
    g, h = generator_g(n), generator_h(n)
    assert act(identity(n), probe).allclose(probe)
    assert act(power(g, n), probe).allclose(probe)
    assert act(h @ h, probe).allclose(probe)
    assert act(power(g @ h, 2), probe).allclose(probe)
    assert act(g, act(g.inverse(), probe)).allclose(probe)
    # composition agrees with successive action
    assert act(g @ h, probe).allclose(act(g, act(h, probe)))
    f = generator_f(n)
    assert act(f @ f, probe).allclose(probe)
    if n % 2 == 0:
        assert act(f @ g, probe).allclose(act(g @ f, probe))
        assert act(f @ h, probe).allclose(act(h @ f, probe))
    else:
        # the time map of f reverses time, so f conjugates g to its inverse
        assert act(f @ g @ f, probe).allclose(act(g.inverse(), probe))
    assert act(g, sl).allclose(sl) and act(h, sl).allclose(sl)


@given(st.integers(3, 7), st.sampled_from([Kind.DN, Kind.HN]), st.integers(0, 10**6))
def test_constructed_loops_are_invariant_under_generators(n, kind, seed):
    sym = SymmetryClass(n, kind)
    fl = random_loop(sym, 7, np.random.default_rng(seed), min_ratio=0.0)
    sl = synthesize(fl, 16 * n)
    for e in sym.generators():
        assert act(e, sl).allclose(sl, atol=1e-12)


def test_generic_loop_is_not_invariant(rng):
    probe = SampledLoop(rng.normal(size=(24, 3, 3)))
    assert not act(generator_h(3), probe).allclose(probe)


def test_grid_not_closed():
    with pytest.raises(GridNotClosed):
        act(generator_g(3), SampledLoop(np.zeros((10, 3, 3))))


def test_group_element_validation():
    with pytest.raises(ValueError):
        GroupElementAction(1, 0.0, 2 * np.eye(3), (0, 1))
    with pytest.raises(ValueError):
        GroupElementAction(1, 0.0, np.eye(3), (0, 0))
    with pytest.raises(ValueError):
        GroupElementAction(2, 0.0, np.eye(3), (0, 1))


def test_expand_choreography_examples():
    with pytest.raises(GridNotDivisible):
        expand_choreography(np.zeros((10, 3)), 3)
    assert expand_choreography(np.ones((12, 3)), 3).is_degenerate()
    m, n, radius = 60, 5, 1.3
    t = 2 * np.pi * np.arange(m) / m
    circle = np.stack([radius * np.cos(t), radius * np.sin(t), np.zeros(m)], axis=1)
    sl = expand_choreography(circle, n)
    angles = np.angle(sl.positions[0, :, 0] + 1j * sl.positions[0, :, 1])
    np.testing.assert_allclose(np.exp(1j * angles), np.exp(2j * np.pi * np.arange(n) / n), atol=1e-14)
    # e^{-ikt} R visits the k-polygon vertices
    for k in (2, 3):
        loop = radius * np.exp(-1j * k * t)
        sl = expand_choreography(np.stack([loop.real, loop.imag, np.zeros(m)], axis=1), n)
        ref = build_ngon(NGonLabel(n, k, 1))
        np.testing.assert_allclose(sl.positions[0, :, 0] + 1j * sl.positions[0, :, 1],
                                   ref.zeta * radius / abs(ref.zeta[0]), atol=1e-13)


def test_expand_commutes_with_cyclic_shift(rng):
    q0 = rng.normal(size=(30, 3))
    sl = expand_choreography(q0, 5)
    shifted = expand_choreography(np.roll(q0, -6, axis=0), 5)
    np.testing.assert_array_equal(shifted.positions, np.roll(sl.positions, -1, axis=1))


def test_boundary_conditions_three_bodies():
    labels = {bc.label for bc in boundary_conditions(SymmetryClass(3))}
    assert labels == {"q1(0)=Rxz q2(0)", "q0(pi/N)=Rxz q2(pi/N)", "q0(0)=Rxz q0(0)", "q1(pi/N)=Rxz q1(pi/N)"}


@pytest.mark.parametrize("n", [3, 4, 5, 6])
@pytest.mark.parametrize("kind", [Kind.DN, Kind.HN])
def test_boundary_conditions_hold_on_symmetric_loops(n, kind, rng):
    fl = random_loop(SymmetryClass(n, kind), 6, rng, min_ratio=0.0)

    def at(t):
        return fl.evaluate(t + 2 * np.pi * np.arange(n) / n)

    for bc in boundary_conditions(SymmetryClass(n, kind)):
        assert bc.residual(at) < 1e-12, bc.label
    # y_0(0) = 0 follows from the fixed-plane relation
    assert abs(at(0.0)[0, 1]) < 1e-15


def test_coefficient_masks():
    dn = coefficient_constraints(SymmetryClass(4), 6)
    assert dn.a.all() and dn.b.all() and dn.c.all()
    even = coefficient_constraints(SymmetryClass(4, Kind.HN), 6)
    assert list(np.flatnonzero(even.a)) == [0, 2, 4, 6]
    assert list(np.flatnonzero(even.b) + 1) == [1, 3, 5]
    assert list(np.flatnonzero(even.c)) == [1, 3, 5]
    odd = coefficient_constraints(SymmetryClass(5, Kind.HN), 6)
    assert list(np.flatnonzero(odd.a)) == [0, 2, 4, 6]
    assert list(np.flatnonzero(odd.b) + 1) == [2, 4, 6]
    assert list(np.flatnonzero(odd.c)) == [1, 3, 5]
    with pytest.raises(ValueError):
        coefficient_constraints(SymmetryClass(3), 0)


@given(st.integers(3, 6), st.integers(0, 10**6))
def test_projection_idempotent_and_contracting(n, seed):
    rng = np.random.default_rng(seed)
    mask = coefficient_constraints(SymmetryClass(n, Kind.HN), 5)
    a, b, c = rng.normal(size=6), rng.normal(size=5), rng.normal(size=6)
    once = mask.project(a, b, c)
    twice = mask.project(*once)
    for x, y in zip(once, twice):
        np.testing.assert_array_equal(x, y)
    assert sum(np.sum(x**2) for x in once) <= sum(np.sum(x**2) for x in (a, b, c))


def test_hn_even_x_has_only_even_frequencies(rng):
    # substituting t + pi in a cosine series: q0(t + pi) = Rx q0(t) keeps exactly the even x harmonics
    fl = random_loop(SymmetryClass(4, Kind.HN), 6, rng, min_ratio=0.0)
    t = np.linspace(0, 2 * np.pi, 13)
    np.testing.assert_allclose(fl.evaluate(t + np.pi), fl.evaluate(t) @ np.diag([1.0, -1.0, -1.0]), atol=1e-13)


def test_hn_odd_half_period_reflection(rng):
    fl = random_loop(SymmetryClass(5, Kind.HN), 6, rng, min_ratio=0.0)
    t = np.linspace(0, 2 * np.pi, 13)
    np.testing.assert_allclose(fl.evaluate(np.pi - t), fl.evaluate(t) @ np.diag([1.0, -1.0, -1.0]), atol=1e-13)


def test_rotating_allowed():
    assert SymmetryClass(4).rotating_allowed
    assert SymmetryClass(5, Kind.HN).rotating_allowed
    assert not SymmetryClass(4, Kind.HN).rotating_allowed
    assert np.array_equal(R_XZ, np.diag([1.0, -1.0, 1.0]))
