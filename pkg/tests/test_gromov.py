from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idim.errors import ParameterError
from idim.gromov import (
    Parametrization,
    StepFunction,
    dconc_details,
    dconc_estimate,
    distance_to_constants,
    dist_to_singleton,
    me1,
    me1_atoms,
    me1_levels_exact,
)
from idim.space import FiniteSpace, build_equilateral

# --- strategies --------------------------------------------------------------

small_fraction = st.fractions(min_value=-3, max_value=3, max_denominator=12)


@st.composite
def step_functions(draw, max_pieces=6):
    k = draw(st.integers(1, max_pieces))
    cuts = draw(st.lists(st.fractions(min_value=0, max_value=1, max_denominator=24), min_size=k - 1, max_size=k - 1, unique=True))
    cuts = sorted(c for c in cuts if 0 < c < 1)
    bps = (F(0), *cuts, F(1))
    vals = draw(st.lists(small_fraction, min_size=len(bps) - 1, max_size=len(bps) - 1))
    return StepFunction(bps, vals)


# --- me_1 --------------------------------------------------------------------


def test_me1_examples():
    zero = StepFunction.constant(F(0))
    assert me1(zero, zero) == 0
    for c in (F(1, 3), F(1), F(5, 2), F(0)):
        assert me1(zero, StepFunction.constant(c)) == min(c, 1)
    assert me1(zero, StepFunction.constant(1)) == 1


@settings(max_examples=300, deadline=None)
@given(step_functions(), step_functions(), step_functions())
def test_me1_metric_axioms(f, g, h):
    assert me1(f, f) == 0
    assert me1(f, g) == me1(g, f)
    assert me1(f, h) <= me1(f, g) + me1(g, h)
    assert 0 <= me1(f, g) <= 1


@settings(max_examples=200, deadline=None)
@given(step_functions(), step_functions())
def test_me1_is_the_infimum(f, g):
    r = me1(f, g)
    from idim.gromov import _common_refinement

    lengths, fv, gv = _common_refinement(f, g)
    dev = [abs(x - y) for x, y in zip(fv, gv)]

    def mass_above(eps):
        return sum(L for d, L in zip(dev, lengths) if d > eps)

    tiny = F(1, 10**9)
    assert mass_above(r + tiny) < r + tiny
    if r > 0:
        assert not mass_above(r - tiny) < r - tiny
    sup = max(dev)
    assert r <= sup


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 3), st.floats(0.01, 1)), min_size=1, max_size=30))
def test_float_kernel_matches_exact(pairs):
    dev = np.array([p[0] for p in pairs])
    mass = np.array([p[1] for p in pairs])
    mass /= mass.sum()
    exact = me1_levels_exact([F(x) for x in dev], [F(x) for x in mass])
    from idim import kernels

    assert abs(kernels.me1_levels(dev, mass) - float(exact)) < 1e-12


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=1, max_size=9), st.integers(0, 2**31))
def test_distance_to_constants_matches_midpoint_search(ints, seed):
    values = [F(v, 8) for v in ints]
    w = np.random.default_rng(seed).integers(1, 5, len(values))
    mass = [F(int(x), int(w.sum())) for x in w]
    best = min(
        me1_levels_exact([abs(v - (a + b) / 2) for v in values], mass) for a in values for b in values
    )
    got = distance_to_constants(np.array([float(v) for v in values]), w / w.sum())
    assert abs(got - float(best)) < 1e-12


def test_me1_atoms_float_path():
    assert me1_atoms([0.0, 0.0], [0.3, 0.3]) == pytest.approx(0.3)
    assert me1_atoms([0.0, 1.0], [0.0, 1.0]) == 0.0


# --- step functions and parametrizations --------------------------------------


def test_step_function_validation():
    with pytest.raises(ParameterError):
        StepFunction((0, 1), (1, 2))
    with pytest.raises(ParameterError):
        StepFunction((0, F(1, 2), F(1, 2), 1), (1, 2, 3))
    with pytest.raises(ParameterError):
        StepFunction((F(1, 4), 1), (1,))
    f = StepFunction((0, F(1, 3), 1), (5, 7))
    assert f(0) == 5 and f(F(1, 3)) == 7 and f(1) == 7


def test_parametrization_respects_weights():
    p = Parametrization.canonical([0.25, 0.5, 0.25], 4)
    assert p.assignment == (0, 1, 1, 2)
    assert p.pull_back([10.0, 20.0, 30.0]).values == (10.0, 20.0, 20.0, 30.0)
    with pytest.raises(ParameterError):
        Parametrization((0, 0, 1), (0.5, 0.5))


# --- distance to a point -------------------------------------------------------


def test_singleton_distance_is_zero(singleton):
    assert dist_to_singleton(singleton) == 0.0


def test_two_point_distance_is_half(two_point):
    assert abs(dist_to_singleton(two_point) - 0.5) <= 1e-12


def test_two_point_exhaustive_discretization():
    # the polytope of the two-point space is {(a, b) : |a - b| <= 1}; shift to a = 0
    w = np.array([0.5, 0.5])
    best = max(distance_to_constants(np.array([0.0, b]), w) for b in np.linspace(-1, 1, 2001))
    assert abs(best - 0.5) < 1e-12


def test_distance_bounded_by_half_diameter(rng):
    for k in range(6):
        s = FiniteSpace.from_points(rng.normal(size=(int(rng.integers(2, 15)), 2)))
        assert dist_to_singleton(s, restarts=3, seed=k, steps=50) <= 0.5 * s.diameter() + 1e-12


def test_returned_value_is_a_lipschitz_feature_value(rng):
    from idim.gromov import dist_to_singleton_details

    s = FiniteSpace.from_points(rng.normal(size=(12, 2)))
    res = dist_to_singleton_details(s, restarts=3, seed=1, steps=60)
    f = res.feature
    assert (np.abs(f[:, None] - f[None, :]) - s.distance_matrix()).max() <= 1e-9
    assert distance_to_constants(f, s.weights) == res.value


def test_dist_to_singleton_deterministic(rng):
    s = FiniteSpace.from_points(rng.normal(size=(15, 2)))
    assert dist_to_singleton(s, 3, 7, 40) == dist_to_singleton(s, 3, 7, 40)


def test_dist_to_singleton_size_limit(rng):
    s = FiniteSpace.from_points(rng.normal(size=(201, 1)))
    with pytest.raises(ParameterError):
        dist_to_singleton(s)


# --- d_conc heuristic ------------------------------------------------------------


def test_dconc_identity_assignment(rng):
    for k in range(5):
        x = FiniteSpace.from_points(rng.normal(size=(5, 2)))
        assert dconc_estimate(x, x, seed=k) <= 0.02


def test_dconc_against_singleton_route(rng, singleton):
    for k in range(8):
        x = FiniteSpace.from_points(rng.normal(size=(int(rng.integers(2, 10)), 2)))
        assert abs(dconc_estimate(x, singleton, seed=k) - dist_to_singleton(x, seed=k)) <= 0.05


def test_dconc_isometric_two_point_spaces(two_point):
    assert dconc_estimate(two_point, build_equilateral(2, 1.0)) <= 0.02


def test_dconc_metadata(rng):
    x = FiniteSpace.from_points(rng.normal(size=(4, 2)))
    y = FiniteSpace.from_points(rng.normal(size=(6, 2)))
    est = dconc_details(x, y, search_budget=10, net_budget=4, seed=0)
    assert est.heuristic and est.atoms == 12
    assert sorted(np.bincount(est.assignment)) == [2] * 6


def test_dconc_preconditions(rng):
    x = FiniteSpace.from_points(rng.normal(size=(3, 2)), weights=[0.2, 0.3, 0.5])
    y = FiniteSpace.from_points(rng.normal(size=(2, 2)))
    with pytest.raises(ParameterError):
        dconc_estimate(x, y)
    a = FiniteSpace.from_points(rng.normal(size=(9, 2)))
    b = FiniteSpace.from_points(rng.normal(size=(8, 2)))
    with pytest.raises(ParameterError):
        dconc_estimate(a, b)
