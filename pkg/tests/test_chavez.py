import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idim.chavez import (
    TABLE1_DIMS,
    TWO_SPHERES_LIMIT_EQ4,
    TWO_SPHERES_LIMIT_NO_HALF,
    _chunk_stats,
    dim_dist,
    dim_dist_stderr,
    distance_moments_exact,
    distance_moments_sampled,
    merge_moments,
    table1,
)
from idim.errors import ParameterError
from idim.space import FiniteSpace, Hypercube, Sphere, TwoSpheres, build_equilateral
from idim.values import UNDEFINED


@pytest.mark.parametrize("N", [2, 3, 7, 20])
def test_equilateral_exact_moments(N):
    m = distance_moments_exact(build_equilateral(N, 1.0))
    assert abs(m.mean - (N - 1) / N) < 1e-15
    assert abs(m.variance - (N - 1) / N**2) < 1e-15
    assert m.pairs_used == N * N and m.diagonal_included


def test_equilateral_without_diagonal_has_zero_variance():
    m = distance_moments_exact(build_equilateral(6, 1.0), diagonal_included=False)
    assert m.variance == 0 and m.mean == 1.0 and m.pairs_used == 30
    with pytest.warns(RuntimeWarning):
        assert dim_dist(m) == math.inf


def test_singleton_is_undefined(singleton):
    m = distance_moments_exact(singleton)
    assert m.mean == 0 and m.variance == 0
    assert dim_dist(m) is UNDEFINED
    assert dim_dist(m, "no-half") is UNDEFINED


@pytest.mark.parametrize("N", range(2, 65))
def test_equilateral_dimension_is_exact(N):
    m = distance_moments_exact(build_equilateral(N, 1.0))
    assert dim_dist(m, "eq4") == (N - 1) / 2
    assert dim_dist(m, "no-half") == N - 1


def test_conventions_differ_by_two(rng):
    s = FiniteSpace.from_points(rng.normal(size=(40, 3)))
    m = distance_moments_exact(s)
    assert dim_dist(m, "no-half") == 2 * dim_dist(m, "eq4")
    with pytest.raises(ParameterError):
        dim_dist(m, "half")


def test_limits():
    assert abs(TWO_SPHERES_LIMIT_NO_HALF - 97.99) < 0.005
    assert abs(TWO_SPHERES_LIMIT_EQ4 - 48.99) < 0.005


def test_hypercube_mean_distance():
    m = distance_moments_sampled(Hypercube(100), 100_000, 1)
    assert abs(m.mean / math.sqrt(100 / 6) - 1) <= 0.01


def test_sphere_mean_distance():
    m = distance_moments_sampled(Sphere(50), 100_000, 2)
    assert abs(m.mean / math.sqrt(2) - 1) <= 0.01


def test_sampled_moments_reproducible():
    a = distance_moments_sampled(TwoSpheres(10), 50_000, 9)
    b = distance_moments_sampled(TwoSpheres(10), 50_000, 9)
    assert a == b


def test_sampled_budget_validation():
    with pytest.raises(ParameterError):
        distance_moments_sampled(Sphere(3), 1, 0)
    with pytest.raises(ParameterError):
        distance_moments_sampled(Sphere(3), 2.5, 0)


@pytest.mark.parametrize("lam", [2.0, 0.5, 0.125])
def test_scale_invariance_exact_power_of_two(rng, lam):
    s = FiniteSpace.from_points(rng.normal(size=(30, 2)))
    assert dim_dist(distance_moments_exact(s.scaled(lam))) == dim_dist(distance_moments_exact(s))


@pytest.mark.parametrize("lam", [3.7, 0.3])
def test_scale_invariance_exact_and_sampled(rng, lam):
    s = FiniteSpace.from_points(rng.normal(size=(30, 2)))
    a, b = dim_dist(distance_moments_exact(s)), dim_dist(distance_moments_exact(s.scaled(lam)))
    assert abs(a - b) <= 1e-12 * a
    a = dim_dist(distance_moments_sampled(s, 20_000, 4))
    b = dim_dist(distance_moments_sampled(s.scaled(lam), 20_000, 4))
    assert abs(a - b) <= 1e-12 * a


def test_stderr_shrinks_with_budget():
    a = distance_moments_sampled(Sphere(10), 100_000, 5)
    b = distance_moments_sampled(Sphere(10), 300_000, 5)
    assert abs(a.stderr / b.stderr / math.sqrt(3) - 1) <= 0.15
    ratio = dim_dist_stderr(a) / dim_dist_stderr(b)
    assert abs(ratio / math.sqrt(3) - 1) <= 0.15


def test_dimension_stderr_matches_seed_spread():
    vals = [dim_dist(distance_moments_sampled(TwoSpheres(3), 5_000, s)) for s in range(40)]
    se = dim_dist_stderr(distance_moments_sampled(TwoSpheres(3), 5_000, 999))
    assert 0.7 <= np.std(vals, ddof=1) / se <= 1.3


def test_sphere_dimension_grows_like_n():
    m = distance_moments_sampled(Sphere(50), 200_000, 6)
    assert 1.8 <= dim_dist(m, "eq4") / 51 <= 2.2


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 200), st.integers(1, 199), st.integers(0, 2**31))
def test_moment_merge_matches_direct(n, cut, seed):
    x = np.random.default_rng(seed).exponential(size=n)
    cut = min(cut, n - 1)
    n_, mean, m2, m3, m4 = merge_moments(_chunk_stats(x[:cut]), _chunk_stats(x[cut:]))
    c = x - x.mean()
    assert n_ == n
    assert math.isclose(mean, x.mean(), rel_tol=1e-12, abs_tol=1e-12)
    for got, want in ((m2, (c**2).sum()), (m3, (c**3).sum()), (m4, (c**4).sum())):
        assert math.isclose(got, want, rel_tol=1e-9, abs_tol=1e-9)


def test_exact_stderr_is_zero(rng):
    m = distance_moments_exact(FiniteSpace.from_points(rng.normal(size=(10, 2))))
    assert dim_dist_stderr(m) == 0.0


def test_table1_shape_small_budget():
    rows = table1(pairs=2_000, seed=1, dims=(2, 3))
    assert [r["n"] for r in rows] == [2, 3]
    assert set(rows[0]) == {"n", "pairs", "mean", "sigma2", "dim_no_half", "dim_eq4", "stderr"}
    assert TABLE1_DIMS == (2, 3, 10, 30, 100, 1000, 5000)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for r in rows:
            assert r["dim_no_half"] == 2 * r["dim_eq4"]
