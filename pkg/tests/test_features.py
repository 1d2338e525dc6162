import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idim.errors import ParameterError
from idim.features import (
    FEATURE_KINDS,
    FeatureVector,
    char_size,
    coordinate_features,
    generate_features,
    is_lipschitz,
    mcshane_feature,
    mcshane_random_feature,
    median_of,
    obs_diam,
    obs_diam_details,
    weighted_lower_median,
)
from idim.space import FiniteSpace, HammingCube, Sphere, build_equilateral, sample_analytic

# 0.99-quantile of |x1 - y1| on S^100 from 10^6 Monte Carlo pairs (seed 0)
SPHERE100_X1_Q99 = 0.3612


def test_single_anchor_is_distance_to_point(rng):
    s = FiniteSpace.from_points(rng.normal(size=(20, 3)))
    f = mcshane_feature(s, [4])
    assert np.array_equal(f.values, s.distances_from(4).ravel())


def test_equilateral_mcshane_range():
    s = build_equilateral(4, 1.0)
    f = mcshane_feature(s, [0, 2], [0.0, 0.0])
    assert f.values.min() >= 0 and f.values.max() <= 1


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(1, 10), st.integers(0, 2**31))
def test_random_mcshane_is_lipschitz(n, anchors, seed):
    s = FiniteSpace.from_points(np.random.default_rng(seed).normal(size=(n, 2)))
    assert is_lipschitz(s, mcshane_random_feature(s, anchors, seed))


def test_mcshane_rejects_bad_anchor_count(rng):
    s = FiniteSpace.from_points(rng.normal(size=(5, 2)))
    with pytest.raises(ParameterError):
        mcshane_random_feature(s, 0, 1)


@pytest.mark.parametrize("fam", [Sphere(3), HammingCube(6)])
def test_generated_features_are_lipschitz(fam):
    s = sample_analytic(fam, 80, 4)
    feats = generate_features(s, 40, 0, FEATURE_KINDS)
    assert len(feats) == 40
    assert all(is_lipschitz(s, f) for f in feats)
    assert all(is_lipschitz(s, -f) for f in feats)


def test_hamming_coordinates_are_scaled():
    s = sample_analytic(HammingCube(5), 20, 1)
    (c0, *_) = coordinate_features(s)
    assert set(np.unique(c0.values)) <= {0.0, 0.2}


def test_feature_vector_is_read_only():
    f = FeatureVector([1.0, 2.0])
    with pytest.raises(ValueError):
        f.values[0] = 0.0
    assert (-f).values.tolist() == [-1.0, -2.0]


def test_median_examples():
    assert median_of(FeatureVector([3.0, 3.0, 3.0])) == 3.0
    assert median_of(FeatureVector([0.0, 1.0]), [0.5, 0.5]) == 0.0
    assert median_of(FeatureVector([1.0, 2.0, 3.0])) == 2.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=15), st.integers(0, 2**31))
def test_median_half_mass_conditions(values, seed):
    v = np.array(values, dtype=float)
    w = np.random.default_rng(seed).uniform(0.1, 1, len(v))
    w /= w.sum()
    m = weighted_lower_median(v, w)
    assert w[v >= m].sum() >= 0.5 - 1e-12
    assert w[v <= m].sum() >= 0.5 - 1e-12
    # -median(-f) lies in the median interval too
    m2 = -weighted_lower_median(-v, w)
    assert w[v >= m2].sum() >= 0.5 - 1e-12 and w[v <= m2].sum() >= 0.5 - 1e-12


def test_median_agrees_under_negation_for_distinct_odd():
    v = np.random.default_rng(0).normal(size=21)
    assert weighted_lower_median(v) == -weighted_lower_median(-v)


def test_char_size_examples(singleton):
    assert char_size(singleton) == 0.0
    assert char_size(build_equilateral(100, 1.0)) == 1.0
    assert abs(char_size(Sphere(100), 100_000, 0) - np.sqrt(2)) <= 0.01


def test_obs_diam_singleton(singleton):
    assert obs_diam(singleton, 0.1) == 0.0


def test_obs_diam_sphere_coordinate_feature():
    s = sample_analytic(Sphere(100), 4000, 1)
    v = obs_diam(s, 0.01, feature_budget=1, kinds=("coordinate",))
    assert 0.30 <= v <= 0.45
    assert abs(v - SPHERE100_X1_Q99) < 0.02


def test_obs_diam_rejects_bad_kappa(rng):
    s = FiniteSpace.from_points(rng.normal(size=(5, 2)))
    for kappa in (0.0, 1.0, -0.1):
        with pytest.raises(ParameterError):
            obs_diam(s, kappa)


def test_obs_diam_monotone_in_kappa_and_bounded(rng):
    s = FiniteSpace.from_points(rng.normal(size=(60, 4)))
    vals = [obs_diam(s, k, 32, 10_000, 3) for k in (0.01, 0.05, 0.1, 0.3, 0.6)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert vals[0] <= s.diameter()


def test_obs_diam_details_flags_lower_bound(rng):
    s = FiniteSpace.from_points(rng.normal(size=(30, 2)))
    est = obs_diam_details(s, 0.2, 8, 10_000, 1)
    assert est.lower_bound and est.exact_pairs and est.features == 8
