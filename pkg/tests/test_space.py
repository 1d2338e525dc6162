import math

import numpy as np
import pytest
from scipy.special import betainc

from idim.errors import DataError, ParameterError
from idim.space import (
    Equilateral,
    FiniteSpace,
    HammingCube,
    Hypercube,
    ParetoRay,
    Sphere,
    TwoSpheres,
    build_equilateral,
    check_metric,
    pairwise_distance,
    sample_analytic,
    sample_pair_distances,
)


def test_sphere_points_have_unit_norm():
    s = sample_analytic(Sphere(2), 1000, 5)
    assert np.abs(np.linalg.norm(s.points, axis=1) - 1).max() < 1e-9
    assert s.points.shape == (1000, 3)
    assert np.allclose(s.weights, 1e-3)


def test_two_spheres_copy_balance():
    s = sample_analytic(TwoSpheres(10), 10_000, 3)
    assert abs((s.points[:, 0] == 0).mean() - 0.5) <= 0.02
    assert np.abs(np.linalg.norm(s.points[:, 1:], axis=1) - 1).max() < 1e-9


def test_pareto_median_and_support():
    s = sample_analytic(ParetoRay(1e4), 100_000, 11)
    assert abs(np.median(s.points[:, 0]) - 2.0) <= 0.05
    assert s.points.min() >= 1.0 and s.points.max() <= 1e4
    assert s.meta["truncation"] == 1e4


@pytest.mark.parametrize(
    "bad",
    [lambda: Sphere(0), lambda: Hypercube(0), lambda: HammingCube(-1), lambda: ParetoRay(1.0), lambda: Equilateral(3, 0.0)],
)
def test_invalid_family_parameters(bad):
    with pytest.raises(ParameterError):
        bad()


def test_sampling_is_reproducible():
    for fam in (Sphere(4), Hypercube(3), HammingCube(5), TwoSpheres(3), ParetoRay(50.0)):
        a = sample_analytic(fam, 200, 99)
        b = sample_analytic(fam, 200, 99)
        assert a.points.tobytes() == b.points.tobytes()
        assert a.points.tobytes() != sample_analytic(fam, 200, 100).points.tobytes()


def test_build_equilateral_cases():
    one = build_equilateral(1)
    assert len(one) == 1 and one.distance_matrix().tolist() == [[0.0]]
    three = build_equilateral(3, 1.0)
    assert three.matrix.tolist() == [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
    five = build_equilateral(5, 0.1)
    assert check_metric(five) <= 0


def test_pairwise_distance_examples():
    e = FiniteSpace.from_points([[0.0, 0.0], [3.0, 4.0]])
    assert pairwise_distance(e, 0, 1) == 5.0
    assert pairwise_distance(e, 1, 1) == 0.0
    h = FiniteSpace.from_points([[0, 0, 0, 0], [0, 0, 1, 1]], "hamming")
    assert pairwise_distance(h, 0, 1) == 0.5
    with pytest.raises(IndexError):
        pairwise_distance(e, 0, 2)


def test_metric_payload_mismatch():
    with pytest.raises((DataError, ParameterError)):
        FiniteSpace.from_points([[0.3, 1.0], [1.0, 0.0]], "hamming")


def test_weight_validation():
    with pytest.raises((DataError, ParameterError)):
        FiniteSpace.from_points([[0.0], [1.0]], weights=[0.5, 0.6])
    with pytest.raises((DataError, ParameterError)):
        FiniteSpace.from_points([[0.0], [1.0]], weights=[1.0, 0.0])


@pytest.mark.parametrize(
    "matrix",
    [
        [[0, 1], [2, 0]],
        [[1, 1], [1, 0]],
        [[0, -1], [-1, 0]],
        [[0, 1, 5], [1, 0, 1], [5, 1, 0]],
    ],
)
def test_matrix_validation(matrix):
    with pytest.raises((DataError, ParameterError)):
        FiniteSpace.from_matrix(matrix)


def test_payloads_are_read_only():
    s = sample_analytic(Sphere(2), 10, 0)
    with pytest.raises(ValueError):
        s.points[0, 0] = 2.0
    with pytest.raises(ValueError):
        s.distance_matrix()[0, 1] = 3.0


def test_random_spaces_satisfy_metric_axioms(rng):
    for fam in (Sphere(3), Hypercube(4), HammingCube(6), TwoSpheres(2)):
        s = sample_analytic(fam, 60, int(rng.integers(1 << 30)))
        d = s.distance_matrix()
        assert np.allclose(d, d.T) and np.all(np.diag(d) == 0) and d.min() >= 0
        assert check_metric(s) <= 1e-12


@pytest.mark.parametrize("n,h", [(2, 0.3), (5, 0.2), (20, 0.1), (50, 0.05)])
def test_cap_mass_matches_monte_carlo(n, h):
    count = 200_000
    s = sample_analytic(Sphere(n), count, 2024 + n)
    p_hat = float((s.points[:, 0] >= h).mean())
    p = 0.5 * betainc(n / 2, 0.5, 1 - h * h)
    se = math.sqrt(p * (1 - p) / count)
    assert abs(p_hat - p) <= 3 * se


def test_pair_sampling_independent_of_threads(monkeypatch):
    a = sample_pair_distances(Sphere(5), 50_000, 7)
    monkeypatch.setenv("IDIM_THREADS", "1")
    b = sample_pair_distances(Sphere(5), 50_000, 7)
    assert a.tobytes() == b.tobytes()


def test_scaled_multiplies_distances(rng):
    s = FiniteSpace.from_points(rng.normal(size=(7, 3)))
    assert np.allclose(s.scaled(2.5).distance_matrix(), 2.5 * s.distance_matrix())
