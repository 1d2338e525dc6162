"""Metric spaces with measure: finite datasets and the analytic families.

A :class:`FiniteSpace` is the dataset model: points, a metric and positive
weights summing to one. The analytic families (:class:`Sphere`,
:class:`TwoSpheres`, ...) describe infinite spaces that can be sampled and, for
some of them, have closed-form concentration curves.
"""

from dataclasses import dataclass, field
from typing import ClassVar, Mapping, Optional

import numpy as np
from scipy.spatial.distance import cdist

from ._parallel import chunked, ordered_map, seed_sequence
from .errors import DataError, ParameterError

METRICS = ("euclidean", "hamming", "precomputed")

WEIGHT_TOL = 1e-12
EXHAUSTIVE_METRIC_CHECK = 64
_MATRIX_CACHE_LIMIT = 4096


def _readonly(a):
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    """A finite metric space with probability weights.

    ``points`` holds coordinate rows (euclidean), 0/1 rows (hamming) or integer
    ids (precomputed, in which case ``matrix`` carries the distances). All
    arrays are stored read-only.
    """

    points: np.ndarray
    metric: str
    weights: np.ndarray
    matrix: Optional[np.ndarray] = None
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ParameterError(f"unknown metric {self.metric!r}; expected one of {METRICS}")
        points = np.asarray(self.points)
        weights = np.asarray(self.weights, dtype=np.float64)
        if self.metric == "precomputed":
            if self.matrix is None:
                raise DataError("precomputed metric needs a distance matrix")
            matrix = np.asarray(self.matrix, dtype=np.float64)
            _check_matrix(matrix)
            if points.ndim != 1 or len(points) != len(matrix):
                points = np.arange(len(matrix))
            object.__setattr__(self, "matrix", _readonly(matrix))
        else:
            if self.matrix is not None:
                raise DataError("a distance matrix is only allowed with metric='precomputed'")
            if points.ndim == 1:
                points = points[:, None]
            if points.ndim != 2:
                raise DataError("point payloads must form a 2-d array")
            if self.metric == "hamming":
                if points.dtype.kind == "f" and not np.all((points == 0) | (points == 1)):
                    raise DataError("hamming metric needs 0/1 payloads, got real vectors")
                if not np.all((points == 0) | (points == 1)):
                    raise DataError("hamming payloads must be 0/1")
                points = points.astype(np.uint8)
            else:
                if points.dtype.kind not in "fiu":
                    raise DataError("euclidean payloads must be numeric")
                points = points.astype(np.float64)
                if not np.all(np.isfinite(points)):
                    raise DataError("euclidean payloads must be finite")
        n = len(points)
        if n < 1:
            raise DataError("a space needs at least one point")
        if weights.shape != (n,):
            raise DataError(f"expected {n} weights, got shape {weights.shape}")
        if not np.all(weights > 0):
            raise DataError("weights must be strictly positive")
        if abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise DataError(f"weights sum to {weights.sum()!r}, not 1")
        object.__setattr__(self, "points", _readonly(points))
        object.__setattr__(self, "weights", _readonly(weights))
        object.__setattr__(self, "meta", dict(self.meta))

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_points(cls, points, metric="euclidean", weights=None, meta=None):
        points = np.asarray(points)
        n = len(points)
        return cls(points, metric, uniform_weights(n) if weights is None else weights, meta=meta or {})

    @classmethod
    def from_matrix(cls, matrix, weights=None, meta=None):
        matrix = np.asarray(matrix, dtype=np.float64)
        n = len(matrix)
        return cls(
            np.arange(n),
            "precomputed",
            uniform_weights(n) if weights is None else weights,
            matrix=matrix,
            meta=meta or {},
        )

    # -- basic queries ----------------------------------------------------

    def __len__(self):
        return len(self.points)

    @property
    def size(self):
        return len(self.points)

    @property
    def is_uniform(self):
        return bool(np.all(self.weights == self.weights[0]))

    @property
    def is_vector(self):
        return self.metric in ("euclidean", "hamming")

    def distance(self, i, j):
        return pairwise_distance(self, i, j)

    def pair_distances(self, ii, jj):
        """Distances d(ii[k], jj[k]) for index arrays of equal length."""
        ii = np.asarray(ii, dtype=np.int64)
        jj = np.asarray(jj, dtype=np.int64)
        if self.metric == "precomputed":
            return self.matrix[ii, jj]
        return payload_distances(self.metric, self.points[ii], self.points[jj])

    def distances_from(self, idx):
        """Rows of the distance matrix for the given anchor indices."""
        idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
        cached = self.__dict__.get("_dist_matrix")
        if cached is not None:
            return cached[idx]
        if self.metric == "precomputed":
            return self.matrix[idx]
        return _cdist(self.metric, self.points[idx], self.points)

    def distance_matrix(self):
        cached = self.__dict__.get("_dist_matrix")
        if cached is not None:
            return cached
        if self.metric == "precomputed":
            full = self.matrix
        else:
            full = _readonly(_cdist(self.metric, self.points, self.points))
        if len(self) <= _MATRIX_CACHE_LIMIT:
            self.__dict__["_dist_matrix"] = full
        return full

    def diameter(self):
        if len(self) == 1:
            return 0.0
        if len(self) <= _MATRIX_CACHE_LIMIT or self.metric == "precomputed":
            return float(self.distance_matrix().max())
        if self.metric == "euclidean" and self.points.shape[1] == 1:
            return float(np.ptp(self.points[:, 0]))
        best = 0.0
        for start in range(0, len(self), 512):
            best = max(best, float(self.distances_from(np.arange(start, min(start + 512, len(self)))).max()))
        return best

    def scaled(self, factor):
        """Same space with every distance multiplied by ``factor`` > 0."""
        if factor <= 0:
            raise ParameterError("scale factor must be positive")
        if self.metric == "euclidean":
            return FiniteSpace(self.points * factor, "euclidean", self.weights, meta=self.meta)
        return FiniteSpace(
            np.arange(len(self)), "precomputed", self.weights, matrix=self.distance_matrix() * factor, meta=self.meta
        )

    def descriptor(self):
        desc = {"kind": "finite", "size": len(self), "metric": self.metric}
        desc.update({k: v for k, v in self.meta.items() if isinstance(v, (str, int, float, bool))})
        return desc


def uniform_weights(n):
    return np.full(int(n), 1.0 / int(n))


def _check_matrix(m):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DataError(f"distance matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DataError("distance matrix has non-finite entries")
    if not np.array_equal(m, m.T):
        raise DataError("distance matrix is not symmetric")
    if np.any(np.diag(m) != 0):
        raise DataError("distance matrix has non-zero diagonal")
    if np.any(m < 0):
        raise DataError("distance matrix has negative entries")
    worst = triangle_violation(m)
    if worst > 1e-9 * max(1.0, float(m.max())):
        raise DataError(f"distance matrix violates the triangle inequality by {worst:.3g}")


def triangle_violation(m, samples=200_000, seed=0):
    """Largest d(i,k) - d(i,j) - d(j,k); exhaustive for small matrices."""
    n = len(m)
    if n < 3:
        return 0.0
    if n <= EXHAUSTIVE_METRIC_CHECK:
        # through[i, j, k] = d(i,j) + d(j,k)
        through = m[:, :, None] + m[None, :, :]
        return float(max(0.0, (m[:, None, :] - through).max()))
    rng = np.random.default_rng(seed)
    i, j, k = rng.integers(0, n, size=(3, samples))
    return float(max(0.0, (m[i, k] - m[i, j] - m[j, k]).max()))


def payload_distances(metric, p, q):
    if metric == "euclidean":
        return np.sqrt(((p - q) ** 2).sum(axis=1))
    if metric == "hamming":
        return (p != q).mean(axis=1)
    raise DataError(f"no payload distance for metric {metric!r}")


def _cdist(metric, a, b):
    if metric == "euclidean":
        return cdist(a, b, "euclidean")
    # scipy's hamming is already the fraction of differing positions
    return cdist(a.astype(bool), b.astype(bool), "hamming")


def pairwise_distance(space, i, j):
    n = len(space)
    for k in (i, j):
        if not (-n <= k < n) or isinstance(k, bool):
            raise IndexError(f"point index {k} out of range for a space of {n} points")
    if space.metric == "precomputed":
        return float(space.matrix[i, j])
    return float(payload_distances(space.metric, space.points[[i]], space.points[[j]])[0])


def check_metric(space, samples=200_000, seed=0):
    """Largest violation of the metric axioms (0.0 when they all hold)."""
    if len(space) <= _MATRIX_CACHE_LIMIT:
        m = space.distance_matrix()
        worst = float(max(np.abs(m - m.T).max(), np.abs(np.diag(m)).max(), max(0.0, -m.min())))
        return max(worst, triangle_violation(m, samples, seed))
    rng = np.random.default_rng(seed)
    i, j, k = rng.integers(0, len(space), size=(3, samples))
    dij, djk, dik = space.pair_distances(i, j), space.pair_distances(j, k), space.pair_distances(i, k)
    return float(max(0.0, (dik - dij - djk).max(), np.abs(space.pair_distances(i, i)).max()))


# ---------------------------------------------------------------------------
# analytic families


class AnalyticSpace:
    """Base class for the closed-form space families."""

    family: ClassVar[str] = ""
    metric: ClassVar[str] = "euclidean"

    def sample_payload(self, count, rng):
        raise NotImplementedError

    def payload_distances(self, p, q):
        return payload_distances(self.metric, p, q)

    @property
    def payload_width(self):
        return 1

    @property
    def diameter(self):
        raise NotImplementedError

    def descriptor(self):
        d = {"kind": "analytic", "family": self.family}
        d.update(self.__dict__)
        return d


def _positive_int(name, value):
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ParameterError(f"{name} must be a positive integer, got {value!r}")


def _unit_rows(rng, count, dim):
    x = rng.standard_normal((count, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x


@dataclass(frozen=True)
class Sphere(AnalyticSpace):
    """Unit sphere S^n in R^(n+1) with the rotation-invariant measure."""

    n: int
    family: ClassVar[str] = "sphere"

    def __post_init__(self):
        _positive_int("n", self.n)

    @property
    def payload_width(self):
        return self.n + 1

    @property
    def diameter(self):
        return 2.0

    def sample_payload(self, count, rng):
        return _unit_rows(rng, count, self.n + 1)


@dataclass(frozen=True)
class Hypercube(AnalyticSpace):
    """Unit cube [0,1]^n with Lebesgue measure."""

    n: int
    family: ClassVar[str] = "hypercube"

    def __post_init__(self):
        _positive_int("n", self.n)

    @property
    def payload_width(self):
        return self.n

    @property
    def diameter(self):
        return float(np.sqrt(self.n))

    def sample_payload(self, count, rng):
        return rng.random((count, self.n))


@dataclass(frozen=True)
class HammingCube(AnalyticSpace):
    """{0,1}^n with normalized Hamming distance and counting measure."""

    n: int
    family: ClassVar[str] = "hamming"
    metric: ClassVar[str] = "hamming"

    def __post_init__(self):
        _positive_int("n", self.n)

    @property
    def payload_width(self):
        return self.n

    @property
    def diameter(self):
        return 1.0

    def sample_payload(self, count, rng):
        return rng.integers(0, 2, size=(count, self.n), dtype=np.uint8)


@dataclass(frozen=True)
class TwoSpheres(AnalyticSpace):
    """Two parallel unit (n-1)-spheres at distance 1, each of mass 1/2.

    Points live in R^(n+1): the first coordinate is the copy index 0 or 1, the
    remaining n coordinates lie on the unit sphere of R^n.
    """

    n: int
    family: ClassVar[str] = "two-spheres"

    def __post_init__(self):
        _positive_int("n", self.n)

    @property
    def payload_width(self):
        return self.n + 1

    @property
    def diameter(self):
        return float(np.sqrt(5.0))

    def sample_payload(self, count, rng):
        copy = rng.integers(0, 2, size=count).astype(np.float64)
        return np.column_stack((copy, _unit_rows(rng, count, self.n)))


@dataclass(frozen=True)
class Equilateral(AnalyticSpace):
    """N points at mutual distance ``eps`` with the counting measure."""

    N: int
    eps: float = 1.0
    family: ClassVar[str] = "equilateral"
    metric: ClassVar[str] = "precomputed"

    def __post_init__(self):
        _positive_int("N", self.N)
        if not self.eps > 0:
            raise ParameterError(f"eps must be positive, got {self.eps!r}")

    @property
    def diameter(self):
        return float(self.eps) if self.N > 1 else 0.0

    def sample_payload(self, count, rng):
        return rng.integers(0, self.N, size=(count, 1))

    def payload_distances(self, p, q):
        return np.where(p[:, 0] != q[:, 0], float(self.eps), 0.0)


@dataclass(frozen=True)
class ParetoRay(AnalyticSpace):
    """[1, inf) with density 1/x^2; ``truncation`` T bounds the sampler."""

    truncation: float
    family: ClassVar[str] = "pareto"

    def __post_init__(self):
        if not (self.truncation > 1):
            raise ParameterError(f"truncation T must exceed 1, got {self.truncation!r}")

    @property
    def diameter(self):
        return float("inf")

    def quantile(self, u):
        """Inverse CDF of the truncated law."""
        return 1.0 / (1.0 - np.asarray(u) * (1.0 - 1.0 / self.truncation))

    def sample_payload(self, count, rng):
        return self.quantile(rng.random(count))[:, None]


FAMILIES = {
    "sphere": Sphere,
    "hypercube": Hypercube,
    "hamming": HammingCube,
    "two-spheres": TwoSpheres,
    "equilateral": Equilateral,
    "pareto": ParetoRay,
}


def _check_count(count):
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise ParameterError(f"count must be a positive integer, got {count!r}")


def sample_analytic(space, count, seed):
    """Draw ``count`` i.i.d. points of an analytic family as a FiniteSpace."""
    _check_count(count)
    rng = np.random.default_rng(seed_sequence(seed))
    payload = space.sample_payload(int(count), rng)
    meta = {"family": space.family, "seed": int(seed)}
    if isinstance(space, ParetoRay):
        meta["truncation"] = float(space.truncation)
    if isinstance(space, Equilateral):
        ids = payload[:, 0]
        matrix = np.where(ids[:, None] != ids[None, :], float(space.eps), 0.0)
        return FiniteSpace.from_matrix(matrix, meta=meta)
    return FiniteSpace.from_points(payload, space.metric, meta=meta)


def build_equilateral(N, eps=1.0):
    """N points pairwise ``eps`` apart, uniform weights."""
    Equilateral(N, eps)
    matrix = np.full((N, N), float(eps))
    np.fill_diagonal(matrix, 0.0)
    return FiniteSpace.from_matrix(matrix, meta={"family": "equilateral", "eps": float(eps)})


def _pair_chunk_size(width):
    return max(1024, (1 << 21) // max(1, int(width)))


def map_pair_chunks(space, count, seed, reduce):
    """Apply ``reduce`` to the distances of each chunk of i.i.d. pairs.

    Pairs are drawn from mu x mu: fresh points per pair for analytic
    families, weighted indices for finite spaces. The chunk layout depends only
    on ``count`` and ``seed``, so results match for every worker count.
    """
    _check_count(count)
    if isinstance(space, FiniteSpace):
        width = space.points.shape[1] if space.is_vector else 1

        def draw(size, rng):
            if space.is_uniform:
                ii = rng.integers(0, len(space), size)
                jj = rng.integers(0, len(space), size)
            else:
                ii = rng.choice(len(space), size, p=space.weights)
                jj = rng.choice(len(space), size, p=space.weights)
            return space.pair_distances(ii, jj)

    else:
        width = space.payload_width

        def draw(size, rng):
            p = space.sample_payload(size, rng)
            q = space.sample_payload(size, rng)
            return space.payload_distances(p, q)

    def work(job):
        size, ss = job
        return reduce(draw(size, np.random.default_rng(ss)))

    return ordered_map(work, chunked(count, _pair_chunk_size(width), seed))


def sample_pair_distances(space, count, seed):
    """Distances of ``count`` i.i.d. pairs drawn from mu x mu."""
    return np.concatenate(map_pair_chunks(space, count, seed, lambda d: d))
