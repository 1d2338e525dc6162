"""1-Lipschitz features, medians, characteristic size and observable diameter.

Feature search uses a fixed, cheap class: coordinate projections (vector
payloads), distances to single points, McShane extensions of random anchor
values, and distances to random subsets. Every member is 1-Lipschitz by
construction, so anything computed as a supremum over this class is a lower
bound for the supremum over all features.
"""

from dataclasses import dataclass, field

import numpy as np

from ._parallel import seed_sequence
from .errors import ParameterError
from .space import FiniteSpace, sample_pair_distances

FEATURE_KINDS = ("coordinate", "point", "mcshane", "subset")
LIPSCHITZ_TOL = 1e-9
EXACT_CHARSIZE_PAIRS = 10**7


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Values of one real feature on the points of a finite space."""

    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def __neg__(self):
        label = self.label[1:] if self.label.startswith("-") else "-" + self.label
        return FeatureVector(-self.values, label)


def _values(feature):
    return np.asarray(getattr(feature, "values", feature), dtype=np.float64)


def lipschitz_excess(space, feature, exhaustive_limit=512, samples=200_000, seed=0):
    """Largest |f(x)-f(y)| - d(x,y); exhaustive for small spaces, sampled otherwise."""
    f = _values(feature)
    n = len(space)
    if len(f) != n:
        raise ParameterError(f"feature has {len(f)} values for a space of {n} points")
    if n <= exhaustive_limit:
        return float((np.abs(f[:, None] - f[None, :]) - space.distance_matrix()).max())
    rng = np.random.default_rng(seed)
    i, j = rng.integers(0, n, size=(2, samples))
    return float((np.abs(f[i] - f[j]) - space.pair_distances(i, j)).max())


def is_lipschitz(space, feature, tol=LIPSCHITZ_TOL, **kw):
    return lipschitz_excess(space, feature, **kw) <= tol


# ---------------------------------------------------------------------------
# feature generation


def mcshane_feature(space, anchors, values=None, label="mcshane"):
    """f(x) = min over anchors a of values[a] + d(x, a)."""
    anchors = np.atleast_1d(np.asarray(anchors, dtype=np.int64))
    g = np.zeros(len(anchors)) if values is None else np.asarray(values, dtype=np.float64)
    if len(g) != len(anchors):
        raise ParameterError("need one value per anchor")
    rows = space.distances_from(anchors)
    return FeatureVector((rows + g[:, None]).min(axis=0), label)


def _value_scale(space, rng, probes=64):
    n = len(space)
    if n <= 512:
        return space.diameter()
    i, j = rng.integers(0, n, size=(2, probes))
    return float(np.max(space.pair_distances(i, j)))


def mcshane_random_feature(space, anchors, seed, scale=None):
    """McShane extension from ``anchors`` random points with random values in [0, scale]."""
    if isinstance(anchors, bool) or int(anchors) != anchors or anchors < 1:
        raise ParameterError(f"anchors must be a positive integer, got {anchors!r}")
    rng = np.random.default_rng(seed_sequence(seed))
    return _random_mcshane(space, int(anchors), rng, scale)


def _random_mcshane(space, anchors, rng, scale=None):
    n = len(space)
    idx = rng.choice(n, size=min(anchors, n), replace=False)
    if scale is None:
        scale = _value_scale(space, rng)
    g = rng.uniform(0.0, scale, size=len(idx))
    return mcshane_feature(space, idx, g, label=f"mcshane[{len(idx)}]")


def coordinate_features(space, limit=None):
    """Coordinate projections; Hamming bits are divided by the word length."""
    if not space.is_vector:
        return []
    pts = space.points.astype(np.float64)
    dim = pts.shape[1]
    scale = 1.0 / dim if space.metric == "hamming" else 1.0
    count = dim if limit is None else min(dim, limit)
    return [FeatureVector(pts[:, k] * scale, f"coord[{k}]") for k in range(count)]


def generate_features(space, budget, seed, kinds=FEATURE_KINDS):
    """A deterministic mix of 1-Lipschitz features; negations are not included."""
    if budget < 1:
        raise ParameterError("feature budget must be at least 1")
    unknown = set(kinds) - set(FEATURE_KINDS)
    if unknown:
        raise ParameterError(f"unknown feature kinds {sorted(unknown)}")
    kinds = [k for k in kinds if k != "coordinate" or space.is_vector]
    if not kinds:
        kinds = ["point", "mcshane"]
    rng = np.random.default_rng(seed_sequence(seed))
    n = len(space)
    out = []
    remaining = int(budget)
    for pos, kind in enumerate(kinds):
        share = remaining // (len(kinds) - pos)
        if kind == "coordinate":
            batch = coordinate_features(space, share)
        elif kind == "point":
            idx = rng.choice(n, size=share, replace=share > n)
            batch = [mcshane_feature(space, [a], label=f"dist[{a}]") for a in idx]
        elif kind == "mcshane":
            scale = _value_scale(space, rng)
            batch = [_random_mcshane(space, int(rng.integers(2, 9)), rng, scale) for _ in range(share)]
        else:
            batch = []
            for _ in range(share):
                size = int(rng.integers(1, max(2, n // 2) + 1))
                subset = rng.choice(n, size=min(size, n), replace=False)
                batch.append(mcshane_feature(space, subset, label=f"subset[{len(subset)}]"))
        out.extend(batch)
        remaining -= len(batch)
    return out


# ---------------------------------------------------------------------------
# medians and distance statistics


def weighted_lower_median(values, weights=None):
    """inf{t : mass{v <= t} >= 1/2 of the total}."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if weights is None:
        order = np.sort(v)
        return float(order[(len(order) - 1) // 2])
    w = np.asarray(weights, dtype=np.float64).ravel()
    order = np.argsort(v, kind="mergesort")
    cum = np.cumsum(w[order])
    k = int(np.searchsorted(cum, 0.5 * cum[-1] * (1 - 1e-12), side="left"))
    return float(v[order[min(k, len(v) - 1)]])


def median_of(feature, weights=None):
    """Lower median of a feature under the given point weights."""
    return weighted_lower_median(_values(feature), weights)


def char_size(space, pair_budget=100_000, seed=0):
    """Median distance under mu x mu, diagonal pairs included.

    Finite spaces with N^2 <= 10^7 are done exactly over all ordered pairs;
    larger spaces and analytic families are sampled with ``pair_budget`` pairs.
    """
    if isinstance(space, FiniteSpace) and len(space) ** 2 <= EXACT_CHARSIZE_PAIRS:
        d = space.distance_matrix()
        return weighted_lower_median(d, np.outer(space.weights, space.weights))
    if pair_budget < 1:
        raise ParameterError("pair_budget must be at least 1")
    return weighted_lower_median(sample_pair_distances(space, pair_budget, seed))


# ---------------------------------------------------------------------------
# observable diameter


@dataclass
class ObsDiamEstimate:
    """Lower bound on ObsDiam_kappa over a finite feature class."""

    value: float
    kappa: float
    features: int
    pairs: int
    exact_pairs: bool
    best_feature: str = ""
    kinds: tuple = field(default_factory=tuple)
    lower_bound: bool = True

    def __float__(self):
        return float(self.value)


def _threshold_quantile(delta, mass, kappa):
    """Smallest D with mass{delta >= D} < kappa * total mass."""
    u, inv = np.unique(delta, return_inverse=True)
    m = np.bincount(inv.ravel(), weights=np.broadcast_to(mass, delta.shape).ravel(), minlength=len(u))
    tail = np.cumsum(m[::-1])[::-1]
    k0 = int(np.count_nonzero(tail >= kappa * tail[0]))
    return float(u[k0 - 1]) if k0 >= 1 else 0.0


def obs_diam_details(space, kappa, feature_budget=64, pair_budget=100_000, seed=0, kinds=FEATURE_KINDS):
    if not (0 < kappa < 1):
        raise ParameterError(f"kappa must lie in (0, 1), got {kappa!r}")
    if feature_budget < 1 or pair_budget < 1:
        raise ParameterError("budgets must be at least 1")
    n = len(space)
    kinds = tuple(kinds)
    if n == 1:
        return ObsDiamEstimate(0.0, kappa, 0, 1, True, "", kinds)
    ss_feat, ss_pairs = seed_sequence(seed).spawn(2)
    feats = generate_features(space, feature_budget, ss_feat, kinds)
    exact = n * n <= pair_budget
    if exact:
        ii, jj = np.divmod(np.arange(n * n), n)
        mass = np.outer(space.weights, space.weights).ravel()
    else:
        rng = np.random.default_rng(ss_pairs)
        if space.is_uniform:
            ii, jj = rng.integers(0, n, size=(2, pair_budget))
        else:
            ii, jj = rng.choice(n, size=(2, pair_budget), p=space.weights)
        mass = np.ones(1)
    best, best_label = 0.0, ""
    for f in feats:
        v = f.values
        d = _threshold_quantile(np.abs(v[ii] - v[jj]), mass, kappa)
        if d > best:
            best, best_label = d, f.label
    return ObsDiamEstimate(best, kappa, len(feats), len(ii), exact, best_label, kinds)


def obs_diam(space, kappa, feature_budget=64, pair_budget=100_000, seed=0, kinds=FEATURE_KINDS):
    """Max over sampled features of the smallest D with P[|f(x)-f(y)| >= D] < kappa.

    A lower bound on the observable diameter: the supremum over all 1-Lipschitz
    functions is not searched. On a finite sample of a high-dimensional space,
    McShane features see the sample's own (poorly concentrated) geometry; pass
    ``kinds=("coordinate",)`` to measure only the projections.
    """
    return obs_diam_details(space, kappa, feature_budget, pair_budget, seed, kinds).value
