"""Concentration functions, their integrals and the concentration dimension.

Three engines produce an alpha(eps) curve:

* ``alpha_analytic``: closed forms for the families that have one;
* ``alpha_subset_exact``: exhaustive search over subsets A with mu(A) >= 1/2
  of the smallest eps-neighbourhood, for spaces of at most 24 points;
* ``alpha_feature_lower``: sup of mu{f >= M_f + eps} over a sampled feature
  class, a lower bound on the true curve.

Neighbourhoods are open, A_eps = {x : d(x, A) < eps}, so on a finite space the
curve is a left-continuous step function whose jumps sit just after realized
distances.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import betainc
from scipy.stats import binom

from . import kernels
from ._parallel import seed_sequence
from .errors import ParameterError
from .features import FEATURE_KINDS, _values, char_size, generate_features, weighted_lower_median
from .space import (
    AnalyticSpace,
    Equilateral,
    FiniteSpace,
    HammingCube,
    ParetoRay,
    Sphere,
    TwoSpheres,
)
from .values import DIVERGENT_ZERO

KINDS = ("analytic-exact", "subset-exact", "feature-lower-bound")
SUBSET_EXACT_MAX = 24
DEFAULT_GRID_POINTS = 256
TAIL_TOLERANCE = 0.01
HALF_TOL = 1e-12

# alpha_{S^n}(eps) <= C1 exp(-C2 eps^2 n) on eps in (0, 1], 2 <= n <= 100.
# The smallest admissible C2 for C1 = 1/2 found on a fine grid is 0.605.
GAUSSIAN_C1 = 0.5
GAUSSIAN_C2 = 0.5


@dataclass(frozen=True, eq=False)
class ConcentrationCurve:
    """alpha(eps) sampled on an increasing grid that starts at 0.

    ``support`` is the distance beyond which alpha vanishes (inf for unbounded
    spaces). ``step`` marks left-continuous piecewise-constant curves, which are
    integrated with the right-endpoint rule instead of trapezoids.
    ``truncation`` records the cut-off of a space sampled from an unbounded
    family.
    """

    grid: np.ndarray
    alpha: np.ndarray
    kind: str
    support: float = math.inf
    step: bool = False
    truncation: Optional[float] = None
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.array(self.grid, dtype=np.float64)
        a = np.array(self.alpha, dtype=np.float64)
        if self.kind not in KINDS:
            raise ParameterError(f"unknown curve kind {self.kind!r}")
        if g.ndim != 1 or len(g) == 0 or g.shape != a.shape:
            raise ParameterError("grid and alpha must be non-empty 1-d arrays of equal length")
        if g[0] != 0 or np.any(np.diff(g) <= 0):
            raise ParameterError("grid must start at 0 and increase strictly")
        if a[0] != 0.5:
            raise ParameterError("alpha(0) must equal 1/2")
        if np.any(a < 0) or np.any(a > 0.5) or np.any(np.diff(a) > 0):
            raise ParameterError("alpha must be non-increasing with values in [0, 1/2]")
        g.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "alpha", a)

    def rows(self):
        return [(float(e), float(v), self.kind) for e, v in zip(self.grid, self.alpha)]

    def to_csv(self, path=None):
        lines = ["eps,alpha,kind"] + [f"{e!r},{v!r},{k}" for e, v, k in self.rows()]
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def _grid(grid):
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 1 or len(g) == 0:
        raise ParameterError("grid must be a non-empty 1-d sequence")
    if g[0] != 0 or np.any(np.diff(g) <= 0):
        raise ParameterError("grid must start at 0 and increase strictly")
    return g


def _finish(alpha):
    """Pin alpha(0)=1/2, clamp into [0, 1/2], enforce monotonicity."""
    a = np.clip(np.asarray(alpha, dtype=np.float64), 0.0, 0.5)
    a[0] = 0.5
    return np.minimum.accumulate(a)


def unit_grid(points=DEFAULT_GRID_POINTS):
    return np.linspace(0.0, 1.0, points)


# ---------------------------------------------------------------------------
# closed forms


def cap_measure(n, h):
    """Normalized measure of the cap {x_1 >= h} on S^n (in R^(n+1))."""
    h = np.asarray(h, dtype=np.float64)
    hh = np.clip(np.abs(h), 0.0, 1.0)
    upper = 0.5 * betainc(n / 2.0, 0.5, 1.0 - hh * hh)
    return np.where(h >= 0, upper, 1.0 - upper)


def sphere_alpha(n, eps):
    """Concentration function of S^n with chordal distance.

    The complement of the open eps-neighbourhood of a hemisphere is the cap of
    height eps*sqrt(1 - eps^2/4); it is empty once eps >= sqrt(2).
    """
    eps = np.asarray(eps, dtype=np.float64)
    inside = eps < math.sqrt(2.0)
    e = np.where(inside, eps, 0.0)
    h = e * np.sqrt(1.0 - e * e / 4.0)
    return np.where(inside, cap_measure(n, h), 0.0)


def hamming_alpha(n, eps):
    """Exact concentration function of {0,1}^n with normalized Hamming distance.

    An open eps-neighbourhood grows a set by t = ceil(eps*n) - 1 steps. By
    Harper's vertex-isoperimetric theorem the optimal half-mass set is the
    initial segment of simplicial order: the ball of radius (n-1)/2 for odd n;
    for even n the ball of radius n/2 - 1 plus the weight-n/2 words with a
    leading 1. Its t-neighbourhood keeps the same shape, so the complement is
    a binomial tail, plus, for even n, the words of weight n/2 + t with a
    leading 0.
    """
    eps = np.asarray(eps, dtype=np.float64)
    t = np.maximum(np.ceil(eps * n - 1e-9) - 1, 0)
    if n % 2:
        tail = binom.sf((n - 1) // 2 + t, n, 0.5)
    else:
        k = n // 2 + t
        tail = binom.sf(k, n, 0.5) + 0.5 * binom.pmf(k, n - 1, 0.5)
    return np.where(eps > 0, tail, 0.5)


def alpha_analytic(space, grid):
    """Closed-form curve for Sphere, TwoSpheres, Equilateral, ParetoRay, HammingCube."""
    g = _grid(grid)
    trunc = None
    step = False
    if isinstance(space, Sphere):
        a = sphere_alpha(space.n, g)
    elif isinstance(space, TwoSpheres):
        a = np.where(g <= 1.0, 0.5, 0.0)
        step = True
    elif isinstance(space, Equilateral):
        # floor(N/2)/N: equals 1/2 for even N, slightly less for odd N
        a = np.where(g <= space.eps, (space.N // 2) / space.N, 0.0)
        step = True
    elif isinstance(space, ParetoRay):
        a = 1.0 / (2.0 + g)
        trunc = float(space.truncation)
    elif isinstance(space, HammingCube):
        a = hamming_alpha(space.n, g)
        step = True
    else:
        name = getattr(space, "family", type(space).__name__)
        raise ParameterError(f"no closed-form concentration function for family {name!r}")
    support = space.diameter if not isinstance(space, ParetoRay) else math.inf
    return ConcentrationCurve(g, _finish(a), "analytic-exact", support, step, trunc, space.descriptor())


def analytic_breakpoints(space):
    if isinstance(space, TwoSpheres):
        return [1.0]
    if isinstance(space, Equilateral):
        return [float(space.eps)]
    if isinstance(space, Sphere):
        return [math.sqrt(2.0)]
    if isinstance(space, HammingCube):
        return list(np.arange(1, space.n + 1) / space.n)
    return []


# ---------------------------------------------------------------------------
# exhaustive subset oracle


def _threshold_masks(dist, threshold):
    n = len(dist)
    bits = (dist <= threshold).astype(np.uint64) << np.arange(n, dtype=np.uint64)[None, :]
    return bits.sum(axis=1).astype(np.uint32)


def alpha_subset_exact(space, grid):
    """Exact alpha via 1 - min mu(A_eps) over all A with mu(A) >= 1/2."""
    g = _grid(grid)
    n = len(space)
    if n > SUBSET_EXACT_MAX:
        raise ParameterError(f"subset-exact engine supports at most {SUBSET_EXACT_MAX} points, got {n}")
    dist = np.asarray(space.distance_matrix())
    levels = np.unique(dist)
    # d(x, A) < eps  <=>  d(x, A) <= largest realized distance below eps
    rank = np.searchsorted(levels, g, side="left")
    wanted = np.unique(rank[rank > 0])
    nbr = np.array([_threshold_masks(dist, levels[r - 1]) for r in wanted], dtype=np.uint32).reshape(len(wanted), n)
    lo, hi = kernels.split_tables(space.weights)
    best = kernels.subset_min_reach(nbr, lo, hi, 0.5 - HALF_TOL)
    by_rank = dict(zip(wanted.tolist(), (1.0 - best).tolist()))
    a = np.array([by_rank.get(int(r), 0.5) for r in rank])
    return ConcentrationCurve(
        g,
        _finish(a),
        "subset-exact",
        float(levels[-1]),
        True,
        _truncation(space),
        space.descriptor(),
    )


def _truncation(space):
    t = space.meta.get("truncation") if isinstance(space, FiniteSpace) else None
    return None if t is None else float(t)


def breakpoint_grid(space, upper=None):
    """0, every realized distance up to ``upper``, and ``upper`` itself.

    On such a grid the right-endpoint rule integrates a subset-exact curve
    without error.
    """
    levels = np.unique(np.asarray(space.distance_matrix()))
    if upper is None:
        upper = float(levels[-1])
    pts = np.concatenate(([0.0], levels[levels <= upper], [upper]))
    return np.unique(pts)


# ---------------------------------------------------------------------------
# feature lower bound


def deviation_curve(feature, weights, grid, median=None):
    """mu{f >= M_f + eps} on the grid, M_f the lower median."""
    f = _values(feature)
    w = np.asarray(weights, dtype=np.float64)
    m = weighted_lower_median(f, w) if median is None else median
    order = np.argsort(f, kind="mergesort")
    fs = f[order]
    suffix = np.concatenate((np.cumsum(w[order][::-1])[::-1], [0.0]))
    return suffix[np.searchsorted(fs, m + np.asarray(grid), side="left")]


def alpha_feature_lower(space, grid, feature_budget=64, seed=0, features=None, kinds=FEATURE_KINDS):
    """Pointwise max of mu{f >= M_f + eps} over sampled features and their negations."""
    g = _grid(grid)
    if feature_budget < 1:
        raise ParameterError("feature budget must be at least 1")
    feats = generate_features(space, feature_budget, seed_sequence(seed), kinds)
    if features is not None:
        feats = list(features) + feats
    best = np.zeros(len(g))
    for f in feats:
        v = _values(f)
        best = np.maximum(best, deviation_curve(v, space.weights, g))
        best = np.maximum(best, deviation_curve(-v, space.weights, g))
    trunc = _truncation(space)
    support = math.inf if trunc is not None else space.diameter()
    src = dict(space.descriptor(), features=len(feats), seed=_seed_value(seed))
    return ConcentrationCurve(g, _finish(best), "feature-lower-bound", support, True, trunc, src)


def _seed_value(seed):
    return seed if isinstance(seed, int) else None


# ---------------------------------------------------------------------------
# integration and dimension


@dataclass
class AlphaIntegral:
    value: float
    diverged: bool
    upper: float
    tail: float = 0.0
    mode: str = "unit"
    rule: str = "trapezoid"


def _integrate_to(g, a, upper, step):
    """Integral over [0, upper] where upper <= g[-1]."""
    k = int(np.searchsorted(g, upper, side="left"))
    if step:
        widths = np.diff(g[: k + 1])
        total = float(np.sum(a[1 : k + 1] * widths))
        if g[k] > upper:
            total -= float(a[k]) * (g[k] - upper)
        return total
    gg = np.append(g[:k], upper)
    aa = np.append(a[:k], np.interp(upper, g, a))
    return float(trapezoid(aa, gg))


def integrate_alpha(curve, mode="unit", tail_tolerance=TAIL_TOLERANCE):
    """Integral of alpha over [0, 1] (``unit``) or [0, support) (``full``).

    In full mode a curve that stops short of its support needs truncation
    metadata; the tail is then estimated as alpha(last) times the missing
    range, and a tail above ``tail_tolerance`` of the accumulated integral sets
    the divergence flag.
    """
    if mode not in ("unit", "full"):
        raise ParameterError(f"mode must be 'unit' or 'full', got {mode!r}")
    g, a = curve.grid, curve.alpha
    rule = "step" if curve.step else "trapezoid"
    upper = 1.0 if mode == "unit" else curve.support
    if g[-1] >= upper:
        return AlphaIntegral(_integrate_to(g, a, upper, curve.step), False, upper, 0.0, mode, rule)
    value = _integrate_to(g, a, g[-1], curve.step)
    if curve.support <= g[-1]:
        return AlphaIntegral(value, False, upper, 0.0, mode, rule)
    if mode == "unit" or curve.truncation is None:
        raise ParameterError(
            f"grid ends at {g[-1]:g} but the requested range extends to {upper:g} and the curve has no truncation"
        )
    tail = 0.0 if a[-1] == 0 else float(a[-1]) * (upper - g[-1])
    diverged = tail > tail_tolerance * value
    return AlphaIntegral(value, bool(diverged), upper, tail, mode, rule)


def dim_alpha(curve, mode="unit", tail_tolerance=TAIL_TOLERANCE):
    """1 / (2 * integral)^2; +inf for a zero integral, zero-by-divergence when flagged."""
    res = integrate_alpha(curve, mode, tail_tolerance)
    if res.diverged:
        return DIVERGENT_ZERO
    if res.value <= 0:
        return math.inf
    return 1.0 / (2.0 * res.value) ** 2


def full_grid(space, points=DEFAULT_GRID_POINTS, pair_budget=100_000, seed=0):
    """Uniform grid for full-range mode: up to 3*CharSize, and to the diameter when bounded."""
    upper = 3.0 * char_size(space, pair_budget, seed)
    if isinstance(space, AnalyticSpace):
        diam = space.diameter
        if math.isfinite(diam):
            upper = max(upper, diam)
    elif _truncation(space) is None:
        upper = max(upper, space.diameter())
    if upper <= 0:
        upper = 1.0
    return np.linspace(0.0, upper, points)


def concentration_curve(space, mode="unit", feature_budget=64, seed=0, points=DEFAULT_GRID_POINTS):
    """Best available curve: analytic, exact on <= 24 points, else the feature bound."""
    if isinstance(space, AnalyticSpace):
        g = unit_grid(points) if mode == "unit" else full_grid(space, points, seed=seed)
        g = np.unique(np.concatenate((g, [b for b in analytic_breakpoints(space) if b <= g[-1]])))
        return alpha_analytic(space, g)
    if len(space) <= SUBSET_EXACT_MAX:
        upper = 1.0 if mode == "unit" else None
        g = breakpoint_grid(space, upper)
        if mode == "unit" and g[-1] < 1.0:
            g = np.append(g, 1.0)
        return alpha_subset_exact(space, g)
    g = unit_grid(points) if mode == "unit" else full_grid(space, points, seed=seed)
    return alpha_feature_lower(space, g, feature_budget, seed)


# ---------------------------------------------------------------------------
# mean versus median


@dataclass
class MeanMedianReport:
    """|mean - median| against the bound 1/sqrt(dim_alpha) (full-range sense)."""

    bound: float
    dimension: float
    margins: list = field(default_factory=list)
    violations: int = 0
    skipped: bool = False
    reason: str = ""

    @property
    def checked(self):
        return len(self.margins)


def check_mean_median_bound(space, features, curve=None, tol=1e-9):
    """Check every feature against the mean-median bound.

    The default curve is the subset-exact one on the breakpoint grid, whose
    integral is exact; a divergent dimension makes the bound vacuous and the
    report comes back marked skipped.
    """
    if curve is None:
        if len(space) > SUBSET_EXACT_MAX:
            raise ParameterError(f"needs an exact curve; pass one for spaces above {SUBSET_EXACT_MAX} points")
        curve = alpha_subset_exact(space, breakpoint_grid(space))
    dim = dim_alpha(curve, "full")
    if dim == 0:
        return MeanMedianReport(math.inf, 0.0, skipped=True, reason="divergent concentration integral")
    bound = 0.0 if math.isinf(dim) else 1.0 / math.sqrt(dim)
    w = space.weights
    margins = []
    for f in features:
        v = _values(f)
        gap = abs(float(np.dot(w, v)) - weighted_lower_median(v, w))
        margins.append(bound - gap)
    violations = sum(1 for m in margins if m < -tol)
    return MeanMedianReport(bound, float(dim), margins, violations)
