"""The me_1 metric on step functions and d_conc searches between tiny spaces.

``dist_to_singleton`` maximizes inf_c me_1(f, c) over the Lipschitz polytope
and so returns a lower bound. ``dconc_estimate`` is a heuristic for two
arbitrary uniform spaces; its value has no guaranteed bound direction.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from ._parallel import ordered_map, seed_sequence
from .errors import ParameterError
from .features import coordinate_features, mcshane_feature

SINGLETON_MAX_POINTS = 200
DCONC_MAX_ATOMS = 64
PROJECT_SWEEPS = 200
PROJECT_TOL = 1e-12


# ---------------------------------------------------------------------------
# step functions and me_1


@dataclass(frozen=True)
class StepFunction:
    """f(t) = values[k] for t in [breakpoints[k], breakpoints[k+1])."""

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        b, v = tuple(self.breakpoints), tuple(self.values)
        if len(b) < 2 or b[0] != 0 or b[-1] != 1:
            raise ParameterError("breakpoints must start at 0 and end at 1")
        if any(x >= y for x, y in zip(b, b[1:])):
            raise ParameterError("breakpoints must be strictly increasing")
        if len(v) != len(b) - 1:
            raise ParameterError(f"need {len(b) - 1} values, got {len(v)}")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, c):
        return cls((0, 1), (c,))

    @classmethod
    def from_atoms(cls, values):
        """Equal-length pieces; breakpoints are exact fractions."""
        k = len(values)
        return cls(tuple(Fraction(i, k) for i in range(k + 1)), tuple(values))

    def __call__(self, t):
        if not 0 <= t <= 1:
            raise ParameterError("t must lie in [0, 1]")
        b = self.breakpoints
        lo, hi = 0, len(b) - 2
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if b[mid] <= t:
                lo = mid
            else:
                hi = mid - 1
        return self.values[lo]


def _common_refinement(f, g):
    cuts = sorted(set(f.breakpoints) | set(g.breakpoints))
    lengths, fv, gv = [], [], []
    i = j = 0
    for lo, hi in zip(cuts, cuts[1:]):
        while f.breakpoints[i + 1] <= lo:
            i += 1
        while g.breakpoints[j + 1] <= lo:
            j += 1
        lengths.append(hi - lo)
        fv.append(f.values[i])
        gv.append(g.values[j])
    return lengths, fv, gv


def me1_levels_exact(dev, mass):
    """inf{eps > 0 : mass{dev > eps} < eps} in the arithmetic of the inputs.

    G(eps) = mass{dev > eps} is constant on [a, b) between consecutive
    deviation levels, so the infimum is max(a, G) on the first interval with
    b > G.
    """
    pairs = sorted(zip(dev, mass))
    suffix = [0] * (len(pairs) + 1)
    for k in range(len(pairs) - 1, -1, -1):
        suffix[k] = suffix[k + 1] + pairs[k][1]
    i = 0
    while i < len(pairs) and pairs[i][0] <= 0:
        i += 1
    a = 0
    while True:
        c = suffix[i]
        if i == len(pairs) or pairs[i][0] > c:
            return max(a, c)
        a = pairs[i][0]
        while i < len(pairs) and pairs[i][0] == a:
            i += 1


def me1(f, g):
    """Exact me_1 distance between two step functions on [0, 1].

    Works in the number type of the inputs: with Fraction breakpoints and
    values the result is exact.
    """
    lengths, fv, gv = _common_refinement(f, g)
    return me1_levels_exact([abs(x - y) for x, y in zip(fv, gv)], lengths)


def me1_atoms(u, v, weights=None):
    """Float me_1 between two functions given on the same atoms."""
    dev = np.abs(np.asarray(u, dtype=np.float64) - np.asarray(v, dtype=np.float64))
    mass = np.full(len(dev), 1.0 / len(dev)) if weights is None else np.asarray(weights, dtype=np.float64)
    return float(kernels.me1_levels(dev, mass))


def distance_to_constants(values, weights=None):
    """inf over constants c of me_1(f, c) for f taking ``values`` with ``weights``."""
    v = np.asarray(values, dtype=np.float64)
    w = np.full(len(v), 1.0 / len(v)) if weights is None else np.asarray(weights, dtype=np.float64)
    return float(kernels.me1_to_constants(v, w))


# ---------------------------------------------------------------------------
# parametrizations of finite spaces


@dataclass(frozen=True)
class Parametrization:
    """Point index of each of ``len(assignment)`` equal atoms of [0, 1]."""

    assignment: tuple
    weights: tuple

    def __post_init__(self):
        a = tuple(int(x) for x in self.assignment)
        w = np.asarray(self.weights, dtype=np.float64)
        counts = np.bincount(a, minlength=len(w))
        if len(counts) != len(w) or np.any(np.abs(counts / len(a) - w) > 1e-12):
            raise ParameterError("atom counts do not reproduce the point weights")
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    @classmethod
    def canonical(cls, weights, atoms):
        """Points in index order, each taking weights[i] * atoms consecutive atoms."""
        w = np.asarray(weights, dtype=np.float64)
        counts = np.rint(w * atoms).astype(np.int64)
        return cls(tuple(np.repeat(np.arange(len(w)), counts)), tuple(w))

    @property
    def atoms(self):
        return len(self.assignment)

    def pull_back(self, f):
        """f o phi as a StepFunction."""
        f = np.asarray(getattr(f, "values", f))
        return StepFunction.from_atoms([float(f[i]) for i in self.assignment])


# ---------------------------------------------------------------------------
# distance to a one-point space


@dataclass
class SingletonSearch:
    value: float
    feature: np.ndarray
    restarts: int
    steps: int
    lower_bound: bool = True


def project_lipschitz(f, dist):
    """A nearby point of the Lipschitz polytope (violations split, then closed)."""
    return kernels.lipschitz_project(np.asarray(f, dtype=np.float64), dist, PROJECT_SWEEPS, PROJECT_TOL)


SUBSET_SEED_MAX = 12


def _seed_features(space, dist, rng, count):
    n = len(space)
    feats = [dist[k].copy() for k in range(n)]
    feats += [c.values.copy() for c in coordinate_features(space)]
    if n <= SUBSET_SEED_MAX:
        # distance to every proper subset: the two-level candidates
        for mask in range(1, (1 << n) - 1):
            members = [i for i in range(n) if mask >> i & 1]
            feats.append(dist[members].min(axis=0))
    diam = float(dist.max())
    for _ in range(count):
        k = int(rng.integers(1, min(n, 8) + 1))
        anchors = rng.choice(n, size=k, replace=False)
        feats.append(mcshane_feature(space, anchors, rng.uniform(0, diam, k)).values.copy())
    return feats


def _climb(f, dist, w, steps, rng, scale):
    best = distance_to_constants(f, w)
    sigma = scale
    n = len(f)
    for _ in range(steps):
        if rng.random() < 0.5:
            move = rng.normal(0.0, sigma, n)
        else:
            move = np.zeros(n)
            move[rng.integers(n)] = rng.normal(0.0, 2 * sigma)
        cand = project_lipschitz(f + move, dist)
        val = distance_to_constants(cand, w)
        if val >= best:
            f, best = cand, val
            sigma = min(scale, sigma * 1.2)
        else:
            sigma *= 0.85
            if sigma < scale * 1e-3:
                sigma = scale
    return best, f


def dist_to_singleton_details(space, restarts=8, seed=0, steps=200):
    n = len(space)
    if n > SINGLETON_MAX_POINTS:
        raise ParameterError(f"{n} points exceeds the limit of {SINGLETON_MAX_POINTS} for the polytope search")
    if restarts < 1 or steps < 0:
        raise ParameterError("restarts must be >= 1 and steps >= 0")
    if n == 1:
        return SingletonSearch(0.0, np.zeros(1), restarts, steps)
    dist = np.ascontiguousarray(space.distance_matrix(), dtype=np.float64)
    w = np.ascontiguousarray(space.weights, dtype=np.float64)
    ss_init, *ss_runs = seed_sequence(seed).spawn(restarts + 1)
    feats = _seed_features(space, dist, np.random.default_rng(ss_init), max(64, 8 * restarts))
    scored = sorted(((distance_to_constants(f, w), k) for k, f in enumerate(feats)), key=lambda t: (-t[0], t[1]))
    starts = [feats[k] for _, k in scored[:restarts]]
    scale = 0.25 * float(dist.max())

    def run(job):
        f0, ss = job
        return _climb(f0, dist, w, steps, np.random.default_rng(ss), scale)

    results = ordered_map(run, zip(starts, ss_runs))
    best, f = max(results, key=lambda r: r[0])
    return SingletonSearch(best, f, restarts, steps)


def dist_to_singleton(space, restarts=8, seed=0, steps=200):
    """Best sup_f inf_c me_1(f o phi, c) found by multistart search on Lip_1(X).

    Every candidate is projected onto the Lipschitz polytope, so the result is
    a lower bound on d_conc(X, point).
    """
    return dist_to_singleton_details(space, restarts, seed, steps).value


# ---------------------------------------------------------------------------
# heuristic d_conc between two uniform spaces


@dataclass
class DconcEstimate:
    value: float
    atoms: int
    assignment: tuple
    evaluations: int
    net_sizes: tuple
    heuristic: bool = True
    sides: tuple = field(default_factory=tuple)


def _uniform_size(space, name):
    if not space.is_uniform:
        raise ParameterError(f"{name} must carry uniform weights")
    return len(space)


def _net(space, dist, budget, rng):
    """Half the most spread-out candidate features, half random McShane extensions."""
    n = len(space)
    w = np.ascontiguousarray(space.weights, dtype=np.float64)
    pool = _seed_features(space, dist, rng, 4 * budget)
    ranked = sorted(range(len(pool)), key=lambda k: (-distance_to_constants(pool[k], w), k))
    out = [pool[k] for k in ranked[: max(1, budget // 2)]]
    diam = float(dist.max())
    while len(out) < budget:
        k = int(rng.integers(1, min(n, 6) + 1))
        anchors = rng.choice(n, size=k, replace=False)
        out.append(mcshane_feature(space, anchors, rng.uniform(0, diam, k)).values.copy())
    return out


def _fiber_start(target, phi, m, how):
    out = np.empty(m)
    for y in range(m):
        vals = target[phi == y]
        out[y] = np.median(vals) if how == "median" else vals.mean()
    return out


def _approach(target, phi, dist, inner, rng):
    """min over g in Lip_1 of me_1(target, g o phi), by constrained local search."""
    m = len(dist)
    if m == 1:
        return distance_to_constants(target)
    best = math.inf
    g_best = None
    for how in ("mean", "median"):
        g = project_lipschitz(_fiber_start(target, phi, m, how), dist)
        val = me1_atoms(target, g[phi])
        if val < best:
            best, g_best = val, g
    if best == 0.0:
        return 0.0
    scale = max(float(dist.max()), 1e-12) * 0.1
    sigma = scale
    g = g_best
    for _ in range(inner):
        cand = project_lipschitz(g + rng.normal(0.0, sigma, m), dist)
        val = me1_atoms(target, cand[phi])
        if val <= best:
            g, best = cand, val
        else:
            sigma *= 0.8
            if sigma < scale * 1e-3:
                sigma = scale
    return best


def _one_sided(net, phi_src, phi_dst, dist_dst, inner, rng):
    return max(_approach(f[phi_src], phi_dst, dist_dst, inner, rng) for f in net)


def _sharpen(net, dist_src, phi_src, phi_dst, dist_dst, inner, steps, seed, keep=3):
    """Ascend the one-sided distance from the worst net features, staying in Lip_1."""

    def score(f):
        return _approach(f[phi_src], phi_dst, dist_dst, inner, np.random.default_rng(seed))

    scored = sorted(((score(f), k) for k, f in enumerate(net)), key=lambda t: (-t[0], t[1]))
    rng = np.random.default_rng(seed + 1)
    scale = 0.25 * max(float(dist_src.max()), 1e-12)
    overall = scored[0][0]
    for val, k in scored[:keep]:
        f, sigma = net[k], scale
        for _ in range(steps):
            cand = project_lipschitz(f + rng.normal(0.0, sigma, len(f)), dist_src)
            c = score(cand)
            if c >= val:
                f, val = cand, c
            else:
                sigma *= 0.85
                if sigma < scale * 1e-3:
                    sigma = scale
        overall = max(overall, val)
    return overall


def dconc_details(a, b, search_budget=60, net_budget=16, seed=0, inner_steps=30, sharpen_steps=60):
    p, q = _uniform_size(a, "a"), _uniform_size(b, "b")
    atoms = p * q // math.gcd(p, q)
    if atoms > DCONC_MAX_ATOMS:
        raise ParameterError(f"lcm of sizes is {atoms}, above the limit {DCONC_MAX_ATOMS}")
    if search_budget < 1 or net_budget < 1:
        raise ParameterError("budgets must be at least 1")
    da = np.ascontiguousarray(a.distance_matrix(), dtype=np.float64)
    db = np.ascontiguousarray(b.distance_matrix(), dtype=np.float64)
    ss_net, ss_search, ss_inner = seed_sequence(seed).spawn(3)
    net_rng = np.random.default_rng(ss_net)
    net_a, net_b = _net(a, da, net_budget, net_rng), _net(b, db, net_budget, net_rng)
    phi = np.repeat(np.arange(p), atoms // p)
    base = np.repeat(np.arange(q), atoms // q)
    inner_seed = ss_inner.generate_state(1)[0]

    def hausdorff(psi):
        # a fixed inner seed makes the objective a function of psi alone
        rng = np.random.default_rng(inner_seed)
        ab = _one_sided(net_a, phi, psi, db, inner_steps, rng)
        ba = _one_sided(net_b, psi, phi, da, inner_steps, rng)
        return max(ab, ba), (ab, ba)

    rng = np.random.default_rng(ss_search)
    best_psi = base.copy()
    best, sides = hausdorff(best_psi)
    evals = 1
    restarts = max(1, int(math.isqrt(search_budget)))
    per_restart = max(1, search_budget // restarts)
    for r in range(restarts):
        if evals >= search_budget or best == 0.0:
            break
        psi = best_psi.copy() if r == 0 else rng.permutation(base)
        cur, cur_sides = hausdorff(psi) if r else (best, sides)
        evals += r > 0
        for _ in range(per_restart):
            if evals >= search_budget:
                break
            i, j = rng.integers(0, atoms, 2)
            if psi[i] == psi[j]:
                continue
            psi[i], psi[j] = psi[j], psi[i]
            val, s = hausdorff(psi)
            evals += 1
            if val <= cur:
                cur, cur_sides = val, s
            else:
                psi[i], psi[j] = psi[j], psi[i]
        if cur < best:
            best, best_psi, sides = cur, psi.copy(), cur_sides
    if sharpen_steps and best > 0.0:
        sides = (
            _sharpen(net_a, da, phi, best_psi, db, inner_steps, sharpen_steps, int(inner_seed)),
            _sharpen(net_b, db, best_psi, phi, da, inner_steps, sharpen_steps, int(inner_seed)),
        )
        best = max(sides)
    return DconcEstimate(best, atoms, tuple(int(x) for x in best_psi), evals, (len(net_a), len(net_b)), True, sides)


def dconc_estimate(a, b, search_budget=60, net_budget=16, seed=0, inner_steps=30, sharpen_steps=60):
    """Heuristic d_conc between two uniform finite spaces; no bound direction.

    Both spaces are cut into lcm(p, q) atoms; ``a`` keeps the canonical
    assignment and the atoms of ``b`` are permuted by swap search with random
    restarts. Each Hausdorff side is the worst, over a McShane net on one
    space, of the best me_1 approximation found on the other. On the final
    assignment the worst net features are pushed further by local ascent.
    """
    return dconc_details(a, b, search_budget, net_budget, seed, inner_steps, sharpen_steps).value
