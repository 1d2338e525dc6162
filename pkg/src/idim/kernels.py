"""Hot inner loops, each with a numba and a pure-numpy implementation.

Both paths perform the same floating point operations in the same order so
they agree bitwise; ``tests/test_kernels.py`` checks this. The public names at
the bottom of the module are bound to whichever backend ``_backend`` selected.
"""

import numpy as np

from ._backend import USE_NUMBA, njit

# subset measures are read from two 12-bit lookup tables
SPLIT_BITS = 12
SPLIT_MASK = (1 << SPLIT_BITS) - 1


def split_tables(weights):
    """Lookup tables so that mu(mask) = lo[mask & 4095] + hi[mask >> 12]."""
    w = np.asarray(weights, dtype=np.float64)
    n = len(w)
    lo = np.zeros(1 << SPLIT_BITS)
    hi = np.zeros(1 << SPLIT_BITS)
    idx = np.arange(1 << SPLIT_BITS)
    for b in range(min(n, SPLIT_BITS)):
        lo += np.where((idx >> b) & 1, w[b], 0.0)
    for b in range(SPLIT_BITS, n):
        hi += np.where((idx >> (b - SPLIT_BITS)) & 1, w[b], 0.0)
    return lo, hi


# --------------------------------------------------------------------------
# exhaustive subset oracle: min mu(A_eps) over A with mu(A) >= 1/2


@njit(cache=True)
def _subset_min_reach_nb(nbr, w_lo, w_hi, half):
    n_thr, n = nbr.shape
    size = 1 << n
    out = np.empty(n_thr)
    reach = np.zeros(size, dtype=np.uint32)
    for r in range(n_thr):
        best = 2.0
        for b in range(n):
            base = 1 << b
            row = nbr[r, b]
            for a in range(base, 2 * base):
                m = reach[a - base] | row
                reach[a] = m
                mu_a = w_lo[a & SPLIT_MASK] + w_hi[a >> SPLIT_BITS]
                if mu_a >= half:
                    mu_m = w_lo[m & SPLIT_MASK] + w_hi[m >> SPLIT_BITS]
                    if mu_m < best:
                        best = mu_m
        out[r] = best
    return out


def _subset_min_reach_np(nbr, w_lo, w_hi, half):
    n_thr, n = nbr.shape
    size = 1 << n
    idx = np.arange(size, dtype=np.int64)
    mu_sets = w_lo[idx & SPLIT_MASK] + w_hi[idx >> SPLIT_BITS]
    eligible = mu_sets >= half
    eligible[0] = False
    del idx, mu_sets
    out = np.empty(n_thr)
    reach = np.zeros(size, dtype=np.uint32)
    for r in range(n_thr):
        for b in range(n):
            base = 1 << b
            np.bitwise_or(reach[:base], nbr[r, b], out=reach[base : 2 * base])
        mu_reach = w_lo[reach & SPLIT_MASK] + w_hi[reach >> SPLIT_BITS]
        out[r] = mu_reach[eligible].min() if eligible.any() else 2.0
    return out


# --------------------------------------------------------------------------
# me_1 between two functions given as deviation levels with masses


@njit(cache=True)
def _me1_levels_nb(dev, mass):
    order = np.argsort(dev, kind="mergesort")
    d = dev[order]
    p = mass[order]
    m = len(d)
    suffix = np.zeros(m + 1)
    for k in range(m - 1, -1, -1):
        suffix[k] = suffix[k + 1] + p[k]
    i = 0
    while i < m and d[i] <= 0.0:
        i += 1
    a = 0.0
    while True:
        c = suffix[i]
        b = np.inf if i == m else d[i]
        if b > c:
            return max(a, c)
        a = b
        while i < m and d[i] == a:
            i += 1


def _me1_levels_np(dev, mass):
    order = np.argsort(dev, kind="mergesort")
    d = dev[order]
    p = mass[order]
    m = len(d)
    suffix = np.zeros(m + 1)
    acc = 0.0
    for k in range(m - 1, -1, -1):
        acc = acc + p[k]
        suffix[k] = acc
    levels = np.unique(d[d > 0.0])
    # interval k is [a_k, b_k) with G constant = mass{dev > a_k}
    a = np.concatenate(([0.0], levels))
    b = np.concatenate((levels, [np.inf]))
    pos = np.searchsorted(d, a, side="right")
    c = suffix[pos]
    k = int(np.argmax(b > c))
    return max(a[k], c[k])


# --------------------------------------------------------------------------
# inf over constants c of me_1(f, c): first eps where the best closed window
# of half-width eps holds mass > 1 - eps


@njit(cache=True)
def _window_mass_nb(u, prefix, width):
    m = len(u)
    best = 0.0
    j = 0
    for i in range(m):
        if j < i:
            j = i
        while j + 1 < m and u[j + 1] - u[i] <= width:
            j += 1
        mass = prefix[j + 1] - prefix[i]
        if mass > best:
            best = mass
    return best


@njit(cache=True)
def _me1_to_constants_nb(values, weights):
    order = np.argsort(values, kind="mergesort")
    v = values[order]
    w = weights[order]
    tot = 0.0
    for k in range(len(w)):
        tot += w[k]
    # merge equal values
    u = np.empty(len(v))
    p = np.empty(len(v))
    m = 0
    for k in range(len(v)):
        if m > 0 and v[k] == u[m - 1]:
            p[m - 1] += w[k] / tot
        else:
            u[m] = v[k]
            p[m] = w[k] / tot
            m += 1
    u = u[:m]
    prefix = np.zeros(m + 1)
    for k in range(m):
        prefix[k + 1] = prefix[k] + p[k]
    gaps = np.empty(m * (m + 1) // 2)
    g = 0
    for i in range(m):
        for j in range(i, m):
            gaps[g] = u[j] - u[i]
            g += 1
    gaps = np.unique(gaps)
    lo, hi = 0, len(gaps) - 1
    # first k with gaps[k+1]/2 > 1 - W(gaps[k]); monotone in k
    while lo < hi:
        mid = (lo + hi) // 2
        need = 1.0 - _window_mass_nb(u, prefix, gaps[mid])
        if gaps[mid + 1] / 2.0 > need:
            hi = mid
        else:
            lo = mid + 1
    need = 1.0 - _window_mass_nb(u, prefix, gaps[lo])
    return max(gaps[lo] / 2.0, need)


def _window_mass_np(u, prefix, diff, width):
    counts = (diff <= width).sum(axis=1)
    i = np.arange(len(u))
    return float((prefix[i + counts] - prefix[i]).max())


def _me1_to_constants_np(values, weights):
    order = np.argsort(values, kind="mergesort")
    v = values[order]
    w = weights[order]
    tot = 0.0
    for x in w:
        tot += x
    u, inverse = np.unique(v, return_inverse=True)
    p = np.zeros(len(u))
    for k in range(len(v)):
        p[inverse[k]] += w[k] / tot
    prefix = np.zeros(len(u) + 1)
    acc = 0.0
    for k in range(len(u)):
        acc = acc + p[k]
        prefix[k + 1] = acc
    diff = u[None, :] - u[:, None]
    upper = np.triu(np.ones((len(u), len(u)), dtype=bool))
    gaps = np.unique(diff[upper])
    # entries below the diagonal are negative and would be counted as inside
    diff = np.where(upper, diff, np.inf)
    lo, hi = 0, len(gaps) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        need = 1.0 - _window_mass_np(u, prefix, diff, gaps[mid])
        if gaps[mid + 1] / 2.0 > need:
            hi = mid
        else:
            lo = mid + 1
    need = 1.0 - _window_mass_np(u, prefix, diff, gaps[lo])
    return max(gaps[lo] / 2.0, need)


# --------------------------------------------------------------------------
# Lipschitz polytope: split violations, then close with an inf-convolution


@njit(cache=True)
def _lipschitz_project_nb(f, dist, sweeps, tol):
    n = len(f)
    f = f.copy()
    for _ in range(sweeps):
        down = np.zeros(n)
        up = np.zeros(n)
        worst = 0.0
        for i in range(n):
            for j in range(n):
                v = f[i] - f[j] - dist[i, j]
                if v > worst:
                    worst = v
                if v > down[i]:
                    down[i] = v
                if v > up[j]:
                    up[j] = v
        if worst <= tol:
            break
        for i in range(n):
            f[i] = f[i] - down[i] / 2.0 + up[i] / 2.0
    out = np.empty(n)
    for i in range(n):
        best = np.inf
        for j in range(n):
            c = f[j] + dist[i, j]
            if c < best:
                best = c
        out[i] = best
    return out


def _lipschitz_project_np(f, dist, sweeps, tol):
    f = np.array(f, dtype=np.float64)
    for _ in range(sweeps):
        viol = f[:, None] - f[None, :] - dist
        worst = max(0.0, float(viol.max()))
        if worst <= tol:
            break
        down = np.maximum(viol.max(axis=1), 0.0)
        up = np.maximum(viol.max(axis=0), 0.0)
        f = f - down / 2.0 + up / 2.0
    return (f[None, :] + dist).min(axis=1)


IMPLEMENTATIONS = {
    "numba": {
        "subset_min_reach": _subset_min_reach_nb,
        "me1_levels": _me1_levels_nb,
        "me1_to_constants": _me1_to_constants_nb,
        "lipschitz_project": _lipschitz_project_nb,
    },
    "numpy": {
        "subset_min_reach": _subset_min_reach_np,
        "me1_levels": _me1_levels_np,
        "me1_to_constants": _me1_to_constants_np,
        "lipschitz_project": _lipschitz_project_np,
    },
}

_active = IMPLEMENTATIONS["numba" if USE_NUMBA else "numpy"]
subset_min_reach = _active["subset_min_reach"]
me1_levels = _active["me1_levels"]
me1_to_constants = _active["me1_to_constants"]
lipschitz_project = _active["lipschitz_project"]
