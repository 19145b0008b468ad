"""Pure-Python/numpy agglomeration kernels.

Mirror of ``_kernels.pyx``; used when the compiled module is unavailable
or when ``ULTRAMETRIC_PURE_PYTHON=1``.  All kernels take a condensed
dissimilarity vector (``scipy.spatial.distance.pdist`` layout) and return
``(pairs, heights)``: ``pairs[s] = (a, b)`` with ``a < b`` the slot
indices merged at step ``s`` (a slot is the smallest terminal index of its
cluster; for the constrained kernel, the leftmost position), and
``heights[s]`` the raw merge dissimilarity.

Ties are broken identically in both implementations: the nearest-neighbour
chain prefers its previous element, otherwise the smallest slot; global
minimum searches take the lexicographically smallest ``(a, b)``.
"""
import numpy as np

SINGLE, COMPLETE, AVERAGE, WARD, MEDIAN = range(5)


def _square(dist, n):
    d = np.full((n, n), np.inf)
    iu = np.triu_indices(n, 1)
    d[iu] = dist
    d.T[iu] = dist
    return d


def _lance_williams(dka, dkb, dab, na, nb, nk, method):
    if method == SINGLE:
        return np.minimum(dka, dkb)
    if method == COMPLETE:
        return np.maximum(dka, dkb)
    if method == AVERAGE:
        return (na * dka + nb * dkb) / (na + nb)
    if method == WARD:
        t = na + nb + nk
        return ((na + nk) * dka + (nb + nk) * dkb - nk * dab) / t
    if method == MEDIAN:
        return 0.5 * dka + 0.5 * dkb - 0.25 * dab
    raise ValueError(f"unknown method code {method}")


def _merge(d, size, active, a, b, method):
    others = np.flatnonzero(active)
    others = others[(others != a) & (others != b)]
    if others.size:
        new = _lance_williams(d[a, others], d[b, others], d[a, b], size[a], size[b], size[others], method)
        d[a, others] = new
        d[others, a] = new
    d[b, :] = np.inf
    d[:, b] = np.inf
    active[b] = False
    size[a] += size[b]


def nn_chain(dist, n, method):
    d = _square(np.asarray(dist, dtype=float), n)
    size = np.ones(n)
    active = np.ones(n, dtype=bool)
    pairs = np.empty((n - 1, 2), dtype=np.int64)
    heights = np.empty(n - 1)
    chain = []
    for step in range(n - 1):
        if not chain:
            chain.append(int(np.flatnonzero(active)[0]))
        while True:
            x = chain[-1]
            row = d[x]
            y = int(np.argmin(row))
            if len(chain) > 1:
                prev = chain[-2]
                if row[prev] <= row[y]:
                    y = prev
                if y == prev:
                    break
            chain.append(y)
        chain.pop()
        chain.pop()
        a, b = min(x, y), max(x, y)
        pairs[step] = a, b
        heights[step] = d[a, b]
        _merge(d, size, active, a, b, method)
    return pairs, heights


def stepwise(dist, n, method):
    d = _square(np.asarray(dist, dtype=float), n)
    size = np.ones(n)
    active = np.ones(n, dtype=bool)
    pairs = np.empty((n - 1, 2), dtype=np.int64)
    heights = np.empty(n - 1)
    for step in range(n - 1):
        flat = int(np.argmin(d))
        a, b = divmod(flat, n)
        pairs[step] = a, b
        heights[step] = d[a, b]
        _merge(d, size, active, a, b, method)
    return pairs, heights


def constrained_complete(dist, n):
    d = _square(np.asarray(dist, dtype=float), n)
    nxt = np.arange(1, n + 1)
    nxt[-1] = -1
    prv = np.arange(-1, n - 1)
    active = np.ones(n, dtype=bool)
    pairs = np.empty((n - 1, 2), dtype=np.int64)
    heights = np.empty(n - 1)
    for step in range(n - 1):
        best, a = np.inf, -1
        s = 0
        while s != -1:
            t = nxt[s]
            if t != -1 and d[s, t] < best:
                best, a = d[s, t], s
            s = t
        b = int(nxt[a])
        pairs[step] = a, b
        heights[step] = best
        others = np.flatnonzero(active)
        others = others[(others != a) & (others != b)]
        new = np.maximum(d[a, others], d[b, others])
        d[a, others] = new
        d[others, a] = new
        d[b, :] = np.inf
        d[:, b] = np.inf
        active[b] = False
        nxt[a] = nxt[b]
        if nxt[b] != -1:
            prv[nxt[b]] = a
    return pairs, heights
