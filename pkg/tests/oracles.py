"""Slow, independent reference implementations used only by the tests.

None of these import from the package under test, apart from the
``Dendrogram`` container produced by :func:`random_tree`.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from ultrametric.core import Dendrogram, Node

MASK64 = (1 << 64) - 1


def splitmix64_int(seed: int, count: int) -> list:
    """SplitMix64 on Python ints, straight from the reference C code."""
    out = []
    state = seed & MASK64
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return out


def uniform_from_int(z: int) -> float:
    return ((z >> 11) + 0.5) / 2**53


def digits_exact(x: float, precision: int, base: int = 10) -> tuple:
    """Digits of ``x`` at ``precision`` places, round-half-even on the exact binary value."""
    code = round(Fraction(x) * base**precision)
    code = min(code, base**precision - 1)
    out = []
    for _ in range(precision):
        code, r = divmod(code, base)
        out.append(r)
    return tuple(reversed(out))


def euclid(a, b) -> float:
    return math.sqrt(sum((float(u) - float(v)) ** 2 for u, v in zip(a, b)))


def minimax_path_matrix(points) -> np.ndarray:
    """Largest edge on the minimum-spanning-tree path, via Kruskal and DFS."""
    n = len(points)
    edges = sorted((euclid(points[i], points[j]), i, j) for i in range(n) for j in range(i + 1, n))
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            i = parent[i]
        return i

    adj = {i: [] for i in range(n)}
    for w, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            adj[i].append((j, w))
            adj[j].append((i, w))
    out = np.zeros((n, n))
    for s in range(n):
        stack = [(s, -1, 0.0)]
        while stack:
            v, prev, worst = stack.pop()
            out[s, v] = worst
            for u, w in adj[v]:
                if u != prev:
                    stack.append((u, v, max(worst, w)))
    return out


def _linkage(points, a, b, criterion):
    pairs = [euclid(points[i], points[j]) for i in a for j in b]
    if criterion == "single":
        return min(pairs)
    if criterion == "complete":
        return max(pairs)
    if criterion == "average":
        return sum(pairs) / len(pairs)
    if criterion == "ward":
        ca = np.mean([points[i] for i in a], axis=0)
        cb = np.mean([points[i] for i in b], axis=0)
        return math.sqrt(2.0 * len(a) * len(b) / (len(a) + len(b))) * euclid(ca, cb)
    raise ValueError(criterion)


def naive_agglomerate(points, criterion: str) -> list:
    """Merges ``(cluster_a, cluster_b, height)`` by repeatedly joining the closest pair.

    Cluster dissimilarities are recomputed from their definitions at every
    step (no update formula), so this is cubic or worse; keep ``n`` small.
    """
    clusters = [frozenset([i]) for i in range(len(points))]
    merges = []
    while len(clusters) > 1:
        best = None
        for x, y in itertools.combinations(range(len(clusters)), 2):
            h = _linkage(points, sorted(clusters[x]), sorted(clusters[y]), criterion)
            if best is None or h < best[0]:
                best = (h, x, y)
        h, x, y = best
        merges.append((clusters[x], clusters[y], h))
        merged = clusters[x] | clusters[y]
        clusters = [c for k, c in enumerate(clusters) if k not in (x, y)] + [merged]
    return merges


def cophenetic_from_merges(n, merges) -> np.ndarray:
    d = np.zeros((n, n))
    for a, b, h in merges:
        for i in a:
            for j in b:
                d[i, j] = d[j, i] = h
    return d


def best_contiguous_split(values, k):
    """Contiguous ``k``-segmentation minimizing the largest within-segment spread."""
    n = len(values)
    best = None
    for cuts in itertools.combinations(range(1, n), k - 1):
        bounds = (0,) + cuts + (n,)
        cost = max(max(values[a:b]) - min(values[a:b]) for a, b in zip(bounds, bounds[1:]))
        if best is None or cost < best[0]:
            best = (cost, [list(range(a, b)) for a, b in zip(bounds, bounds[1:])])
    return best[1]


def random_tree(n: int, seed: int, heights: str = "increasing") -> Dendrogram:
    """Random ranked binary tree: join two random current clusters per step."""
    rng = np.random.default_rng(seed)
    active = list(range(n))
    hs = np.cumsum(rng.random(n - 1)) if heights == "increasing" else np.arange(1.0, n)
    nodes = []
    for rank in range(1, n):
        i, j = sorted(rng.choice(len(active), 2, replace=False))
        a, b = active[i], active[j]
        if rng.random() < 0.5:
            a, b = b, a
        nodes.append(Node(rank, float(hs[rank - 1]), a, b))
        active = [c for k, c in enumerate(active) if k not in (i, j)] + [n + rank - 1]
    return Dendrogram([f"o{i}" for i in range(n)], nodes)


def lca_rank(tree: Dendrogram, i: int, j: int) -> int:
    up_i = tree.path_to_root(i)
    up_j = set(tree.path_to_root(j))
    return next(r for r in up_i if r in up_j)


def is_contiguous(block) -> bool:
    block = sorted(block)
    return block == list(range(block[0], block[-1] + 1))
