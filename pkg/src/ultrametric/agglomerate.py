"""Agglomerative hierarchical clustering.

Criteria follow the Lance-Williams recurrence::

    d(k, a+b) = alpha_a d(k, a) + alpha_b d(k, b) + beta d(a, b) + gamma |d(k, a) - d(k, b)|

with the usual coefficients for single, complete, average, Ward and
median linkage.  Ward and median operate on squared Euclidean
dissimilarities internally; their reported heights are square roots of the
merge costs, so the input is always plain (unsquared) distances.

Reducible criteria (single, complete, average, Ward) run the
nearest-neighbour chain algorithm and the merges are then ordered by
height.  Median is not reducible and can produce inversions, so it runs
the stepwise global-minimum algorithm and keeps merge order as rank order.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist, squareform

from . import kernels
from .core import Dendrogram, Node, as_distance_matrix
from .errors import PreconditionError, TooFewObjectsError

CRITERIA = ("single", "complete", "average", "ward", "median")
REDUCIBLE = frozenset({"single", "complete", "average", "ward"})
SQUARED = frozenset({"ward", "median"})


def _condensed(data, precomputed):
    if precomputed:
        arr = np.asarray(data, dtype=float)
        if arr.ndim == 1:
            n = int(round((1 + np.sqrt(1 + 8 * arr.size)) / 2))
            if n * (n - 1) // 2 != arr.size:
                raise PreconditionError(f"condensed vector of length {arr.size} is not triangular")
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise PreconditionError("dissimilarities must be finite and nonnegative")
            return arr.copy(), n
        d = as_distance_matrix(arr, name="distance matrix")
        return squareform(d, checks=False), d.shape[0]
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise PreconditionError(f"observation matrix must be 2-D, got {x.ndim}-D")
    if not np.all(np.isfinite(x)):
        raise PreconditionError("observation matrix contains missing or non-finite values")
    return pdist(x), x.shape[0]


def _labels(labels, n):
    if labels is None:
        return [str(i) for i in range(n)]
    labels = list(labels)
    if len(labels) != n:
        raise PreconditionError(f"{len(labels)} labels for {n} objects")
    return labels


def _order_merges(pairs, heights):
    """Stable sort by height, with children never placed after parents."""
    n = len(pairs) + 1
    parent = list(range(n))
    top = [0.0] * n

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    fixed = np.empty(len(heights))
    for s, (a, b) in enumerate(pairs):
        ra, rb = find(int(a)), find(int(b))
        h = max(float(heights[s]), top[ra], top[rb])
        fixed[s] = h
        parent[rb] = ra
        top[ra] = h
    order = np.argsort(fixed, kind="stable")
    return pairs[order], fixed[order]


def cluster(data, criterion: str = "complete", *, precomputed: bool = False, labels=None,
            algorithm: str = "auto", backend: str | None = None) -> Dendrogram:
    """Agglomerative clustering of observations or a dissimilarity matrix.

    Parameters
    ----------
    data : array_like
        ``(n, m)`` observations (Euclidean distances are computed), or with
        ``precomputed=True`` a square dissimilarity matrix or condensed vector.
    criterion : {"single", "complete", "average", "ward", "median"}
    algorithm : {"auto", "nn_chain", "stepwise"}
        ``auto`` selects NN-chain for reducible criteria, stepwise for median.
        NN-chain is refused for median.
    backend : {"cython", "python"}, optional
        Kernel implementation; default is the compiled one when built.

    Returns
    -------
    Dendrogram
        Left child of each node is the child with the smaller reference.
        ``metadata`` records the criterion, algorithm and whether inversions
        occurred.
    """
    if criterion not in CRITERIA:
        raise PreconditionError(f"unknown criterion {criterion!r}; choose from {CRITERIA}")
    dist, n = _condensed(data, precomputed)
    if n < 2:
        raise TooFewObjectsError(f"clustering needs at least 2 objects, got {n}")
    names = _labels(labels, n)
    if algorithm == "auto":
        algorithm = "nn_chain" if criterion in REDUCIBLE else "stepwise"
    if algorithm == "nn_chain" and criterion not in REDUCIBLE:
        raise PreconditionError(f"the {criterion} criterion is not reducible; use algorithm='stepwise'")
    if algorithm not in ("nn_chain", "stepwise"):
        raise PreconditionError(f"unknown algorithm {algorithm!r}")

    impl = kernels.get_backend(backend)
    if criterion in SQUARED:
        dist = dist * dist
    run = impl.nn_chain if algorithm == "nn_chain" else impl.stepwise
    pairs, heights = run(dist, n, kernels.METHOD_CODES[criterion])
    if criterion in SQUARED:
        heights = np.sqrt(np.maximum(heights, 0.0))
    if criterion in REDUCIBLE:
        pairs, heights = _order_merges(pairs, heights)
    merges = [(int(a), int(b), float(h)) for (a, b), h in zip(pairs, heights)]
    meta = {"criterion": criterion, "algorithm": algorithm, "inversions": criterion not in REDUCIBLE}
    tree = Dendrogram.from_merges(names, merges, meta)
    if criterion not in REDUCIBLE:
        tree.metadata["inversions"] = tree.has_inversions
    return tree


def constrained_cluster(seq, *, precomputed: bool = False, labels=None,
                        backend: str | None = None) -> Dendrogram:
    """Contiguity-constrained complete-link clustering of an ordered sequence.

    Only clusters adjacent in the input order may merge; the merge cost is
    the largest pairwise dissimilarity between them.  Every cut of the
    result consists of contiguous runs, and heights never decrease with
    rank.  Ties go to the leftmost adjacent pair.  The left child of every
    node is the earlier segment.
    """
    dist, n = _condensed(seq, precomputed)
    if n < 2:
        raise TooFewObjectsError(f"clustering needs at least 2 objects, got {n}")
    names = _labels(labels, n)
    impl = kernels.get_backend(backend)
    pairs, heights = impl.constrained_complete(dist, n)

    ref = list(range(n))
    nodes = []
    for rank, ((a, b), h) in enumerate(zip(pairs, heights), start=1):
        a, b = int(a), int(b)
        nodes.append(Node(rank, float(h), ref[a], ref[b]))
        ref[a] = n + rank - 1
    return Dendrogram(names, nodes, {"criterion": "complete", "constrained": True, "inversions": False})


def cut_labels(h: Dendrogram, k: int) -> np.ndarray:
    """Block id per terminal for the ``k``-cluster partition (ids by first member)."""
    n = h.n_terminals
    if not 1 <= k <= n:
        raise PreconditionError(f"cluster count must be in 1..{n}, got {k}")
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for nd in h.nodes[: n - k]:
        a = find(h.members(nd.left)[0])
        b = find(h.members(nd.right)[0])
        parent[max(a, b)] = min(a, b)
    roots = [find(i) for i in range(n)]
    ids = {r: i for i, r in enumerate(sorted(set(roots)))}
    return np.array([ids[r] for r in roots])


def cut(h: Dendrogram, k: int) -> list:
    """Partition into ``k`` blocks by removing the ``k - 1`` highest-rank nodes.

    Blocks are lists of terminal indices, ordered by their smallest member.
    """
    lab = cut_labels(h, k)
    return [[int(i) for i in np.flatnonzero(lab == b)] for b in range(k)]
