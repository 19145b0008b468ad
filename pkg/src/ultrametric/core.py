"""Dendrograms, dissimilarity matrices and ultrametric checks.

A dendrogram on ``n`` terminals is stored as ``n - 1`` ranked binary merge
nodes.  Children are referenced by integer: ``0 .. n-1`` are terminals and
``n + rank - 1`` is the internal node of that rank (the numbering used by
``scipy.cluster.hierarchy``).  Ranks give a total order on the nodes; a
node's children always carry smaller ranks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import InvalidDendrogramError, InvalidMatrixError, NotUltrametricError

DEFAULT_RTOL = 1e-9


@dataclass(frozen=True)
class Node:
    rank: int
    height: float
    left: int
    right: int


@dataclass(frozen=True)
class Dendrogram:
    """Binary rooted node-ranked tree.

    Parameters
    ----------
    terminals : sequence of str
        Object labels, in terminal-index order.
    nodes : sequence of Node
        Exactly ``len(terminals) - 1`` merge nodes; any order, they are
        sorted by rank.
    metadata : mapping, optional
        Free-form annotations.  ``metadata["inversions"] = True`` relaxes
        the rule that heights never decrease towards the root (needed for
        the median criterion).
    """

    terminals: tuple
    nodes: tuple
    metadata: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "terminals", tuple(str(t) for t in self.terminals))
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes, key=lambda nd: nd.rank)))
        object.__setattr__(self, "metadata", dict(self.metadata))
        self._validate()

    def _validate(self):
        n = len(self.terminals)
        if n < 1:
            raise InvalidDendrogramError("a dendrogram needs at least one terminal")
        if len(self.nodes) != n - 1:
            raise InvalidDendrogramError(f"expected {n - 1} internal nodes, got {len(self.nodes)}")
        if [nd.rank for nd in self.nodes] != list(range(1, n)):
            raise InvalidDendrogramError("node ranks must be a permutation of 1..n-1")
        used = set()
        heights = {}
        allow_inv = bool(self.metadata.get("inversions", False))
        for nd in self.nodes:
            h = float(nd.height)
            if not np.isfinite(h) or h < 0:
                raise InvalidDendrogramError(f"node {nd.rank} has invalid height {nd.height!r}")
            for child in (nd.left, nd.right):
                if not 0 <= child < n + nd.rank - 1:
                    raise InvalidDendrogramError(
                        f"node {nd.rank} references {self.ref_name(child)}, which is not below it"
                    )
                if child in used:
                    raise InvalidDendrogramError(f"{self.ref_name(child)} has two parents")
                used.add(child)
                if child >= n and not allow_inv and heights[child] > h:
                    raise InvalidDendrogramError(
                        f"inversion: node {nd.rank} (height {h}) lies below its child "
                        f"{self.ref_name(child)} (height {heights[child]})"
                    )
            heights[n + nd.rank - 1] = h

    # -- references -------------------------------------------------------

    @property
    def n_terminals(self) -> int:
        return len(self.terminals)

    @property
    def root(self) -> int:
        return 2 * self.n_terminals - 2

    def is_terminal(self, ref: int) -> bool:
        return ref < self.n_terminals

    def node_ref(self, rank: int) -> int:
        return self.n_terminals + rank - 1

    def node(self, rank: int) -> Node:
        return self.nodes[rank - 1]

    def ref_name(self, ref: int) -> str:
        n = len(self.terminals)
        return f"t:{ref}" if ref < n else f"n:{ref - n + 1}"

    def children(self, ref: int) -> tuple[int, int]:
        nd = self.nodes[ref - self.n_terminals]
        return nd.left, nd.right

    def height_of(self, ref: int) -> float:
        return 0.0 if ref < self.n_terminals else float(self.nodes[ref - self.n_terminals].height)

    # -- derived structure ------------------------------------------------

    @cached_property
    def _members(self) -> tuple:
        n = self.n_terminals
        members = [(i,) for i in range(n)]
        for nd in self.nodes:
            members.append(tuple(sorted(members[nd.left] + members[nd.right])))
        return tuple(members)

    def members(self, ref: int) -> tuple:
        """Sorted terminal indices below ``ref``."""
        return self._members[ref]

    @property
    def heights(self) -> np.ndarray:
        return np.array([nd.height for nd in self.nodes], dtype=float)

    @property
    def has_inversions(self) -> bool:
        n = self.n_terminals
        return any(
            child >= n and self.nodes[child - n].height > nd.height
            for nd in self.nodes
            for child in (nd.left, nd.right)
        )

    def clusters(self) -> dict:
        """Map rank -> frozenset of terminal indices."""
        return {nd.rank: frozenset(self.members(self.node_ref(nd.rank))) for nd in self.nodes}

    def structure(self) -> frozenset:
        """Topology plus ranks, ignoring heights, labels and child order."""
        return frozenset(self.clusters().items())

    def parents(self) -> dict:
        """Map child ref -> parent ref."""
        out = {}
        for nd in self.nodes:
            ref = self.node_ref(nd.rank)
            out[nd.left] = ref
            out[nd.right] = ref
        return out

    def path_to_root(self, terminal: int) -> list:
        """Ranks of the nodes above ``terminal``, bottom up."""
        parent = self.parents()
        ranks = []
        ref = terminal
        while ref in parent:
            ref = parent[ref]
            ranks.append(ref - self.n_terminals + 1)
        return ranks

    def leaf_order(self) -> list:
        """Terminal indices in left-to-right drawing order."""
        if self.n_terminals == 1:
            return [0]
        order, stack = [], [self.root]
        while stack:
            ref = stack.pop()
            if self.is_terminal(ref):
                order.append(ref)
            else:
                left, right = self.children(ref)
                stack.append(right)
                stack.append(left)
        return order

    # -- transformations --------------------------------------------------

    def swap_children(self, rank: int) -> "Dendrogram":
        nodes = list(self.nodes)
        nd = nodes[rank - 1]
        nodes[rank - 1] = Node(nd.rank, nd.height, nd.right, nd.left)
        return Dendrogram(self.terminals, nodes, self.metadata)

    def with_heights(self, heights: Sequence[float]) -> "Dendrogram":
        nodes = [Node(nd.rank, float(h), nd.left, nd.right) for nd, h in zip(self.nodes, heights)]
        return Dendrogram(self.terminals, nodes, self.metadata)

    def to_linkage(self) -> np.ndarray:
        """``(n-1, 4)`` array in ``scipy.cluster.hierarchy`` layout."""
        z = np.empty((self.n_terminals - 1, 4))
        for i, nd in enumerate(self.nodes):
            z[i] = nd.left, nd.right, nd.height, len(self.members(self.node_ref(nd.rank)))
        return z

    @classmethod
    def from_linkage(cls, z, terminals=None, metadata=None) -> "Dendrogram":
        z = np.asarray(z, dtype=float)
        n = z.shape[0] + 1
        if terminals is None:
            terminals = [str(i) for i in range(n)]
        nodes = [Node(r + 1, float(row[2]), int(row[0]), int(row[1])) for r, row in enumerate(z)]
        return cls(terminals, nodes, metadata or {})

    @classmethod
    def from_merges(cls, terminals, merges, metadata=None) -> "Dendrogram":
        """Build from ``(a, b, height)`` merges given as terminal representatives.

        ``a`` and ``b`` may be any terminal inside each of the two clusters
        being joined; merges must be listed in rank order.  The child with the
        smaller reference becomes the left child.
        """
        n = len(terminals)
        parent = list(range(n))
        cluster_ref = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        nodes = []
        for rank, (a, b, h) in enumerate(merges, start=1):
            ra, rb = find(int(a)), find(int(b))
            if ra == rb:
                raise InvalidDendrogramError(f"merge {rank} joins a cluster with itself")
            ca, cb = cluster_ref[ra], cluster_ref[rb]
            nodes.append(Node(rank, float(h), min(ca, cb), max(ca, cb)))
            parent[rb] = ra
            cluster_ref[ra] = n + rank - 1
        return cls(terminals, nodes, metadata or {})


class UltrametricCheck(NamedTuple):
    ok: bool
    witness: tuple | None

    def __bool__(self):
        return self.ok


def as_distance_matrix(m, *, name: str = "matrix") -> np.ndarray:
    """Validate and return a square symmetric nonnegative zero-diagonal array."""
    d = np.asarray(m, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise InvalidMatrixError(f"{name} must be square, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise InvalidMatrixError(f"{name} contains non-finite entries")
    if np.any(d < 0):
        i, j = np.argwhere(d < 0)[0]
        raise InvalidMatrixError(f"{name} has negative entry at ({i}, {j})")
    if np.any(np.diag(d) != 0):
        i = int(np.flatnonzero(np.diag(d) != 0)[0])
        raise InvalidMatrixError(f"{name} has nonzero diagonal at {i}")
    if not np.array_equal(d, d.T):
        i, j = np.argwhere(d != d.T)[0]
        raise InvalidMatrixError(f"{name} is not symmetric at ({i}, {j})")
    return d


def _default_tol(d: np.ndarray, tol):
    if tol is None:
        return DEFAULT_RTOL * (float(d.max()) if d.size else 0.0)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return float(tol)


def verify_ultrametric(m, tol: float | None = None) -> UltrametricCheck:
    """Check the strong triangle inequality on every triple.

    ``tol`` is absolute; by default it is ``1e-9`` times the largest entry.
    On failure the witness is the lexicographically smallest triple
    ``(i, j, k)`` with ``d(i, k) > max(d(i, j), d(j, k)) + tol``.
    """
    d = as_distance_matrix(m)
    tol = _default_tol(d, tol)
    best = None
    for j in range(d.shape[0]):
        bound = np.maximum.outer(d[:, j], d[j, :]) + tol
        bad = np.argwhere(d > bound)
        if bad.size:
            i, k = bad[0]
            cand = (int(i), j, int(k))
            if best is None or cand < best:
                best = cand
    return UltrametricCheck(best is None, best)


def cophenetic(h: Dendrogram) -> np.ndarray:
    """Height of the lowest common node for every pair of terminals."""
    n = h.n_terminals
    d = np.zeros((n, n))
    for nd in h.nodes:
        left = list(h.members(nd.left))
        right = list(h.members(nd.right))
        d[np.ix_(left, right)] = nd.height
        d[np.ix_(right, left)] = nd.height
    return d


def ultrametric_order(m, tol: float | None = None) -> list:
    """Permutation putting an ultrametric matrix into its canonical block form.

    Rows of the permuted matrix are non-decreasing to the right of the
    diagonal.  The order is the leaf order of the single-link dendrogram.
    """
    d = as_distance_matrix(m)
    check = verify_ultrametric(d, tol)
    if not check:
        raise NotUltrametricError(f"matrix is not ultrametric; violating triple {check.witness}")
    if d.shape[0] == 1 or is_ultrametric_form(d, _default_tol(d, tol)):
        return list(range(d.shape[0]))
    from .agglomerate import cluster

    return cluster(d, "single", precomputed=True).leaf_order()


def is_ultrametric_form(m, tol: float = 0.0) -> bool:
    """Test the row-ordered block form of an ultrametric matrix as given.

    Condition 1: each row is non-decreasing right of the diagonal.
    Condition 2: if row ``k`` opens with a run ``d(k, k+1) = ... =
    d(k, k+l+1)``, then row ``k+1`` is no larger than row ``k`` inside the
    run and equal to it beyond the run.
    """
    d = np.asarray(m, dtype=float)
    n = d.shape[0]
    for k in range(n):
        row = d[k, k + 1:]
        if np.any(np.diff(row) < -tol):
            return False
    for k in range(n - 2):
        first = d[k, k + 1]
        run_end = k + 1
        while run_end + 1 < n and abs(d[k, run_end + 1] - first) <= tol:
            run_end += 1
        for j in range(k + 2, n):
            if j <= run_end:
                if d[k + 1, j] > d[k, j] + tol:
                    return False
            elif abs(d[k + 1, j] - d[k, j]) > tol:
                return False
    return True


def pairwise_euclidean(x) -> np.ndarray:
    """Square Euclidean distance matrix of the rows of ``x``."""
    from scipy.spatial.distance import pdist, squareform

    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return squareform(pdist(x))


def permute(m, order: Iterable[int]) -> np.ndarray:
    order = list(order)
    d = np.asarray(m)
    return d[np.ix_(order, order)]
