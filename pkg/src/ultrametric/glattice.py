"""Set-valued distances between boolean objects.

For two 0/1 rows, attribute ``j`` belongs to their distance unless both
rows have a 1 there.  Distances are therefore subsets of the attribute set,
ordered by inclusion.  A cluster at level ``l`` is a maximal group of
objects whose pairwise distances all have at most ``l`` attributes; such
clusters may overlap.

Attributes are numbered from 1 in the returned sets.  The distance of a
row to itself contains every attribute where that row is 0, so it is only
empty for the all-ones row.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IncompatibleError, PreconditionError

MAX_OBJECTS = 64


@dataclass(frozen=True, eq=False)
class BooleanTable:
    values: np.ndarray
    objects: tuple = ()
    attributes: tuple = ()

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[1] == 0:
            raise PreconditionError(f"boolean table must be 2-D with at least one attribute, got shape {v.shape}")
        if not np.isin(v, (0, 1)).all():
            bad = tuple(int(k) for k in np.argwhere(~np.isin(v, (0, 1)))[0])
            raise PreconditionError(f"entry at (row {bad[0]}, column {bad[1]}) is not 0 or 1")
        v = v.astype(bool)
        v.setflags(write=False)
        objects = tuple(self.objects) or tuple(str(i) for i in range(v.shape[0]))
        attributes = tuple(self.attributes) or tuple(f"d{j}" for j in range(1, v.shape[1] + 1))
        if len(objects) != v.shape[0] or len(attributes) != v.shape[1]:
            raise PreconditionError("object/attribute labels do not match the table shape")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "objects", objects)
        object.__setattr__(self, "attributes", attributes)

    @property
    def n_objects(self) -> int:
        return self.values.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.values.shape[1]


def set_distance(a, b) -> frozenset:
    """1-based indices of the attributes where ``a`` and ``b`` are not both 1.

    >>> sorted(set_distance((1, 0, 1), (0, 1, 1)))
    [1, 2]
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise IncompatibleError(f"rows differ in length ({a.shape} vs {b.shape})")
    for row in (a, b):
        if not np.isin(row, (0, 1)).all():
            raise PreconditionError("rows must contain only 0 and 1")
    both = a.astype(bool) & b.astype(bool)
    return frozenset(int(j) + 1 for j in np.flatnonzero(~both))


def distance_sizes(t: BooleanTable) -> np.ndarray:
    """``|set_distance(i, j)|`` for every pair, as an integer matrix."""
    v = t.values.astype(np.int64)
    return t.n_attributes - v @ v.T


def _bron_kerbosch(adj: list, n: int) -> list:
    """Maximal cliques as bitmasks (pivoting variant)."""
    out = []

    def expand(r, p, x):
        if not p and not x:
            out.append(r)
            return
        # pivot on the vertex of p|x with the most neighbours in p
        pu = p | x
        best, pivot = -1, 0
        while pu:
            low = pu & -pu
            u = low.bit_length() - 1
            cnt = bin(p & adj[u]).count("1")
            if cnt > best:
                best, pivot = cnt, u
            pu ^= low
        cand = p & ~adj[pivot]
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            expand(r | low, p & adj[v], x & adj[v])
            p &= ~low
            x |= low
            cand ^= low

    expand(0, (1 << n) - 1, 0)
    return out


def clusters_at_level(t: BooleanTable, level: int) -> list:
    """Maximal clusters whose pairwise distances have at most ``level`` attributes.

    Returns a list of frozensets of object indices, sorted by their sorted
    member lists.  Overlapping clusters are kept.
    """
    if not isinstance(t, BooleanTable):
        t = BooleanTable(t)
    if not 0 <= level <= t.n_attributes:
        raise PreconditionError(f"level must be in 0..{t.n_attributes}, got {level}")
    n = t.n_objects
    if n > MAX_OBJECTS:
        raise PreconditionError(
            f"exact clique enumeration is limited to {MAX_OBJECTS} objects, got {n}"
        )
    if n == 0:
        return []
    linked = distance_sizes(t) <= level
    adj = []
    for i in range(n):
        mask = 0
        for j in np.flatnonzero(linked[i]):
            if j != i:
                mask |= 1 << int(j)
        adj.append(mask)
    cliques = [frozenset(i for i in range(n) if m >> i & 1) for m in _bron_kerbosch(adj, n)]
    return sorted(cliques, key=lambda c: sorted(c))


def cluster_labels(t: BooleanTable, clusters) -> list:
    return [[t.objects[i] for i in sorted(c)] for c in clusters]
