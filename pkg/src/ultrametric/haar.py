"""Haar wavelet transform over a dendrogram.

Every terminal starts with its data row as its smooth.  Working up the
ranks, a node with child smooths ``f+`` and ``f-`` gets

    s = (f+ + f-) / 2,    d = (f+ - f-) / 2,

so ``f+ = s + d`` and ``f- = s - d``.  The root smooth plus one detail
vector per node determine the data exactly.  Smooths are plain child
averages, not size-weighted, so the root smooth is generally not the
column mean.

The ``+d`` child of each node is its left child.  Swapping the children of
a node negates that node's detail and leaves everything else unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dendrogram
from .errors import PreconditionError


@dataclass(frozen=True, eq=False)
class WaveletDecomposition:
    """Root smooth and per-node details.

    Attributes
    ----------
    smooth : ndarray, shape (m,)
    details : ndarray, shape (n - 1, m)
        ``details[r - 1]`` belongs to the rank-``r`` node.
    tree : Dendrogram
    plus_child : tuple of int
        Reference of the child carrying ``+d``, per rank.
    """

    smooth: np.ndarray
    details: np.ndarray
    tree: Dendrogram
    plus_child: tuple

    @property
    def n_attributes(self) -> int:
        return self.smooth.shape[0]

    def detail(self, rank: int) -> np.ndarray:
        return self.details[rank - 1]

    def signed_detail(self, ref: int) -> np.ndarray:
        """Detail as seen from child ``ref``: ``+d`` or ``-d`` of its parent."""
        parent = self.tree.parents()[ref]
        rank = parent - self.tree.n_terminals + 1
        sign = 1.0 if self.plus_child[rank - 1] == ref else -1.0
        return sign * self.details[rank - 1]

    def with_details(self, details) -> "WaveletDecomposition":
        details = np.asarray(details, dtype=float)
        if details.shape != self.details.shape:
            raise PreconditionError(f"details must have shape {self.details.shape}, got {details.shape}")
        return WaveletDecomposition(self.smooth, details, self.tree, self.plus_child)


def _as_data(h: Dendrogram, data) -> np.ndarray:
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] != h.n_terminals:
        raise PreconditionError(
            f"data has {x.shape[0] if x.ndim else 0} rows but the tree has {h.n_terminals} terminals"
        )
    if not np.all(np.isfinite(x)):
        raise PreconditionError("data contains missing or non-finite values")
    return x


def smooths(h: Dendrogram, data) -> np.ndarray:
    """Smooth vector of every reference (terminals then nodes by rank)."""
    x = _as_data(h, data)
    n = h.n_terminals
    f = np.empty((2 * n - 1, x.shape[1]))
    f[:n] = x
    for nd in h.nodes:
        f[n + nd.rank - 1] = 0.5 * (f[nd.left] + f[nd.right])
    return f


def forward(h: Dendrogram, data) -> WaveletDecomposition:
    """Forward transform of ``data`` (rows aligned with terminals) over ``h``."""
    f = smooths(h, data)
    details = np.array([0.5 * (f[nd.left] - f[nd.right]) for nd in h.nodes]).reshape(
        h.n_terminals - 1, f.shape[1]
    )
    plus = tuple(nd.left for nd in h.nodes)
    return WaveletDecomposition(f[h.root].copy(), details, h, plus)


def inverse(w: WaveletDecomposition) -> np.ndarray:
    """Reconstruct the data rows by walking down from the root."""
    h = w.tree
    n = h.n_terminals
    f = np.empty((2 * n - 1, w.n_attributes))
    f[h.root] = w.smooth
    for nd in reversed(h.nodes):
        ref = n + nd.rank - 1
        d = w.details[nd.rank - 1]
        plus = w.plus_child[nd.rank - 1]
        minus = nd.right if plus == nd.left else nd.left
        f[plus] = f[ref] + d
        f[minus] = f[ref] - d
    return f[:n].copy()


def threshold_details(details, threshold: float) -> np.ndarray:
    """Copy of ``details`` with every component of magnitude below ``threshold`` set to 0."""
    if not threshold >= 0:
        raise PreconditionError(f"threshold must be >= 0, got {threshold!r}")
    d = np.array(details, dtype=float)
    d[np.abs(d) < threshold] = 0.0
    return d


def regress(w: WaveletDecomposition, threshold: float) -> np.ndarray:
    """Wavelet regression: zero small detail components, then invert."""
    return inverse(w.with_details(threshold_details(w.details, threshold)))


def swap(w: WaveletDecomposition, rank: int) -> WaveletDecomposition:
    """Decomposition over the tree with the children of ``rank`` swapped."""
    tree = w.tree.swap_children(rank)
    details = w.details.copy()
    details[rank - 1] = -details[rank - 1]
    plus = list(w.plus_child)
    nd = w.tree.node(rank)
    plus[rank - 1] = nd.right if plus[rank - 1] == nd.left else nd.left
    # keep the +d child on the left so the result equals forward() on the swapped tree
    return WaveletDecomposition(w.smooth, details, tree, tuple(plus))


def to_table(w: WaveletDecomposition) -> tuple:
    """Header and rows with one row per attribute: ``s_{n-1}, d_{n-1}, ..., d_1``."""
    n1 = w.tree.n_terminals - 1
    header = [f"s_{n1}"] + [f"d_{r}" for r in range(n1, 0, -1)]
    cols = np.column_stack([w.smooth] + [w.details[r - 1] for r in range(n1, 0, -1)])
    return header, cols
