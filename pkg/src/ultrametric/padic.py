"""p-adic codes of dendrogram terminals.

Terminal ``i`` is coded by the signed branch labels met on its way to the
root: ``c_ij = +1`` if it sits under the left child of the rank-``j``
node, ``-1`` under the right child, and ``0`` when node ``j`` is not above
it.  Its integer value is ``sum_j c_ij p**j``.  Stacking the codes gives
the ``n x (n-1)`` characteristic matrix ``C`` and the values ``x = C p``.

Which child counts as "left" is a free choice at every node.  The default
``orientation="canonical"`` takes the child holding the smaller terminal
index, so the code does not depend on how a tree happened to be drawn;
``orientation="tree"`` keeps the tree's own left/right.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dendrogram, Node
from .errors import ExhaustedError, IncompatibleError, InvalidDendrogramError, PreconditionError

ORIENTATIONS = ("canonical", "tree")


def _check_p(p):
    if int(p) != p or p < 2:
        raise PreconditionError(f"p must be an integer >= 2, got {p!r}")
    return int(p)


@dataclass(frozen=True)
class PadicCode:
    """Coefficients ``c_1 .. c_L`` (``coefficients[j - 1]`` is level ``j``) and base ``p``."""

    coefficients: tuple
    p: int

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coefficients)
        if any(c not in (-1, 0, 1) for c in coeffs):
            raise PreconditionError(f"coefficients must be -1, 0 or +1, got {coeffs}")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "p", _check_p(self.p))

    @property
    def n_levels(self) -> int:
        return len(self.coefficients)

    @property
    def levels(self) -> tuple:
        """Levels with a nonzero coefficient, increasing."""
        return tuple(j for j, c in enumerate(self.coefficients, start=1) if c)

    @property
    def value(self) -> int:
        return sum(c * self.p**j for j, c in enumerate(self.coefficients, start=1))

    @property
    def is_null(self) -> bool:
        return not any(self.coefficients)

    def __str__(self):
        terms = [f"{'+' if c > 0 else '-'}1*{self.p}^{j}"
                 for j, c in enumerate(self.coefficients, start=1) if c]
        return " ".join(terms) if terms else "0"


@dataclass(frozen=True, eq=False)
class CharacteristicMatrix:
    """Codes of all terminals as an ``n x L`` integer matrix.

    A freshly encoded tree has ``L = n - 1`` levels; each dilation removes
    the lowest one.
    """

    coefficients: np.ndarray
    p: int
    terminals: tuple

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=np.int64)
        if c.ndim != 2:
            raise PreconditionError(f"coefficient matrix must be 2-D, got shape {c.shape}")
        if not np.isin(c, (-1, 0, 1)).all():
            raise PreconditionError("coefficients must be -1, 0 or +1")
        if len(self.terminals) != c.shape[0]:
            raise PreconditionError(f"{len(self.terminals)} terminal labels for {c.shape[0]} rows")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "p", _check_p(self.p))
        object.__setattr__(self, "terminals", tuple(str(t) for t in self.terminals))

    def __eq__(self, other):
        if not isinstance(other, CharacteristicMatrix):
            return NotImplemented
        return (self.p == other.p and self.terminals == other.terminals
                and np.array_equal(self.coefficients, other.coefficients))

    @property
    def n_terminals(self) -> int:
        return self.coefficients.shape[0]

    @property
    def n_levels(self) -> int:
        return self.coefficients.shape[1]

    def code(self, i: int) -> PadicCode:
        return PadicCode(tuple(self.coefficients[i]), self.p)

    def values(self) -> list:
        """Integer values ``C p``, computed exactly."""
        powers = [self.p**j for j in range(1, self.n_levels + 1)]
        return [sum(int(c) * pw for c, pw in zip(row, powers)) for row in self.coefficients]

    def clusters(self) -> dict:
        """Level -> frozenset of terminals with a nonzero coefficient there."""
        return {j + 1: frozenset(np.flatnonzero(self.coefficients[:, j]).tolist())
                for j in range(self.n_levels)}

    def with_p(self, p: int) -> "CharacteristicMatrix":
        return CharacteristicMatrix(self.coefficients, p, self.terminals)


def encode(h: Dendrogram, p: int = 3, orientation: str = "canonical") -> CharacteristicMatrix:
    """Characteristic matrix of a dendrogram.

    Parameters
    ----------
    h : Dendrogram
    p : int
        Base; values are distinct across terminals for ``p >= 3``.
    orientation : {"canonical", "tree"}
        Which child receives ``+1`` at each node.

    Examples
    --------
    >>> from ultrametric.core import Dendrogram, Node
    >>> tree = Dendrogram(["a", "b"], [Node(1, 1.0, 0, 1)])
    >>> encode(tree, 3).values()
    [3, -3]
    """
    p = _check_p(p)
    if orientation not in ORIENTATIONS:
        raise PreconditionError(f"unknown orientation {orientation!r}; choose from {ORIENTATIONS}")
    n = h.n_terminals
    c = np.zeros((n, n - 1), dtype=np.int64)
    for nd in h.nodes:
        left, right = nd.left, nd.right
        if orientation == "canonical" and h.members(right)[0] < h.members(left)[0]:
            left, right = right, left
        c[list(h.members(left)), nd.rank - 1] = 1
        c[list(h.members(right)), nd.rank - 1] = -1
    return CharacteristicMatrix(c, p, h.terminals)


def decode(cm: CharacteristicMatrix) -> Dendrogram:
    """Rebuild the ranked tree from a full characteristic matrix.

    The ``+1`` side of each node becomes its left child; node heights are
    set to the ranks, since codes carry no heights.
    """
    c = cm.coefficients
    n = cm.n_terminals
    if n < 1:
        raise InvalidDendrogramError("no terminals")
    if cm.n_levels != n - 1:
        raise InvalidDendrogramError(
            f"a tree on {n} terminals needs {n - 1} levels, matrix has {cm.n_levels}"
        )
    top = list(range(n))  # current cluster ref of each terminal
    size = {i: 1 for i in range(n)}
    nodes = []
    for j in range(n - 1):
        sides = []
        for sign in (1, -1):
            rows = np.flatnonzero(c[:, j] == sign)
            if rows.size == 0:
                raise InvalidDendrogramError(f"level {j + 1} has no {'+1' if sign > 0 else '-1'} branch")
            refs = {top[i] for i in rows}
            if len(refs) != 1 or size[next(iter(refs))] != rows.size:
                raise InvalidDendrogramError(
                    f"level {j + 1}: the {'+1' if sign > 0 else '-1'} terminals "
                    f"{rows.tolist()} are not exactly one existing cluster"
                )
            sides.append((refs.pop(), rows))
        (left, lrows), (right, rrows) = sides
        ref = n + j
        nodes.append(Node(j + 1, float(j + 1), left, right))
        size[ref] = size.pop(left) + size.pop(right)
        for i in np.concatenate([lrows, rrows]):
            top[i] = ref
    return Dendrogram(cm.terminals, nodes, {"heights": "ranks"})


def _pair(a: PadicCode, b: PadicCode):
    if a.p != b.p or a.n_levels != b.n_levels:
        raise IncompatibleError(
            f"codes differ in base or length (p={a.p}/{b.p}, levels={a.n_levels}/{b.n_levels})"
        )


def padic_rank(a: PadicCode, b: PadicCode) -> int:
    """Highest level at which the two codes differ (0 when identical)."""
    _pair(a, b)
    for j in range(a.n_levels, 0, -1):
        if a.coefficients[j - 1] != b.coefficients[j - 1]:
            return j
    return 0


def padic_distance(a: PadicCode, b: PadicCode) -> float:
    """``p**-r`` with ``r`` the highest differing level; 0 for identical codes.

    ``r`` is the rank of the lowest node above both terminals, so the
    distance falls as that node rises.  It is therefore not an ultrametric
    itself; ``p**r`` is (it is the cophenetic matrix of the rank-height
    tree under a monotone map).
    """
    r = padic_rank(a, b)
    return 0.0 if r == 0 else float(a.p) ** -r


def distance_matrix(cm: CharacteristicMatrix) -> np.ndarray:
    """All pairwise p-adic distances between terminals."""
    c = cm.coefficients
    n, levels = c.shape
    r = np.zeros((n, n), dtype=np.int64)
    for j in range(levels):
        differ = c[:, j][:, None] != c[:, j][None, :]
        r[differ] = j + 1
    out = np.where(r > 0, float(cm.p) ** -r.astype(float), 0.0)
    return out


def dilate(cm: CharacteristicMatrix, times: int = 1) -> CharacteristicMatrix:
    """Multiply every code by ``1/p``: level ``j`` moves to ``j - 1`` and level 1 is lost.

    Each application removes the bottom merge of the hierarchy.  After
    ``n - 1`` applications every code is the empty (null) code; dilating
    a code set with no levels raises :class:`ExhaustedError`.
    """
    if times < 0:
        raise PreconditionError(f"times must be >= 0, got {times}")
    if times > cm.n_levels:
        raise ExhaustedError(
            f"cannot dilate {times} times: only {cm.n_levels} levels remain"
        )
    return CharacteristicMatrix(cm.coefficients[:, times:], cm.p, cm.terminals)
