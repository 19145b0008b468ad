"""Baire (longest-common-prefix) clustering.

Pipeline: divide each column by its sum, project every row onto one random
direction, rescale into ``[0, 1)``, and group the projected values by
shared leading digits.  Level ``k`` of the hierarchy groups the rows whose
first ``k`` digits agree, so levels are nested partitions.  After one sort
every level is read off in linear time, which gives ``O(n log n)``
overall instead of the ``O(n^2)`` of pairwise agglomeration.

Digits come from exact round-half-even of the binary value at the chosen
precision (what ``format(x, ".{K}f")`` gives in base 10), so results do
not depend on float printing quirks.  Weights come from SplitMix64, a
counter-based generator, so a seed maps to the same weights on any
platform or language::

    z = seed + (j + 1) * 0x9E3779B97F4A7C15            (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)
    w_j = ((z >> 11) + 0.5) * 2**-53                   (in (0, 1))
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateColumnError, IncompatibleError, PreconditionError

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
RESCALE_EPS = 2.0**-32
WEIGHT_SCHEMES = ("uniform", "ascending", "descending")


# -- digit strings ---------------------------------------------------------

@dataclass(frozen=True)
class DigitString:
    digits: tuple
    base: int = 10

    def __post_init__(self):
        if self.base < 2:
            raise PreconditionError(f"base must be >= 2, got {self.base}")
        if not self.digits:
            raise PreconditionError("a digit string needs at least one digit")
        if any(not 0 <= d < self.base for d in self.digits):
            raise PreconditionError(f"digits {self.digits} out of range for base {self.base}")
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))

    @classmethod
    def from_value(cls, x: float, precision: int, base: int = 10) -> "DigitString":
        code = int(quantize([x], precision, base)[0])
        digits = []
        for _ in range(precision):
            code, r = divmod(code, base)
            digits.append(r)
        return cls(tuple(reversed(digits)), base)

    def __len__(self):
        return len(self.digits)

    def __str__(self):
        alphabet = "0123456789abcdefghijklmnopqrstuvwxyz"
        return "0." + "".join(alphabet[d] for d in self.digits)


def common_prefix_length(x: DigitString, y: DigitString) -> int:
    if len(x) != len(y) or x.base != y.base:
        raise IncompatibleError(
            f"digit strings differ in length or base ({len(x)}/{x.base} vs {len(y)}/{y.base})"
        )
    n = 0
    for a, b in zip(x.digits, y.digits):
        if a != b:
            break
        n += 1
    return n


def baire_distance(x, y, precision: int | None = None, base: int = 10) -> float:
    """Longest-common-prefix ultrametric, bounded by 1.

    ``1`` when the first digits differ, otherwise ``2**-l`` for a common
    prefix of length ``l``; identical strings give ``2**-precision``.
    Floats are converted with :meth:`DigitString.from_value`, which needs
    ``precision``.
    """
    if not isinstance(x, DigitString) or not isinstance(y, DigitString):
        if precision is None:
            raise PreconditionError("precision is required for numeric arguments")
        x = x if isinstance(x, DigitString) else DigitString.from_value(x, precision, base)
        y = y if isinstance(y, DigitString) else DigitString.from_value(y, precision, base)
    ell = common_prefix_length(x, y)
    return 1.0 if ell == 0 else 2.0**-ell


def quantize(values, precision: int, base: int = 10) -> np.ndarray:
    """Integer codes ``round_half_even(x * base**precision)`` computed exactly.

    Codes that would round up to ``base**precision`` (values just below 1)
    are clamped to ``base**precision - 1``, the largest ``precision``-digit
    string.
    """
    if precision < 1:
        raise PreconditionError(f"precision must be >= 1, got {precision}")
    if base < 2:
        raise PreconditionError(f"base must be >= 2, got {base}")
    scale = base**precision
    if scale >= 2**62:
        raise PreconditionError(f"base**precision = {base}**{precision} exceeds the 62-bit code range")
    x = np.asarray(values, dtype=float).ravel()
    if x.size and (not np.all(np.isfinite(x)) or x.min() < 0 or x.max() >= 1):
        bad = int(np.flatnonzero(~((x >= 0) & (x < 1)))[0])
        raise PreconditionError(f"value {x[bad]!r} at position {bad} is outside [0, 1)")
    y = x * float(scale)
    codes = np.rint(y)
    # float product is only untrustworthy next to a half-integer or when ulp >= 1
    frac = np.abs(y - np.floor(y) - 0.5)
    unsure = (frac <= np.spacing(y) * 8 + 2.0**-40) | (np.spacing(y) >= 0.25)
    codes = codes.astype(np.int64)
    for i in np.flatnonzero(unsure):
        codes[i] = round(Fraction(float(x[i])) * scale)
    np.minimum(codes, scale - 1, out=codes)
    return codes


# -- hierarchy -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BaireHierarchy:
    """Nested partitions by shared digit prefix.

    ``labels[k - 1][i]`` is the block of object ``i`` at level ``k``; block
    ids increase with the prefix value.  Level 0 (implicit) is one block.
    """

    codes: np.ndarray
    precision: int
    base: int
    labels: np.ndarray

    @property
    def n(self) -> int:
        return int(self.codes.size)

    def level_labels(self, level: int) -> np.ndarray:
        self._check_level(level)
        if level == 0:
            return np.zeros(self.n, dtype=np.int64)
        return self.labels[level - 1]

    def n_clusters(self, level: int) -> int:
        lab = self.level_labels(level)
        return int(lab.max()) + 1 if lab.size else 0

    def partition(self, level: int) -> list:
        """Blocks at ``level`` as sorted index lists, in prefix order."""
        lab = self.level_labels(level)
        order = np.argsort(lab, kind="stable")
        cuts = np.flatnonzero(np.diff(lab[order])) + 1
        return [[int(i) for i in block] for block in np.split(order, cuts)] if lab.size else []

    def digits(self, i: int) -> DigitString:
        code, out = int(self.codes[i]), []
        for _ in range(self.precision):
            code, r = divmod(code, self.base)
            out.append(r)
        return DigitString(tuple(reversed(out)), self.base)

    def prefix_length(self, i: int, j: int) -> int:
        same = self.labels[:, i] == self.labels[:, j]
        return int(np.argmin(same)) if not same.all() else self.precision

    def distance(self, i: int, j: int) -> float:
        ell = self.prefix_length(i, j)
        return 1.0 if ell == 0 else 2.0**-ell

    def refines(self) -> bool:
        """Whether every level's blocks sit inside a block of the level above."""
        prev = np.zeros(self.n, dtype=np.int64)
        for lab in self.labels:
            # each block at this level must map to exactly one parent block
            width = int(prev.max()) + 1
            pairs = np.unique(lab * width + prev)
            if np.unique(pairs // width).size != pairs.size:
                return False
            prev = lab
        return True

    def _check_level(self, level):
        if not 0 <= level <= self.precision:
            raise PreconditionError(f"level must be in 0..{self.precision}, got {level}")


def baire_hierarchy(values, precision: int = 4, base: int = 10) -> BaireHierarchy:
    """Prefix hierarchy of scalars in ``[0, 1)``.

    One stable sort of the integer codes, then one linear scan per level.
    """
    codes = quantize(values, precision, base)
    order = np.argsort(codes, kind="stable")
    sorted_codes = codes[order]
    labels = np.empty((precision, codes.size), dtype=np.int64)
    for k in range(1, precision + 1):
        prefix = sorted_codes // (base ** (precision - k))
        ids = np.zeros(codes.size, dtype=np.int64)
        if codes.size > 1:
            np.cumsum(prefix[1:] != prefix[:-1], out=ids[1:])
        labels[k - 1, order] = ids
    return BaireHierarchy(codes, precision, base, labels)


# -- normalization and projection -----------------------------------------

def _is_sparse(m):
    try:
        import scipy.sparse as sp
    except ImportError:  # pragma: no cover
        return False
    return sp.issparse(m)


def _column_sums(m) -> np.ndarray:
    if _is_sparse(m):
        if m.nnz and m.data.min() < 0:
            raise PreconditionError("normalization needs nonnegative entries")
        sums = np.asarray(m.sum(axis=0), dtype=float).ravel()
    else:
        if m.ndim != 2 or m.size == 0:
            raise PreconditionError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
        if np.any(m < 0):
            raise PreconditionError("normalization needs nonnegative entries")
        sums = m.sum(axis=0)
    zero = np.flatnonzero(sums == 0)
    if zero.size:
        raise DegenerateColumnError(int(zero[0]))
    return sums


def normalize_columns(m):
    """Divide every entry by its column sum.

    Accepts dense arrays and ``scipy.sparse`` matrices; entries must be
    nonnegative.  Returns the same kind of matrix.
    """
    if _is_sparse(m):
        import scipy.sparse as sp

        m = sp.csr_matrix(m, dtype=float)
        return sp.csr_matrix(m.multiply(1.0 / _column_sums(m)[None, :]))
    x = np.asarray(m, dtype=float)
    return x / _column_sums(x)


def splitmix64(seed: int, count: int) -> np.ndarray:
    """``count`` consecutive SplitMix64 outputs for ``seed`` as uint64."""
    with np.errstate(over="ignore"):
        j = np.arange(1, count + 1, dtype=np.uint64)
        z = np.uint64(seed % 2**64) + j * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
        return z ^ (z >> np.uint64(31))


def uniform_weights(seed: int, count: int) -> np.ndarray:
    z = splitmix64(seed, count)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def projection_weights(n_columns: int, seed: int = 0, scheme: str = "uniform") -> np.ndarray:
    if scheme == "uniform":
        return uniform_weights(seed, n_columns)
    if scheme == "ascending":
        return np.arange(1, n_columns + 1, dtype=float)
    if scheme == "descending":
        return np.arange(n_columns, 0, -1, dtype=float)
    raise PreconditionError(f"unknown weight scheme {scheme!r}; choose from {WEIGHT_SCHEMES}")


def _as_matrix(m):
    if _is_sparse(m):
        import scipy.sparse as sp

        return sp.csr_matrix(m, dtype=float)
    m = np.asarray(m, dtype=float)
    return m[:, None] if m.ndim == 1 else m


def _rescale(p: np.ndarray) -> np.ndarray:
    lo, hi = float(p.min()), float(p.max())
    if hi == lo:
        return np.zeros(p.size)
    out = (p - lo) / ((hi - lo) * (1.0 + RESCALE_EPS))
    return np.minimum(out, np.nextafter(1.0, 0.0))


def project(m, seed: int = 0, weights: str = "uniform", *, column_scale=None) -> np.ndarray:
    """Project rows onto one weighted direction and rescale into ``[0, 1)``.

    ``p_i = sum_j w_j x_ij`` then ``(p - min) / ((max - min) * (1 + 2**-32))``.
    Identical rows get identical values.  A constant projection maps to 0.
    ``column_scale`` multiplies the weights, which lets a caller fold
    column normalization into the product without copying the matrix.
    """
    m = _as_matrix(m)
    n, k = m.shape if m.ndim == 2 else (0, 0)
    if n == 0 or k == 0:
        raise PreconditionError("cannot project an empty matrix")
    w = projection_weights(k, seed, weights)
    if column_scale is not None:
        w = w * column_scale
    return _rescale(np.asarray(m @ w, dtype=float).ravel())


# -- end-to-end ------------------------------------------------------------

@dataclass(frozen=True)
class LevelReport:
    level: int
    n_clusters: int
    n_mixed: int | None = None


@dataclass(frozen=True, eq=False)
class BaireResult:
    hierarchy: BaireHierarchy
    report: list
    projection: np.ndarray
    seed: int
    weights: str


def _mix64(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
        return z ^ (z >> np.uint64(31))


def _row_hashes(m, chunk: int = 1 << 16) -> np.ndarray:
    """Order-independent 64-bit hash of each row's nonzero (column, value) pairs.

    Works through the rows in blocks of about ``chunk`` nonzeros so the
    temporaries stay cache-sized and the cost stays linear in practice.
    """
    n = m.shape[0]
    out = np.zeros(n, dtype=np.uint64)
    if not _is_sparse(m):
        step = max(1, chunk // max(1, m.shape[1]))
        for a in range(0, n, step):
            block = m[a:a + step]
            rows, cols = np.nonzero(block)
            _accumulate(out, rows + a, cols, block[rows, cols])
        return out
    indptr = m.indptr
    a = 0
    while a < n:
        b = int(np.searchsorted(indptr, indptr[a] + chunk, side="right")) - 1
        b = min(max(b, a + 1), n)
        lo, hi = indptr[a], indptr[b]
        rows = np.repeat(np.arange(a, b), np.diff(indptr[a:b + 1]))
        _accumulate(out, rows, m.indices[lo:hi], m.data[lo:hi])
        a = b
    return out


def _accumulate(out, rows, cols, vals):
    if rows.size == 0:
        return
    vals = vals + 0.0  # folds -0.0 into 0.0
    with np.errstate(over="ignore"):
        term = _mix64(vals.view(np.uint64) ^ _mix64(cols.astype(np.uint64) * np.uint64(GOLDEN_GAMMA)))
        # rows arrive sorted, so a segmented sum is exact modulo 2**64
        starts = np.flatnonzero(np.r_[True, rows[1:] != rows[:-1]])
        out[rows[starts]] += np.add.reduceat(term, starts)


def row_identity(m) -> np.ndarray:
    """Group id per row; equal ids iff rows are entrywise identical.

    Rows are bucketed by a 64-bit content hash; buckets holding several
    rows are then split by exact comparison, so hash collisions cannot
    merge distinct rows.
    """
    if _is_sparse(m):
        import scipy.sparse as sp

        m = sp.csr_matrix(m, dtype=float)
        if not m.has_canonical_format or (m.nnz and not m.data.all()):
            m = m.copy()
            m.eliminate_zeros()
            m.sum_duplicates()
    else:
        m = np.asarray(m, dtype=float)
    _, bucket = np.unique(_row_hashes(m), return_inverse=True)
    bucket = bucket.ravel()
    counts = np.bincount(bucket)
    ids = bucket.astype(np.int64)
    nxt = int(counts.size)
    for b in np.flatnonzero(counts > 1):
        members = np.flatnonzero(bucket == b)
        seen = {}
        for i in members:
            row = m.getrow(i) if _is_sparse(m) else m[i]
            key = (row.indices.tobytes(), (row.data + 0.0).tobytes()) if _is_sparse(m) else (row + 0.0).tobytes()
            if key not in seen:
                seen[key] = b if not seen else nxt + len(seen) - 1
            ids[i] = seen[key]
        nxt += len(seen) - 1
    _, ids = np.unique(ids, return_inverse=True)
    return ids.ravel().astype(np.int64)


def mixed_blocks(labels: np.ndarray, identity: np.ndarray) -> int:
    """Blocks containing rows that are not all identical."""
    key = np.unique(labels * (int(identity.max()) + 1) + identity)
    _, counts = np.unique(key // (int(identity.max()) + 1), return_counts=True)
    return int(np.count_nonzero(counts > 1))


def baire_cluster(m, seed: int = 0, precision: int = 4, base: int = 10, *,
                  weights: str = "uniform", normalize: bool = True,
                  check_collisions: bool = True) -> BaireResult:
    """Normalize, project and build the prefix hierarchy of a data matrix.

    The report lists, per level, the number of blocks and (when
    ``check_collisions``) how many blocks hold non-identical rows, i.e.
    projection collisions.
    """
    m = _as_matrix(m)
    scale = 1.0 / _column_sums(m) if normalize else None
    values = project(m, seed, weights, column_scale=scale)
    h = baire_hierarchy(values, precision, base)
    identity = row_identity(m) if check_collisions else None
    report = [
        LevelReport(k, h.n_clusters(k),
                    mixed_blocks(h.labels[k - 1], identity) if identity is not None else None)
        for k in range(1, precision + 1)
    ]
    return BaireResult(h, report, values, seed, weights)


def synthetic_occupancy(n: int, columns: int, density: float = 0.08, seed: int = 0):
    """Random sparse 0/1 CSR matrix with roughly ``density`` occupancy.

    Every column gets at least one 1 (placed on row ``j mod n``) so column
    normalization is always defined.
    """
    import scipy.sparse as sp

    if not 0 < density <= 1:
        raise PreconditionError(f"density must be in (0, 1], got {density}")
    m = sp.random(n, columns, density=density, format="csr", random_state=np.random.default_rng(seed))
    m.data[:] = 1.0
    cover = sp.csr_matrix((np.ones(columns), (np.arange(columns) % n, np.arange(columns))), shape=(n, columns))
    m = (m + cover).tocsr()
    m.data[:] = 1.0
    return m
