"""Ultrametricity of point clouds, measured on sampled triangles.

In an ultrametric space every triangle is isosceles with a small base
(two largest sides equal, third shorter) or equilateral.  The proportion
of sampled triangles of these two kinds measures how close a data set is
to ultrametric.

Sides are compared with one of two rules:

``mode="angle"`` (default, ``tol`` in degrees, default 2)
    Two sides count as equal when their opposite angles differ by at most
    ``tol``.  A triangle is equilateral when all three angles are chained
    within ``tol`` (largest to middle, middle to smallest).
``mode="side"`` (``tol`` relative, default 0.01)
    ``y`` and ``z`` count as equal when ``z - y <= tol * z``; equilateral
    additionally needs ``y - x <= tol * y``.

The two reported classes are disjoint and sum to the ultrametric share.
The angle rule tracks the published high-dimensional proportions far more
closely than a 1% side tolerance, which undercounts at moderate
dimension; both rules are scale invariant.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import PreconditionError, TooFewObjectsError

MODES = ("angle", "side")
DEFAULT_TOL = {"angle": 2.0, "side": 0.01}
KINDS = ("uniform", "hypercube", "gaussian")


class TriangleKind(str, Enum):
    EQUILATERAL = "equilateral"
    ISOSCELES_SMALL_BASE = "isosceles_small_base"
    OTHER = "other"


@dataclass(frozen=True)
class TriangleReport:
    n_sampled: int
    isosceles_small_base: float
    equilateral: float
    ultrametric: float
    tolerance: float
    mode: str = "angle"

    def as_row(self) -> list:
        return [self.n_sampled, self.isosceles_small_base, self.equilateral, self.ultrametric]


def _resolve(mode, tol):
    if mode not in MODES:
        raise PreconditionError(f"unknown mode {mode!r}; choose from {MODES}")
    tol = DEFAULT_TOL[mode] if tol is None else float(tol)
    if not tol >= 0:
        raise PreconditionError(f"tolerance must be >= 0, got {tol!r}")
    return tol


def _angles(x, y, z):
    """Angles (degrees) opposite sorted sides x <= y <= z; zero sides handled."""
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.degrees(np.arccos(np.clip((y * y + z * z - x * x) / (2 * y * z), -1, 1)))
        b = np.degrees(np.arccos(np.clip((x * x + z * z - y * y) / (2 * x * z), -1, 1)))
    # x == 0: two vertices coincide; a degenerate isosceles (y == z) gets
    # base angles of 90, anything else is a flat 0/0/180 triangle
    flat = x == 0
    a = np.where(flat, 0.0, a)
    b = np.where(flat, np.where(z - y == 0, 90.0, 0.0), b)
    c = 180.0 - a - b
    c = np.where(flat, np.where(z - y == 0, 90.0, 180.0), c)
    return a, b, c


def classify_sides(sides, tol: float | None = None, mode: str = "angle"):
    """Vectorized classification of ``(T, 3)`` side lengths.

    Returns boolean arrays ``(ultrametric, equilateral)``; isosceles with a
    small base is ``ultrametric & ~equilateral``.
    """
    tol = _resolve(mode, tol)
    s = np.sort(np.asarray(sides, dtype=float).reshape(-1, 3), axis=1)
    x, y, z = s.T
    if mode == "side":
        um = z - y <= tol * z
        eq = um & (y - x <= tol * y)
    else:
        a, b, c = _angles(x, y, z)
        # equal sides have equal opposite angles; avoid arccos rounding there
        um = (np.abs(c - b) <= tol) | (z == y)
        eq = um & ((np.abs(b - a) <= tol) | (y == x))
        zero = z == 0
        um, eq = um | zero, eq | zero
    return um, eq


def classify_triangle(a: float, b: float, c: float, tol: float | None = None,
                      mode: str = "angle") -> tuple:
    """Classify one triangle by its side lengths.

    Returns ``(kind, um_flag)`` where ``kind`` is a :class:`TriangleKind`.

    >>> classify_triangle(3.5, 3.5, 1.0)
    (<TriangleKind.ISOSCELES_SMALL_BASE: 'isosceles_small_base'>, True)
    """
    for v in (a, b, c):
        if not v > 0 or not np.isfinite(v):
            raise PreconditionError(f"side lengths must be positive and finite, got {(a, b, c)}")
    um, eq = classify_sides([[a, b, c]], tol, mode)
    if eq[0]:
        return TriangleKind.EQUILATERAL, True
    if um[0]:
        return TriangleKind.ISOSCELES_SMALL_BASE, True
    return TriangleKind.OTHER, False


def sample_triplets(n: int, n_triangles: int, rng: np.random.Generator) -> np.ndarray:
    """``(T, 3)`` index triplets, distinct within a row, independent across rows."""
    if n < 3:
        raise TooFewObjectsError(f"need at least 3 points, got {n}")
    if n_triangles < 1:
        raise PreconditionError(f"n_triangles must be >= 1, got {n_triangles}")
    return np.array([rng.choice(n, 3, replace=False) for _ in range(n_triangles)], dtype=np.int64)


def triangle_sides(points, triplets) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    i, j, k = triplets.T
    return np.column_stack([
        np.linalg.norm(x[i] - x[j], axis=1),
        np.linalg.norm(x[j] - x[k], axis=1),
        np.linalg.norm(x[i] - x[k], axis=1),
    ])


def ultrametricity(points=None, n_triangles: int = 300, seed: int = 0, tol: float | None = None,
                   mode: str = "angle", *, distances=None) -> TriangleReport:
    """Share of sampled triangles that are ultrametric-respecting.

    Parameters
    ----------
    points : array_like, shape (n, m), optional
        Euclidean point cloud.
    distances : array_like, shape (n, n), optional
        Precomputed distances, used instead of ``points``.
    n_triangles : int
        Triplets sampled, distinct within a triangle, with replacement across.
    seed : int
        Seed for triplet sampling (``numpy.random.default_rng``).
    """
    tol = _resolve(mode, tol)
    if (points is None) == (distances is None):
        raise PreconditionError("pass exactly one of points or distances")
    rng = np.random.default_rng(seed)
    if distances is not None:
        d = np.asarray(distances, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise PreconditionError(f"distance matrix must be square, got shape {d.shape}")
        trip = sample_triplets(d.shape[0], n_triangles, rng)
        i, j, k = trip.T
        sides = np.column_stack([d[i, j], d[j, k], d[i, k]])
    else:
        x = np.asarray(points, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        trip = sample_triplets(x.shape[0], n_triangles, rng)
        sides = triangle_sides(x, trip)
    um, eq = classify_sides(sides, tol, mode)
    t = float(n_triangles)
    return TriangleReport(
        n_sampled=int(n_triangles),
        isosceles_small_base=float(np.count_nonzero(um & ~eq)) / t,
        equilateral=float(np.count_nonzero(eq)) / t,
        ultrametric=float(np.count_nonzero(um)) / t,
        tolerance=tol,
        mode=mode,
    )


def generate_cloud(kind: str, n: int, dim: int, seed: int = 0) -> np.ndarray:
    """Seeded point cloud: uniform on ``[0,1]^dim``, hypercube vertices, or standard Gaussian."""
    if kind not in KINDS:
        raise PreconditionError(f"unknown kind {kind!r}; choose from {KINDS}")
    if n < 1 or dim < 1:
        raise PreconditionError(f"n and dim must be >= 1, got n={n}, dim={dim}")
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        return rng.random((n, dim))
    if kind == "hypercube":
        return rng.integers(0, 2, size=(n, dim)).astype(float)
    return rng.standard_normal((n, dim))


def cloud_ultrametricity(kind: str, n: int = 100, dim: int = 20, n_triangles: int = 300,
                         seed: int = 0, tol: float | None = None, mode: str = "angle") -> TriangleReport:
    """Generate a cloud and measure it; the two stages use independent child seeds."""
    cloud_seed, sample_seed = np.random.SeedSequence(seed).spawn(2)
    x = generate_cloud(kind, n, dim, int(cloud_seed.generate_state(1)[0]))
    return ultrametricity(x, n_triangles, int(sample_seed.generate_state(1)[0]), tol, mode)
