"""Segmentation of a 1-D signal through a sliding-window embedding.

Pipeline: cut the signal into (possibly overlapping) windows, treat each
window as a point in ``window``-dimensional space, optionally map the
points to a few principal coordinates, then run contiguity-constrained
complete-link clustering and cut it into the requested number of
segments.  Because only neighbouring windows may merge, every segment is
a run of consecutive windows.

Helpers for choosing the segment count are included: a pairwise-distance
histogram, 1-D Gaussian mixtures ranked by BIC to count its peaks, and the
peak arithmetic relating peaks to clusters (``c`` clusters give at most
``c (c + 1) / 2`` distinct distance peaks: ``c`` within-cluster and
``c (c - 1) / 2`` between-cluster).

Window starts are 0-based sample indices throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .agglomerate import constrained_cluster, cut_labels
from .core import Dendrogram
from .errors import DegenerateInputError, PreconditionError, TooFewObjectsError


# -- embedding --------------------------------------------------------------

@dataclass(frozen=True)
class EmbeddingSpec:
    """Windows of ``window`` samples starting at ``first, first + step, ..., last``.

    ``last=None`` takes the largest start whose window still fits.
    """

    window: int
    step: int
    first: int = 0
    last: int | None = None

    def __post_init__(self):
        if self.window < 1 or self.step < 1:
            raise PreconditionError(f"window and step must be >= 1, got {self.window}, {self.step}")
        if self.first < 0:
            raise PreconditionError(f"first start must be >= 0, got {self.first}")
        if self.last is not None and self.last < self.first:
            raise PreconditionError(f"last start {self.last} precedes first start {self.first}")

    def starts(self, length: int) -> np.ndarray:
        last = self.last
        if last is None:
            last = length - self.window
            if last < self.first:
                raise PreconditionError(
                    f"window at start {self.first} (length {self.window}) overruns the "
                    f"{length}-sample signal"
                )
        s = np.arange(self.first, last + 1, self.step, dtype=np.int64)
        over = s[s + self.window > length]
        if over.size:
            raise PreconditionError(
                f"window at start {int(over[0])} (length {self.window}) overruns the "
                f"{length}-sample signal"
            )
        return s

    def sample_range(self, start: int) -> tuple:
        """Samples attributed to the window at ``start``: its first ``min(step, window)``."""
        return int(start), int(start + min(self.step, self.window) - 1)


def embed(signal, spec: EmbeddingSpec) -> np.ndarray:
    """Matrix whose row ``t`` is ``signal[start_t : start_t + window]``."""
    x = np.asarray(signal, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise PreconditionError("signal contains missing or non-finite values")
    starts = spec.starts(x.size)
    view = np.lib.stride_tricks.sliding_window_view(x, spec.window)
    return view[starts].copy()


# -- distance histogram -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DistanceHistogram:
    counts: np.ndarray
    edges: np.ndarray
    distances: np.ndarray

    def rows(self) -> list:
        return [[float(a), float(b), int(c)] for a, b, c in zip(self.edges[:-1], self.edges[1:], self.counts)]


def distance_histogram(m, bins: int = 50) -> DistanceHistogram:
    """All pairwise Euclidean distances and an equal-width histogram over ``[min, max]``."""
    x = np.asarray(m, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise TooFewObjectsError(f"need at least 2 rows, got {x.shape[0]}")
    if bins < 1:
        raise PreconditionError(f"bins must be >= 1, got {bins}")
    d = pdist(x)
    counts, edges = np.histogram(d, bins=bins)
    return DistanceHistogram(counts, edges, d)


# -- Gaussian mixtures --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MixtureFit:
    k: int
    means: np.ndarray
    sds: np.ndarray
    weights: np.ndarray
    loglik: float
    bic: float
    n_iter: int
    converged: bool


def _component_logpdf(x, means, variances):
    return -0.5 * (np.log(2 * np.pi * variances) + (x[:, None] - means) ** 2 / variances)


def _e_step(x, means, variances, weights):
    logp = _component_logpdf(x, means, variances) + np.log(weights)
    top = logp.max(axis=1, keepdims=True)
    p = np.exp(logp - top)
    total = p.sum(axis=1, keepdims=True)
    return float((np.log(total) + top).sum()), p / total


def _kmeans_pp(x, k, rng):
    centers = [x[rng.integers(x.size)]]
    for _ in range(1, k):
        d2 = np.min((x[:, None] - np.array(centers)) ** 2, axis=1)
        total = d2.sum()
        idx = rng.integers(x.size) if total == 0 else rng.choice(x.size, p=d2 / total)
        centers.append(x[idx])
    return np.array(centers, dtype=float)


def _init(x, k, rng, floor):
    means = _kmeans_pp(x, k, rng)
    nearest = np.argmin(np.abs(x[:, None] - means), axis=1)
    weights = np.array([max(np.mean(nearest == j), 1.0 / x.size) for j in range(k)])
    variances = np.array([
        max(np.var(x[nearest == j]) if np.any(nearest == j) else np.var(x), floor) for j in range(k)
    ])
    return means, variances, weights / weights.sum()


def _em(x, params, floor, tol, max_iter):
    means, variances, weights = params
    prev = -np.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        loglik, resp = _e_step(x, means, variances, weights)
        nk = resp.sum(axis=0) + 10 * np.finfo(float).tiny
        weights = nk / x.size
        means = resp.T @ x / nk
        variances = np.maximum((resp * (x[:, None] - means) ** 2).sum(axis=0) / nk, floor)
        if loglik - prev < tol * abs(loglik):
            converged = True
            break
        prev = loglik
    loglik, _ = _e_step(x, means, variances, weights)
    return (means, variances, weights), loglik, it, converged


def fit_mixture(values, k: int, seed: int = 0, restarts: int = 10, tol: float = 1e-8,
                max_iter: int = 1000, screen_iter: int = 25) -> MixtureFit:
    """Fit a ``k``-component 1-D Gaussian mixture by EM with seeded restarts.

    Every restart starts from k-means++ means and runs ``screen_iter``
    EM steps; the restart with the highest log-likelihood is then run to
    convergence (gain below ``tol`` relative to the log-likelihood, or
    ``max_iter`` steps).  Variances are floored at ``1e-6 * var(values)``.
    BIC is ``2 loglik - (3k - 1) ln N``, so larger is better.  Components
    are returned in increasing order of mean.
    """
    x = np.asarray(values, dtype=float).ravel()
    if k < 1:
        raise PreconditionError(f"component count must be >= 1, got {k}")
    if restarts < 1:
        raise PreconditionError(f"restarts must be >= 1, got {restarts}")
    if np.unique(x).size < 2:
        raise DegenerateInputError("mixture fitting needs at least 2 distinct values")
    floor = 1e-6 * float(np.var(x))
    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, k, r])
        res = _em(x, _init(x, k, rng, floor), floor, tol, screen_iter)
        if best is None or res[1] > best[1]:
            best = res
    (means, variances, weights), loglik, it, conv = (
        best if best[3] else _em(x, best[0], floor, tol, max_iter)
    )
    order = np.argsort(means, kind="stable")
    bic = 2.0 * loglik - (3 * k - 1) * math.log(x.size)
    return MixtureFit(k, means[order], np.sqrt(variances[order]), weights[order], loglik, bic, it, conv)


def gmm_bic(values, k_max: int, seed: int = 0, restarts: int = 10) -> tuple:
    """Fit mixtures with ``1..k_max`` components; return ``(fits, best_k)`` (BIC argmax)."""
    if k_max < 1:
        raise PreconditionError(f"k_max must be >= 1, got {k_max}")
    fits = [fit_mixture(values, k, seed, restarts) for k in range(1, k_max + 1)]
    best = max(fits, key=lambda f: f.bic)
    return fits, best.k


def max_peaks(n_clusters: int) -> int:
    """Most distance-histogram peaks ``n_clusters`` clusters can produce."""
    return n_clusters * (n_clusters + 1) // 2


def candidate_cluster_counts(n_peaks: int) -> list:
    """Cluster counts consistent with ``n_peaks`` histogram peaks, most likely first.

    The smallest count ``c`` with ``c (c + 1) / 2 >= n_peaks`` comes first
    (some peaks co-located); larger counts up to ``n_peaks`` follow.
    """
    if n_peaks < 1:
        raise PreconditionError(f"peak count must be >= 1, got {n_peaks}")
    c = 1
    while max_peaks(c) < n_peaks:
        c += 1
    return list(range(c, n_peaks + 1))


# -- principal coordinates ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class PcoaResult:
    coordinates: np.ndarray
    eigenvalues: np.ndarray
    variance_fractions: np.ndarray
    negative_fraction: float
    degenerate: bool


def pcoa(d, k: int = 2) -> PcoaResult:
    """Classical (Torgerson) scaling of a distance matrix into ``k`` dimensions.

    Double-centers ``-d**2 / 2`` and keeps the top ``k`` eigenpairs.
    Negative eigenvalues (non-Euclidean input) are dropped;
    ``negative_fraction`` reports their total magnitude relative to the
    positive total.  An all-zero matrix gives zero coordinates, NaN
    fractions and ``degenerate=True``.
    """
    m = np.asarray(d, dtype=float)
    if m.ndim == 1:
        m = squareform(m, checks=False)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise PreconditionError(f"distance matrix must be square, got shape {m.shape}")
    n = m.shape[0]
    if not 1 <= k <= max(n - 1, 1):
        raise PreconditionError(f"k must be in 1..{n - 1}, got {k}")
    j = np.eye(n) - 1.0 / n
    b = -0.5 * j @ (m * m) @ j
    vals, vecs = np.linalg.eigh((b + b.T) / 2)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    scale = np.abs(vals).max() if n else 0.0
    eps = scale * n * np.finfo(float).eps
    positive = vals[vals > eps]
    total = float(positive.sum())
    if total <= 0:
        return PcoaResult(np.zeros((n, k)), np.zeros(k), np.full(k, np.nan), 0.0, True)
    top = np.where(vals[:k] > eps, vals[:k], 0.0)
    coords = vecs[:, :k] * np.sqrt(top)
    # fix the sign of each axis so results do not depend on the eigensolver
    for a in range(k):
        col = coords[:, a]
        pivot = np.argmax(np.abs(col))
        if col[pivot] < 0:
            coords[:, a] = -col
    negative = float(-vals[vals < -eps].sum())
    return PcoaResult(coords, top, top / total, negative / total, False)


# -- segmentation -------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    window_first: int
    window_last: int
    sample_first: int
    sample_last: int

    def as_dict(self) -> dict:
        return {"window_first": self.window_first, "window_last": self.window_last,
                "sample_first": self.sample_first, "sample_last": self.sample_last}


@dataclass(frozen=True, eq=False)
class SegmentationResult:
    segments: list
    labels: np.ndarray
    starts: np.ndarray
    tree: Dendrogram | None
    pcoa: PcoaResult | None

    @property
    def boundaries(self) -> list:
        """Index of the first window of every segment after the first."""
        return [s.window_first for s in self.segments[1:]]


def segments_from_labels(labels, starts, spec: EmbeddingSpec) -> list:
    """Turn per-window block labels (contiguous runs) into :class:`Segment` records."""
    labels = np.asarray(labels)
    cuts = np.flatnonzero(np.diff(labels)) + 1
    out = []
    for a, b in zip(np.r_[0, cuts], np.r_[cuts, labels.size] - 1):
        out.append(Segment(int(a), int(b), spec.sample_range(starts[a])[0], spec.sample_range(starts[b])[1]))
    return out


def segment_signal(signal, spec: EmbeddingSpec, n_segments: int, use_pcoa: bool = True,
                   pcoa_dims: int = 2) -> SegmentationResult:
    """Split a signal into ``n_segments`` runs of consecutive windows.

    Window indices are 0-based positions in the start sequence; the sample
    range of a segment runs from its first window's start to the end of the
    ``min(step, window)`` samples attributed to its last window.
    """
    m = embed(signal, spec)
    starts = spec.starts(np.asarray(signal).size)
    t = m.shape[0]
    if not 1 <= n_segments <= t:
        raise PreconditionError(f"n_segments must be in 1..{t} (the window count), got {n_segments}")
    if t == 1:
        return SegmentationResult(segments_from_labels([0], starts, spec), np.zeros(1, dtype=int),
                                  starts, None, None)
    coords, pc = m, None
    if use_pcoa:
        pc = pcoa(squareform(pdist(m)), min(pcoa_dims, t - 1))
        coords = pc.coordinates
    tree = constrained_cluster(coords)
    labels = cut_labels(tree, n_segments)
    return SegmentationResult(segments_from_labels(labels, starts, spec), labels, starts, tree, pc)


def planted_signal(levels=(0.0, 5.0, 0.0), length: int = 30000, sd: float = 1.0, seed: int = 0) -> np.ndarray:
    """Piecewise-constant mean plus Gaussian noise: one regime of ``length`` samples per level."""
    rng = np.random.default_rng(seed)
    return np.concatenate([lv + sd * rng.standard_normal(length) for lv in levels])
