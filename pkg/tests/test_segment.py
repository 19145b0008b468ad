import numpy as np
import pytest
from scipy.spatial.distance import pdist, squareform

from ultrametric.errors import DegenerateInputError, PreconditionError, TooFewObjectsError
from ultrametric.segment import (
    EmbeddingSpec,
    candidate_cluster_counts,
    distance_histogram,
    embed,
    fit_mixture,
    gmm_bic,
    max_peaks,
    pcoa,
    planted_signal,
    segment_signal,
    segments_from_labels,
)


def mixture_sample(means, n, sd=1.0, seed=0):
    rng = np.random.default_rng(seed)
    comp = rng.integers(0, len(means), n)
    return np.asarray(means, dtype=float)[comp] + sd * rng.standard_normal(n)


class TestEmbed:
    def test_window_count(self):
        spec = EmbeddingSpec(window=10000, step=1000, first=0, last=85000)
        assert embed(np.zeros(95011), spec).shape == (86, 10000)

    def test_unit_window(self):
        x = np.arange(7.0)
        assert np.array_equal(embed(x, EmbeddingSpec(1, 1))[:, 0], x)

    def test_small_example(self):
        m = embed(np.arange(1.0, 11.0), EmbeddingSpec(3, 3, first=0, last=6))
        assert m.tolist() == [[1, 2, 3], [4, 5, 6], [7, 8, 9]]

    def test_overrun_names_start(self):
        with pytest.raises(PreconditionError, match="start 8"):
            embed(np.arange(10.0), EmbeddingSpec(3, 4, first=0, last=8))

    def test_bad_spec(self):
        with pytest.raises(PreconditionError):
            EmbeddingSpec(0, 1)

    def test_sample_range(self):
        spec = EmbeddingSpec(window=1000, step=500)
        assert spec.sample_range(1500) == (1500, 1999)


class TestHistogram:
    def test_pair_count(self):
        h = distance_histogram(np.random.default_rng(0).random((86, 3)), bins=20)
        assert h.distances.size == 3655
        assert h.counts.sum() == 3655

    def test_duplicate_rows(self):
        h = distance_histogram(np.array([[1.0, 2.0], [1.0, 2.0], [4.0, 6.0]]))
        assert h.distances.min() == 0.0

    def test_hand_computed(self):
        m = np.array([[0.0, 0.0], [3.0, 4.0], [0.0, 1.0], [6.0, 8.0]])
        h = distance_histogram(m, bins=4)
        assert sorted(h.distances.tolist()) == pytest.approx(sorted([5, 1, 10, np.sqrt(18), 5, np.sqrt(85)]))
        assert h.edges[0] == 1.0 and h.edges[-1] == 10.0

    def test_too_few(self):
        with pytest.raises(TooFewObjectsError):
            distance_histogram(np.zeros((1, 2)))


class TestMixture:
    def test_single_component(self):
        x = np.random.default_rng(1).standard_normal(2000)
        _, best = gmm_bic(x, 3, seed=0)
        assert best == 1

    def test_three_components(self):
        x = mixture_sample([0, 10, 20], 3000, seed=2)
        fits, best = gmm_bic(x, 4, seed=0)
        assert best == 3
        f = fits[2]
        assert np.allclose(f.means, [0, 10, 20], atol=0.2)
        assert np.allclose(f.sds, 1, atol=0.1)
        assert f.weights.sum() == pytest.approx(1.0)

    def test_bic_formula(self):
        x = mixture_sample([0, 6], 500, seed=3)
        f = fit_mixture(x, 2, seed=1)
        assert f.bic == pytest.approx(2 * f.loglik - 5 * np.log(500))

    def test_deterministic(self):
        x = mixture_sample([0, 5, 12], 800, seed=4)
        a = fit_mixture(x, 3, seed=9)
        b = fit_mixture(x, 3, seed=9)
        assert np.array_equal(a.means, b.means) and a.loglik == b.loglik

    def test_shift_invariance(self):
        x = mixture_sample([0, 8], 1000, seed=5)
        fits_a, best_a = gmm_bic(x, 3, seed=2)
        fits_b, best_b = gmm_bic(x + 1000.0, 3, seed=2)
        assert best_a == best_b == 2
        assert np.allclose(fits_b[1].means, fits_a[1].means + 1000.0, atol=1e-6)

    def test_degenerate(self):
        with pytest.raises(DegenerateInputError):
            fit_mixture(np.ones(50), 1)

    def test_single_component_closed_form(self):
        x = np.random.default_rng(6).normal(3.0, 2.0, 400)
        f = fit_mixture(x, 1)
        assert f.means[0] == pytest.approx(x.mean())
        assert f.sds[0] == pytest.approx(x.std())


class TestPeaks:
    def test_max_peaks(self):
        assert [max_peaks(c) for c in (1, 2, 3)] == [1, 3, 6]

    def test_candidates(self):
        assert candidate_cluster_counts(5)[0] == 3
        assert candidate_cluster_counts(6)[0] == 3
        assert candidate_cluster_counts(1) == [1]

    def test_planted_peak_count(self):
        # clusters centred at 0, 1 and 3 along one axis: the within-cluster
        # distances and the three between-cluster distances make four peaks
        rng = np.random.default_rng(7)
        centres = np.zeros((3, 50))
        centres[:, 0] = [0.0, 1.0, 3.0]
        pts = np.concatenate([c + 0.02 * rng.standard_normal((40, 50)) for c in centres])
        _, best = gmm_bic(pdist(pts), 6, seed=0, restarts=4)
        assert best == 4
        assert 3 in candidate_cluster_counts(best)


class TestPcoa:
    def test_collinear(self):
        x = np.array([[0.0], [1.0], [3.0]])
        r = pcoa(squareform(pdist(x)), k=2)
        assert r.variance_fractions[0] == pytest.approx(1.0)

    def test_planar_exact(self):
        x = np.random.default_rng(8).random((5, 2))
        d = squareform(pdist(x))
        r = pcoa(d, k=2)
        assert np.allclose(squareform(pdist(r.coordinates)), d, atol=1e-8)
        assert np.all(np.diff(r.variance_fractions) <= 0)

    def test_non_euclidean_reports_negative(self):
        d = np.array([[0, 1, 1, 3], [1, 0, 1, 1], [1, 1, 0, 1], [3, 1, 1, 0]], dtype=float)
        assert pcoa(d, 2).negative_fraction > 0

    def test_all_zero(self):
        r = pcoa(np.zeros((4, 4)), 2)
        assert r.degenerate and np.all(r.coordinates == 0)
        assert np.all(np.isnan(r.variance_fractions))

    def test_k_range(self):
        with pytest.raises(PreconditionError):
            pcoa(np.zeros((3, 3)), 3)


class TestSegmentation:
    def test_planted(self):
        sig = planted_signal(seed=0)
        res = segment_signal(sig, EmbeddingSpec(1000, 1000), 3)
        assert res.boundaries == [30, 60]
        assert res.segments[1].sample_first == 30000
        assert res.segments[1].sample_last == 59999

    def test_raw_embedding_agrees(self):
        sig = planted_signal(seed=1)
        a = segment_signal(sig, EmbeddingSpec(1000, 1000), 3, use_pcoa=True)
        b = segment_signal(sig, EmbeddingSpec(1000, 1000), 3, use_pcoa=False)
        assert a.boundaries == b.boundaries

    def test_constant_single_segment(self):
        res = segment_signal(np.ones(5000), EmbeddingSpec(500, 500), 1)
        assert len(res.segments) == 1
        assert res.segments[0].window_first == 0 and res.segments[0].window_last == 9

    def test_partition_of_windows(self):
        rng = np.random.default_rng(9)
        for k in (1, 2, 4, 7):
            res = segment_signal(rng.standard_normal(3000), EmbeddingSpec(200, 100), k)
            segs = res.segments
            assert len(segs) == k
            assert segs[0].window_first == 0 and segs[-1].window_last == res.starts.size - 1
            for a, b in zip(segs, segs[1:]):
                assert b.window_first == a.window_last + 1

    def test_segments_from_labels(self):
        spec = EmbeddingSpec(10, 5)
        segs = segments_from_labels([0, 0, 1, 1, 1], np.arange(0, 25, 5), spec)
        assert [s.as_dict() for s in segs] == [
            {"window_first": 0, "window_last": 1, "sample_first": 0, "sample_last": 9},
            {"window_first": 2, "window_last": 4, "sample_first": 10, "sample_last": 24},
        ]

    def test_too_many_segments(self):
        with pytest.raises(PreconditionError):
            segment_signal(np.zeros(100), EmbeddingSpec(50, 50), 3)
