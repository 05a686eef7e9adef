import math

import numpy as np
import pytest

from oracles import (
    ctm_log_marginal_quadrature,
    lda_log_marginal_enumeration,
    sqrt_theta_moment_quadrature,
)

from ctm.corpus import BowDocument, Corpus, Vocabulary
from ctm.estimation import FitConfig
from ctm.evaluation import (
    EvalReport,
    cross_validate,
    expected_hellinger,
    fold_partition,
    heldout_log_prob,
    predictive_perplexity,
    rank_similar,
    sqrt_theta_moment,
)
from ctm.inference import infer_document
from ctm.lda import LdaModel
from ctm.model import CtmModel, VariationalState
from ctm.numerics import SpdMatrix
from ctm.synthetic import sample_ctm_corpus


def identical_topic_model(v=4, k=2):
    # every topic is the same distribution, so p(w) is theta-independent
    row = np.linspace(1, v, v)
    row = row / row.sum()
    return CtmModel(np.log(np.tile(row, (k, 1))), np.zeros(k),
                    SpdMatrix.identity(k))


def point_mass_state(lam, nu2=1e-10):
    lam = np.asarray(lam, dtype=float)
    return VariationalState(lam, np.full(len(lam), nu2), np.zeros((0, len(lam))),
                            0.0)


class TestHeldoutLogProb:
    def test_identical_topics_reduce_to_word_probabilities(self):
        # identical topics make the document probability independent of the
        # mixing proportions, so the marginal is the plain word product
        model = identical_topic_model()
        doc = BowDocument("d", [(0, 2), (3, 1)])
        probs = np.exp(model.log_topics[0])
        expected = 2 * math.log(probs[0]) + math.log(probs[3])
        est, se = heldout_log_prob(doc, model, n_samples=20000, seed=1,
                                   return_se=True)
        assert abs(est - expected) <= 3 * se + 1e-4

    def test_matches_quadrature(self):
        rng = np.random.default_rng(5)
        topics = rng.dirichlet(np.ones(5), size=2)
        model = CtmModel(np.log(topics), np.array([0.3, -0.2]),
                         SpdMatrix(np.array([[1.0, 0.4], [0.4, 1.5]])))
        doc = BowDocument("d", [(0, 2), (3, 1), (4, 1)])
        truth = ctm_log_marginal_quadrature(doc, model.log_topics, model.mu,
                                            model.sigma.entries)
        est, se = heldout_log_prob(doc, model, n_samples=20000, seed=7,
                                   return_se=True)
        assert abs(est - truth) <= 3 * se + 1e-4

    def test_at_least_variational_bound(self):
        for seed in range(5):
            corpus, model = sample_ctm_corpus(3, 12, 1, 30, seed=seed)
            doc = corpus.documents[0]
            state = infer_document(doc, model)
            est, se = heldout_log_prob(doc, model, n_samples=5000,
                                       seed=seed, return_se=True)
            assert est >= state.elbo - 3 * se - 1e-6

    def test_lda_matches_enumeration(self):
        topics = np.array([[0.6, 0.3, 0.1], [0.1, 0.3, 0.6]])
        model = LdaModel(np.log(topics), np.array([0.7, 0.4]))
        doc = BowDocument("d", [(0, 2), (2, 1)])
        truth = lda_log_marginal_enumeration(doc, model.log_topics, model.alpha)
        est, se = heldout_log_prob(doc, model, n_samples=50000, seed=3,
                                   return_se=True)
        assert abs(est - truth) <= 3 * se + 1e-4

    def test_seeded_and_deterministic(self):
        model = identical_topic_model()
        doc = BowDocument("d", [(1, 2)])
        assert heldout_log_prob(doc, model, 64, seed=2) == heldout_log_prob(
            doc, model, 64, seed=2
        )

    def test_rejects_zero_samples(self):
        with pytest.raises(ValueError):
            heldout_log_prob(BowDocument("d", [(0, 1)]),
                             identical_topic_model(), n_samples=0)


class TestPredictivePerplexity:
    def test_uniform_model_gives_vocabulary_size(self):
        v = 7
        model = identical_topic_model(v=v)
        uniform = CtmModel(np.full((2, v), -math.log(v)), model.mu, model.sigma)
        docs = [
            BowDocument(f"d{i}", sorted([(i % v, 5), ((i + 2) % v, 4)]))
            for i in range(6)
        ]
        perp = predictive_perplexity(docs, uniform, p=3, n_samples=64, seed=0)
        assert perp == pytest.approx(v, rel=1e-9)

    def test_short_documents_excluded_with_warning(self, caplog):
        model = identical_topic_model(v=4)
        docs = [BowDocument("long", [(0, 6), (1, 4)]),
                BowDocument("short", [(0, 2)])]
        with caplog.at_level("WARNING", logger="ctm.evaluation"):
            predictive_perplexity(docs, model, p=3, n_samples=32, seed=0)
        assert "short" in caplog.text

    def test_all_documents_too_short(self):
        model = identical_topic_model(v=4)
        with pytest.raises(ValueError):
            predictive_perplexity([BowDocument("d", [(0, 2)])], model, p=5)

    def test_true_model_beats_corrupted_model(self):
        corpus, truth = sample_ctm_corpus(3, 18, 40, 40, seed=9)
        rng = np.random.default_rng(10)
        noisy = rng.dirichlet(np.ones(18), size=3)
        corrupted = CtmModel(np.log(noisy), truth.mu, truth.sigma)
        p_true = predictive_perplexity(corpus.documents, truth, p=10,
                                       n_samples=128, seed=4)
        p_bad = predictive_perplexity(corpus.documents, corrupted, p=10,
                                      n_samples=128, seed=4)
        assert p_true < p_bad


class TestHellinger:
    def test_quadrature_oracle(self):
        lam_i, nu2_i = np.array([0.5, -0.3]), np.array([0.4, 0.7])
        lam_j, nu2_j = np.array([-1.0, 0.8]), np.array([0.9, 0.2])
        m_i = sqrt_theta_moment_quadrature(lam_i, nu2_i)
        m_j = sqrt_theta_moment_quadrature(lam_j, nu2_j)
        truth = 2.0 - 2.0 * m_i @ m_j
        si = VariationalState(lam_i, nu2_i, np.zeros((0, 2)), 0.0)
        sj = VariationalState(lam_j, nu2_j, np.zeros((0, 2)), 0.0)
        est = expected_hellinger(si, sj, n_samples=200_000, seed=11)
        assert est == pytest.approx(truth, abs=0.01)

    def test_exact_symmetry(self):
        rng = np.random.default_rng(12)
        si = point_mass_state(rng.standard_normal(3), 0.5)
        sj = point_mass_state(rng.standard_normal(3), 0.5)
        assert expected_hellinger(si, sj, seed=5) == expected_hellinger(
            sj, si, seed=5
        )

    def test_range_and_extremes(self):
        near_zero = expected_hellinger(point_mass_state([8.0, -8.0]),
                                       point_mass_state([8.0, -8.0]), seed=1)
        assert near_zero == pytest.approx(0.0, abs=1e-6)
        near_two = expected_hellinger(point_mass_state([20.0, -20.0]),
                                      point_mass_state([-20.0, 20.0]), seed=1)
        assert near_two == pytest.approx(2.0, abs=1e-6)
        rng = np.random.default_rng(13)
        for _ in range(20):
            a = point_mass_state(rng.standard_normal(4), 1.0)
            b = point_mass_state(rng.standard_normal(4), 1.0)
            assert 0.0 <= expected_hellinger(a, b, n_samples=64, seed=2) <= 2.0


class TestRankSimilar:
    def make_states(self, lams):
        return [point_mass_state(lam) for lam in lams]

    def test_query_excluded_and_sorted(self):
        states = self.make_states([[5, -5, 0], [5, -5, 0], [0, 0, 0],
                                   [-5, 5, 0], [4, -4, 0]])
        ranked = rank_similar(0, states, top_n=4, n_samples=2000, seed=0)
        assert [i for i, _ in ranked] == [1, 4, 2, 3]
        dists = [d for _, d in ranked]
        assert dists == sorted(dists)
        assert ranked[0][1] == pytest.approx(0.0, abs=1e-3)

    def test_duplicate_of_query_ranks_first(self):
        rng = np.random.default_rng(14)
        lams = [rng.standard_normal(4) for _ in range(8)]
        lams.append(lams[2].copy())
        ranked = rank_similar(2, self.make_states(lams), top_n=3,
                              n_samples=1000, seed=3)
        assert ranked[0][0] == 8

    def test_top_n_truncates(self):
        states = self.make_states(np.random.default_rng(15).standard_normal((6, 3)))
        assert len(rank_similar(0, states, top_n=2, n_samples=32, seed=0)) == 2


class TestFoldPartition:
    def test_partition_properties(self):
        parts = fold_partition(23, 5, seed=3)
        all_idx = np.concatenate(parts)
        assert sorted(all_idx.tolist()) == list(range(23))
        sizes = [len(p) for p in parts]
        assert max(sizes) - min(sizes) <= 1

    def test_seeded(self):
        a = fold_partition(10, 3, seed=1)
        b = fold_partition(10, 3, seed=1)
        c = fold_partition(10, 3, seed=2)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
        assert any(not np.array_equal(x, y) for x, y in zip(a, c))

    def test_too_few_documents(self):
        with pytest.raises(ValueError):
            fold_partition(2, 3, seed=0)


class TestCrossValidate:
    def test_report_structure_and_determinism(self):
        corpus, _ = sample_ctm_corpus(2, 10, 12, 20, seed=20)
        cfg = FitConfig(k=2, em_rel_tol=1e-2, max_em_iters=5)
        r1 = cross_validate(corpus, cfg, cfg, folds=3, k_grid=[2], seed=6,
                            n_samples=100)
        r2 = cross_validate(corpus, cfg, cfg, folds=3, k_grid=[2], seed=6,
                            n_samples=100)
        assert r1.to_json() == r2.to_json()
        rec = r1.results[0]
        assert rec["k"] == 2
        assert len(rec["folds"]) == 3
        assert rec["failed_folds"] == []
        for fold in rec["folds"]:
            assert fold["diff"] == pytest.approx(fold["ctm"] - fold["lda"])
        assert rec["diff_mean"] == pytest.approx(
            np.mean([f["diff"] for f in rec["folds"]])
        )

    def test_save_round_trip(self, tmp_path):
        import json

        report = EvalReport(folds=2, seed=0, n_samples=10,
                            results=[{"k": 2, "folds": []}])
        report.save(tmp_path / "report.json")
        doc = json.loads((tmp_path / "report.json").read_text("utf-8"))
        assert doc["folds"] == 2
        assert doc["results"][0]["k"] == 2
