"""Held-out likelihood, predictive perplexity, Hellinger similarity, and CV.

All estimators are seeded Monte Carlo; per-task seeds are derived from the
base seed and the task index so results do not depend on scheduling.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from .corpus import BowDocument, Corpus
from .estimation import FitConfig, fit
from .inference import infer_document
from .lda import LdaModel, lda_fit, lda_infer_document
from .model import CtmModel, VariationalState
from .numerics import log_sum_exp, softmax

log = logging.getLogger(__name__)

DEFAULT_HELDOUT_SAMPLES = 1000
DEFAULT_MOMENT_SAMPLES = 512

_LOG_2PI = np.log(2.0 * np.pi)


def _doc_arrays(doc):
    return np.asarray(doc.term_ids, dtype=int), np.asarray(doc.counts, dtype=float)


def _log_mean_exp(w) -> float:
    return log_sum_exp(w) - math.log(len(w))


def _log_mean_exp_se(w) -> float:
    """Delta-method standard error of log-mean-exp of the weights."""
    w = np.asarray(w, dtype=float)
    m = np.max(w)
    e = np.exp(w - m)
    mean = e.mean()
    sd = e.std(ddof=1) if len(w) > 1 else 0.0
    return float(sd / (mean * math.sqrt(len(w))))


def _dirichlet_logpdf(theta, alpha) -> np.ndarray:
    theta = np.clip(theta, 1e-300, None)
    return (
        gammaln(alpha.sum())
        - gammaln(alpha).sum()
        + np.log(theta) @ (alpha - 1.0)
    )


def _log_mix(log_w1, log_a, log_w2, log_b):
    with np.errstate(invalid="ignore"):
        return np.logaddexp(log_w1 + log_a, log_w2 + log_b)


def heldout_log_prob(doc, model, n_samples: int = DEFAULT_HELDOUT_SAMPLES,
                     seed: int = 0, return_se: bool = False):
    """Importance-sampled log marginal probability of a document.

    The proposal is a defensive half/half mixture of the fitted variational
    posterior and the model prior, which bounds the importance weights (at
    most twice the maximum document likelihood) so the estimator has finite
    variance and a trustworthy standard error. Topic assignments are
    marginalized analytically inside the weights.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    ids, counts = _doc_arrays(doc)
    rng = np.random.default_rng(seed)
    topics_cols = np.exp(model.log_topics[:, ids])  # (K, U)

    n_var = n_samples // 2  # remainder drawn from the prior
    with np.errstate(divide="ignore"):
        log_w_var = math.log(n_var / n_samples) if n_var else -np.inf
        log_w_pri = math.log((n_samples - n_var) / n_samples)

    if isinstance(model, CtmModel):
        state = infer_document(doc, model)
        nu = np.sqrt(state.nu2)
        z = rng.standard_normal((n_samples, model.K))
        chol = np.linalg.cholesky(model.sigma.entries)
        eta = np.vstack([
            state.lam + nu * z[:n_var],
            model.mu + z[n_var:] @ chol.T,
        ])
        dv = (eta - state.lam) / nu
        log_q_var = -0.5 * np.sum(dv * dv + np.log(state.nu2) + _LOG_2PI, axis=1)
        dm = eta - model.mu
        sol = model.sigma.solve(dm.T).T
        log_p = -0.5 * (
            np.sum(dm * sol, axis=1)
            + model.sigma.logdet()
            + model.K * _LOG_2PI
        )
        log_q = _log_mix(log_w_var, log_q_var, log_w_pri, log_p)
        theta = softmax(eta)
    elif isinstance(model, LdaModel):
        st = lda_infer_document(doc, model)
        theta = np.vstack([
            rng.dirichlet(st.gamma, size=n_var),
            rng.dirichlet(model.alpha, size=n_samples - n_var),
        ])
        log_p = _dirichlet_logpdf(theta, model.alpha)
        log_q = _log_mix(log_w_var, _dirichlet_logpdf(theta, st.gamma),
                         log_w_pri, log_p)
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")

    word_probs = theta @ topics_cols  # (n, U)
    with np.errstate(divide="ignore"):
        log_lik = np.log(word_probs) @ counts
    weights = log_p + log_lik - log_q
    if np.all(np.isneginf(weights)):
        raise ValueError("all importance weights are zero (unsmoothed topics?)")
    est = _log_mean_exp(weights)
    if return_se:
        return est, _log_mean_exp_se(weights)
    return est


def _expected_theta(obs_doc, model, n_samples, seed) -> np.ndarray:
    """Posterior mean of the topic proportions given the observed words."""
    if isinstance(model, CtmModel):
        state = infer_document(obs_doc, model)
        rng = np.random.default_rng(seed)
        eta = state.lam + np.sqrt(state.nu2) * rng.standard_normal(
            (n_samples, model.K)
        )
        return softmax(eta).mean(axis=0)
    st = lda_infer_document(obs_doc, model)
    return st.gamma / st.gamma.sum()


def _split_tokens(doc, p: int, rng) -> tuple[BowDocument | None, np.ndarray]:
    """Random token split: P observed tokens vs the held-out remainder."""
    ids, counts = _doc_arrays(doc)
    tokens = np.repeat(ids, counts.astype(int))
    perm = rng.permutation(len(tokens))
    observed, heldout = tokens[perm[:p]], tokens[perm[p:]]
    pairs = sorted(zip(*np.unique(observed, return_counts=True)))
    obs_doc = BowDocument(doc.doc_id + ":obs", [(int(a), int(b)) for a, b in pairs])
    return obs_doc, heldout


def predictive_perplexity(docs, model, p: int,
                          n_samples: int = DEFAULT_MOMENT_SAMPLES,
                          seed: int = 0) -> float:
    """Perplexity of the unobserved words given P observed words per document.

    Inverse per-word geometric mean of the predictive probabilities,
    aggregated in the log domain across documents.
    """
    total_log = 0.0
    total_words = 0
    topics = np.exp(model.log_topics)
    for idx, doc in enumerate(docs):
        if doc.N <= p:
            log.warning("document %s has N=%d <= P=%d; excluded", doc.doc_id, doc.N, p)
            continue
        rng = np.random.default_rng(seed ^ (idx + 1))
        obs_doc, heldout = _split_tokens(doc, p, rng)
        e_theta = _expected_theta(obs_doc, model, n_samples, seed ^ (idx + 1))
        predictive = e_theta @ topics  # (V,)
        total_log += float(np.sum(np.log(predictive[heldout])))
        total_words += len(heldout)
    if total_words == 0:
        raise ValueError("no document has more than P words")
    return math.exp(-total_log / total_words)


def sqrt_theta_moment(state: VariationalState,
                      n_samples: int = DEFAULT_MOMENT_SAMPLES,
                      seed: int = 0) -> np.ndarray:
    """Monte Carlo estimate of E[sqrt(theta)] under the variational posterior."""
    rng = np.random.default_rng(seed)
    k = len(state.lam)
    eta = state.lam + np.sqrt(state.nu2) * rng.standard_normal((n_samples, k))
    return np.sqrt(softmax(eta)).mean(axis=0)


def expected_hellinger(state_i: VariationalState, state_j: VariationalState,
                       n_samples: int = DEFAULT_MOMENT_SAMPLES,
                       seed: int = 0) -> float:
    """Expected squared-Hellinger-style distance 2 - 2 sum_k m_ik m_jk.

    Both moment vectors are drawn with the same seed, so the value is exactly
    symmetric under argument swap. Clamped to [0, 2].
    """
    m_i = sqrt_theta_moment(state_i, n_samples, seed)
    m_j = sqrt_theta_moment(state_j, n_samples, seed)
    return float(np.clip(2.0 - 2.0 * m_i @ m_j, 0.0, 2.0))


def rank_similar(query_index: int, states: list[VariationalState],
                 top_n: int = 10, n_samples: int = DEFAULT_MOMENT_SAMPLES,
                 seed: int = 0) -> list[tuple[int, float]]:
    """Documents nearest the query by expected Hellinger distance.

    Returns (document index, distance) pairs, ascending, ties broken by
    index; the query itself is excluded.
    """
    moments = [sqrt_theta_moment(st, n_samples, seed) for st in states]
    q = moments[query_index]
    scored = [
        (i, float(np.clip(2.0 - 2.0 * q @ m, 0.0, 2.0)))
        for i, m in enumerate(moments)
        if i != query_index
    ]
    scored.sort(key=lambda pair: (pair[1], pair[0]))
    return scored[:top_n]


@dataclass
class EvalReport:
    folds: int
    seed: int
    n_samples: int
    results: list[dict] = field(default_factory=list)
    partial: bool = False

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "folds": self.folds,
            "seed": self.seed,
            "n_samples": self.n_samples,
            "partial": self.partial,
            "results": self.results,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2), "utf-8")


def fold_partition(d: int, folds: int, seed: int) -> list[np.ndarray]:
    """Seeded partition of document indices into near-equal folds."""
    if d < folds:
        raise ValueError("need at least one document per fold")
    perm = np.random.default_rng(seed).permutation(d)
    return [perm[f::folds] for f in range(folds)]


def _subcorpus(corpus: Corpus, indices) -> Corpus:
    return Corpus(corpus.vocabulary, [corpus.documents[i] for i in sorted(indices)])


def _mean_se(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    se = arr.std(ddof=1) / math.sqrt(len(arr)) if len(arr) > 1 else 0.0
    return float(arr.mean()), float(se)


def cross_validate(corpus: Corpus, ctm_config: FitConfig, lda_config: FitConfig,
                   folds: int = 10, k_grid=None, seed: int = 0,
                   n_samples: int = DEFAULT_HELDOUT_SAMPLES,
                   threads: int = 1) -> EvalReport:
    """K-fold held-out log probability for CTM and LDA across a K grid."""
    k_grid = list(k_grid) if k_grid is not None else [ctm_config.k]
    parts = fold_partition(corpus.D, folds, seed)
    report = EvalReport(folds=folds, seed=seed, n_samples=n_samples)
    for k in k_grid:
        ctm_cfg = FitConfig(**{**ctm_config.__dict__, "k": k})
        lda_cfg = FitConfig(**{**lda_config.__dict__, "k": k})
        record = {"k": k, "folds": [], "failed_folds": []}
        ctm_totals, lda_totals = [], []
        for f, test_idx in enumerate(parts):
            train_idx = [i for i in range(corpus.D) if i not in set(test_idx.tolist())]
            try:
                train = _subcorpus(corpus, train_idx)
                ctm_model, _, _ = fit(train, ctm_cfg, threads=threads)
                lda_model, _, _ = lda_fit(train, lda_cfg, threads=threads)
                ctm_total = lda_total = 0.0
                for j, i in enumerate(sorted(test_idx.tolist())):
                    doc = corpus.documents[i]
                    task_seed = seed ^ (1000 * f + j + 1)
                    ctm_total += heldout_log_prob(doc, ctm_model, n_samples, task_seed)
                    lda_total += heldout_log_prob(doc, lda_model, n_samples, task_seed)
            except Exception as exc:  # noqa: BLE001 - fold failure is reported, not fatal
                log.warning("fold %d failed for K=%d: %s", f, k, exc)
                record["failed_folds"].append(f)
                report.partial = True
                continue
            record["folds"].append(
                {"fold": f, "ctm": ctm_total, "lda": lda_total,
                 "diff": ctm_total - lda_total, "n_test": len(test_idx)}
            )
            ctm_totals.append(ctm_total)
            lda_totals.append(lda_total)
        if ctm_totals:
            diffs = [a - b for a, b in zip(ctm_totals, lda_totals)]
            record["ctm_mean"], record["ctm_se"] = _mean_se(ctm_totals)
            record["lda_mean"], record["lda_se"] = _mean_se(lda_totals)
            record["diff_mean"], record["diff_se"] = _mean_se(diffs)
        report.results.append(record)
    return report
