"""Latent Dirichlet allocation baseline, fit by variational EM.

Used for the quantitative comparisons only; alpha stays fixed and symmetric
(configurable) so the Dirichlet-vs-logistic-normal contrast is isolated.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln, psi

from .corpus import Corpus
from .estimation import EM_SLACK, ElboDecreaseError, FitConfig, FitTrace, initialize
from .inference import UnmodelableWordError
from .model import MODEL_SCHEMA_VERSION


@dataclass
class LdaModel:
    log_topics: np.ndarray
    alpha: np.ndarray
    vocabulary: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.log_topics = np.asarray(self.log_topics, dtype=float)
        self.alpha = np.asarray(self.alpha, dtype=float)
        if np.any(self.alpha <= 0):
            raise ValueError("alpha must be positive")
        row_sums = np.exp(self.log_topics).sum(axis=1)
        if np.max(np.abs(row_sums - 1.0)) > 1e-8:
            raise ValueError("topic rows must sum to 1")

    @property
    def K(self) -> int:
        return self.log_topics.shape[0]

    @property
    def V(self) -> int:
        return self.log_topics.shape[1]

    def top_words(self, topic: int, n: int = 20) -> list[tuple[str, float]]:
        probs = np.exp(self.log_topics[topic])
        order = np.argsort(-probs)[:n]
        vocab = self.vocabulary or [str(i) for i in range(self.V)]
        return [(vocab[i], float(probs[i])) for i in order]


@dataclass
class LdaState:
    gamma: np.ndarray
    phi: np.ndarray
    elbo: float
    converged: bool = True


def _doc_arrays(doc):
    return np.asarray(doc.term_ids, dtype=int), np.asarray(doc.counts, dtype=float)


def lda_elbo(doc, model: LdaModel, gamma, phi) -> float:
    ids, counts = _doc_arrays(doc)
    alpha = model.alpha
    e_log_theta = psi(gamma) - psi(gamma.sum())
    logb = model.log_topics[:, ids].T

    value = gammaln(alpha.sum()) - gammaln(alpha).sum() + (alpha - 1.0) @ e_log_theta
    value += counts @ (phi @ e_log_theta)
    value += counts @ np.sum(np.where(phi > 0, phi * logb, 0.0), axis=1)
    value -= gammaln(gamma.sum()) - gammaln(gamma).sum() + (gamma - 1.0) @ e_log_theta
    value -= counts @ np.sum(np.where(phi > 0, phi * np.log(phi), 0.0), axis=1)
    return float(value)


def lda_infer_document(doc, model: LdaModel, rel_tol: float = 1e-6,
                       max_iters: int = 500) -> LdaState:
    """Standard coordinate ascent on the LDA document bound."""
    ids, counts = _doc_arrays(doc)
    k = model.K
    gamma = model.alpha + counts.sum() / k
    phi = np.full((len(ids), k), 1.0 / k)
    prev = lda_elbo(doc, model, gamma, phi)
    converged = False
    for _ in range(max_iters):
        e_log_theta = psi(gamma) - psi(gamma.sum())
        log_phi = e_log_theta[None, :] + model.log_topics[:, ids].T
        row_max = np.max(log_phi, axis=1)
        if np.any(np.isneginf(row_max)):
            bad = ids[np.isneginf(row_max)][0]
            raise UnmodelableWordError(
                f"term {bad} has zero probability in every topic"
            )
        phi = np.exp(log_phi - row_max[:, None])
        phi /= phi.sum(axis=1, keepdims=True)
        gamma = model.alpha + counts @ phi
        current = lda_elbo(doc, model, gamma, phi)
        if abs(current - prev) <= rel_tol * abs(prev):
            prev = current
            converged = True
            break
        prev = current
    return LdaState(gamma, phi, prev, converged)


def lda_e_step(corpus: Corpus, model: LdaModel, config: FitConfig,
               threads: int = 1) -> list[LdaState]:
    def one(d: int) -> LdaState:
        return lda_infer_document(
            corpus.documents[d], model,
            rel_tol=config.inference_rel_tol,
            max_iters=config.max_inference_iters,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(corpus.D)))
    return [one(d) for d in range(corpus.D)]


def lda_m_step(corpus: Corpus, states: list[LdaState],
               config: FitConfig) -> np.ndarray:
    beta_acc = np.zeros((config.k, corpus.V))
    for doc, st in zip(corpus.documents, states):
        counts = np.asarray(doc.counts, dtype=float)
        beta_acc[:, doc.term_ids] += (st.phi * counts[:, None]).T
    row_tot = beta_acc.sum(axis=1)
    for i in np.nonzero(row_tot == 0)[0]:
        import warnings

        warnings.warn(f"topic {i} received zero responsibility; reset to uniform")
        beta_acc[i] = 1.0
    beta_acc += config.topic_smoothing
    return np.log(beta_acc) - np.log(beta_acc.sum(axis=1, keepdims=True))


def lda_fit(corpus: Corpus, config: FitConfig,
            threads: int = 1) -> tuple[LdaModel, list[LdaState], FitTrace]:
    """Variational EM with fixed symmetric alpha (default 1/K)."""
    seed_model = initialize(corpus, config)
    alpha0 = config.alpha0 if config.alpha0 is not None else 1.0 / config.k
    model = LdaModel(seed_model.log_topics, np.full(config.k, alpha0),
                     vocabulary=seed_model.vocabulary)
    trace = FitTrace()
    prev = -np.inf
    states = None
    t0 = time.monotonic()
    for _ in range(config.max_em_iters):
        states = lda_e_step(corpus, model, config, threads=threads)
        corpus_elbo = float(sum(st.elbo for st in states))
        if corpus_elbo < prev - EM_SLACK * abs(prev):
            raise ElboDecreaseError(
                f"corpus ELBO decreased: {prev:.6f} -> {corpus_elbo:.6f}"
            )
        trace.elbo.append(corpus_elbo)
        trace.wall_time.append(time.monotonic() - t0)
        trace.n_converged.append(sum(st.converged for st in states))
        model = LdaModel(lda_m_step(corpus, states, config), model.alpha,
                         vocabulary=model.vocabulary)
        if np.isfinite(prev) and abs(corpus_elbo - prev) <= config.em_rel_tol * abs(prev):
            prev = corpus_elbo
            break
        prev = corpus_elbo
    states = lda_e_step(corpus, model, config, threads=threads)
    return model, states, trace


def save_lda_model(model: LdaModel, path, config: dict | None = None,
                   meta: dict | None = None) -> None:
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "model_type": "lda",
        "K": model.K,
        "V": model.V,
        "vocabulary": model.vocabulary,
        "log_topics": model.log_topics.tolist(),
        "alpha": model.alpha.tolist(),
        "config": config or {},
        "meta": meta or {},
    }
    Path(path).write_text(json.dumps(doc), "utf-8")
