"""Variational EM for the correlated topic model."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .inference import infer_document
from .model import CtmModel, VariationalState
from .numerics import SpdMatrix

EM_SLACK = 1e-6


class ElboDecreaseError(RuntimeError):
    """The corpus bound decreased beyond slack; indicates an update bug."""


@dataclass
class FitConfig:
    k: int
    em_rel_tol: float = 1e-5
    inference_rel_tol: float = 1e-6
    max_em_iters: int = 1000
    max_inference_iters: int = 500
    seed: int = 0
    topic_smoothing: float = 1e-8
    var_floor: float = 1e-6
    alpha0: float | None = None  # LDA baseline only; None means 1/K
    n_starts: int = 1
    burst_iters: int = 15

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("need at least 2 topics")
        if min(self.em_rel_tol, self.inference_rel_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if self.n_starts < 1 or self.burst_iters < 1:
            raise ValueError("n_starts and burst_iters must be positive")


@dataclass
class FitTrace:
    elbo: list[float] = field(default_factory=list)
    wall_time: list[float] = field(default_factory=list)
    n_converged: list[int] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.elbo)


def initialize(corpus: Corpus, config: FitConfig) -> CtmModel:
    """Seeded start: topics from corpus frequencies plus Dirichlet noise."""
    k, v = config.k, corpus.V
    if v <= k:
        import warnings

        warnings.warn("vocabulary not larger than topic count; fit may degenerate")
    freq = np.zeros(v)
    for doc in corpus.documents:
        freq[doc.term_ids] += doc.counts
    freq /= freq.sum()
    rng = np.random.default_rng(config.seed)
    noise = rng.dirichlet(np.ones(v), size=k)
    topics = freq[None, :] + noise
    topics /= topics.sum(axis=1, keepdims=True)
    return CtmModel(
        log_topics=np.log(topics),
        mu=np.zeros(k),
        sigma=SpdMatrix.identity(k),
        vocabulary=list(corpus.vocabulary.terms),
    )


def m_step(corpus: Corpus, states: list[VariationalState],
           config: FitConfig) -> tuple[np.ndarray, np.ndarray, SpdMatrix]:
    """Closed-form model update from expected sufficient statistics.

    Returns (log_topics, mu, sigma). Topic counts get ``topic_smoothing``
    added before normalization; the covariance diagonal is floored.
    Accumulation runs in document order so results are reproducible.
    """
    if len(states) != corpus.D:
        raise ValueError("need exactly one state per document")
    k, v = config.k, corpus.V
    beta_acc = np.zeros((k, v))
    lam_rows = np.empty((corpus.D, k))
    for d, (doc, st) in enumerate(zip(corpus.documents, states)):
        counts = np.asarray(doc.counts, dtype=float)
        beta_acc[:, doc.term_ids] += (st.phi * counts[:, None]).T
        lam_rows[d] = st.lam

    row_tot = beta_acc.sum(axis=1)
    for i in np.nonzero(row_tot == 0)[0]:
        import warnings

        warnings.warn(f"topic {i} received zero responsibility; reset to uniform")
        beta_acc[i] = 1.0
    beta_acc += config.topic_smoothing
    with np.errstate(divide="ignore"):
        log_topics = np.log(beta_acc) - np.log(beta_acc.sum(axis=1, keepdims=True))

    mu = lam_rows.mean(axis=0)
    centered = lam_rows - mu
    sigma = (centered.T @ centered) / corpus.D
    for d, st in enumerate(states):
        sigma[np.diag_indices_from(sigma)] += st.nu2 / corpus.D
    sigma = (sigma + sigma.T) / 2.0
    di = np.diag_indices_from(sigma)
    sigma[di] = np.maximum(sigma[di], config.var_floor)
    return log_topics, mu, SpdMatrix(sigma)


def e_step(corpus: Corpus, model: CtmModel, config: FitConfig,
           states: list[VariationalState] | None = None, threads: int = 1,
           traces: list | None = None) -> list[VariationalState]:
    """Infer every document against a read-only model; warm starts optional.

    Results are merged in document order so they are independent of the
    worker count.
    """

    def one(d: int) -> VariationalState:
        trace = [] if traces is not None else None
        st = infer_document(
            corpus.documents[d], model,
            init=None if states is None else states[d],
            rel_tol=config.inference_rel_tol,
            max_iters=config.max_inference_iters,
            update_trace=trace,
        )
        if traces is not None:
            traces.append((d, trace))
        return st

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(corpus.D)))
    return [one(d) for d in range(corpus.D)]


def _em_loop(corpus, config, model, states, trace, prev, t0, max_iters,
             threads, traces):
    """Run up to ``max_iters`` EM iterations, appending to an existing trace.

    Returns (model, states, last_elbo, converged). Resumable: pass the
    returned model/states/elbo back in to continue the same run.
    """
    converged = False
    for _ in range(max_iters):
        states = e_step(corpus, model, config, states, threads=threads, traces=traces)
        corpus_elbo = float(sum(st.elbo for st in states))
        if corpus_elbo < prev - EM_SLACK * abs(prev):
            raise ElboDecreaseError(
                f"corpus ELBO decreased: {prev:.6f} -> {corpus_elbo:.6f}"
            )
        trace.elbo.append(corpus_elbo)
        trace.wall_time.append(time.monotonic() - t0)
        trace.n_converged.append(sum(st.converged for st in states))
        log_topics, mu, sigma = m_step(corpus, states, config)
        model = CtmModel(log_topics, mu, sigma, vocabulary=model.vocabulary)
        if np.isfinite(prev) and abs(corpus_elbo - prev) <= config.em_rel_tol * abs(prev):
            prev = corpus_elbo
            converged = True
            break
        prev = corpus_elbo
    return model, states, prev, converged


def fit(corpus: Corpus, config: FitConfig, threads: int = 1,
        traces: list | None = None) -> tuple[CtmModel, list[VariationalState], FitTrace]:
    """Alternate full-corpus E-steps with closed-form M-steps to convergence.

    With ``n_starts > 1`` the fit runs a short EM burst from each of
    ``n_starts`` seeded initializations (seed, seed+1, ...), keeps the run
    with the highest corpus bound, and continues it to convergence. This
    guards against poor local optima and stays deterministic.
    """
    from dataclasses import replace

    t0 = time.monotonic()
    burst = min(config.burst_iters, config.max_em_iters) if config.n_starts > 1 else 0
    # Bursts only need to rank starts, so per-document inference may run looser.
    burst_config = replace(
        config, inference_rel_tol=max(config.inference_rel_tol, 1e-5)
    )
    best = None
    for r in range(config.n_starts):
        model = initialize(corpus, replace(config, seed=config.seed + r))
        run = (model, None, FitTrace(), -np.inf, False)
        if burst:
            model, states, elbo_val, _ = _em_loop(
                corpus, burst_config, model, None, run[2], -np.inf, t0, burst,
                threads, traces=None,
            )
            run = (model, states, run[2], elbo_val, False)
        if best is None or run[3] > best[3]:
            best = run
    model, states, trace, prev, converged = best
    if not converged:
        model, states, prev, converged = _em_loop(
            corpus, config, model, states, trace, prev, t0,
            config.max_em_iters - burst, threads, traces,
        )
    # Final E-step so the returned states correspond to the returned model.
    states = e_step(corpus, model, config, states, threads=threads)
    return model, states, trace
