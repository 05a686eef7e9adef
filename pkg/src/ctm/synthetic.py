"""Synthetic corpus generators for tests, demos, and directional checks."""

from __future__ import annotations

import numpy as np

from .corpus import BowDocument, Corpus, Vocabulary
from .model import CtmModel
from .numerics import SpdMatrix, softmax


def block_topics(k: int, v: int, in_block_mass: float = 0.9) -> np.ndarray:
    """Well-separated topics: each concentrates most mass on its own block."""
    topics = np.full((k, v), (1.0 - in_block_mass) / v)
    bounds = np.linspace(0, v, k + 1).astype(int)
    for i in range(k):
        lo, hi = bounds[i], bounds[i + 1]
        topics[i, lo:hi] += in_block_mass / (hi - lo)
    return topics / topics.sum(axis=1, keepdims=True)


def correlated_sigma(k: int, rho: float = 0.8, pairs=None) -> np.ndarray:
    """Unit-variance covariance with strong correlation on the given pairs.

    Defaults to correlating consecutive disjoint pairs (0,1), (2,3), ...
    """
    sigma = np.eye(k)
    if pairs is None:
        pairs = [(i, i + 1) for i in range(0, k - 1, 2)]
    for s, t in pairs:
        sigma[s, t] = sigma[t, s] = rho
    return sigma


def sample_ctm_corpus(
    k: int,
    v: int,
    d: int,
    doc_len: int,
    seed: int = 0,
    topics: np.ndarray | None = None,
    mu: np.ndarray | None = None,
    sigma: np.ndarray | None = None,
) -> tuple[Corpus, CtmModel]:
    """Draw a corpus from a known CTM; returns (corpus, generating model)."""
    rng = np.random.default_rng(seed)
    if topics is None:
        topics = block_topics(k, v)
    mu = np.zeros(k) if mu is None else np.asarray(mu, dtype=float)
    sigma = np.eye(k) if sigma is None else np.asarray(sigma, dtype=float)
    chol = np.linalg.cholesky(sigma)

    vocab = Vocabulary([f"term{i:04d}" for i in range(v)])
    documents = []
    for di in range(d):
        eta = mu + chol @ rng.standard_normal(k)
        theta = softmax(eta)
        word_dist = theta @ topics
        counts = rng.multinomial(doc_len, word_dist)
        entries = [(int(t), int(c)) for t, c in enumerate(counts) if c > 0]
        documents.append(BowDocument(f"doc{di:05d}", entries, title=f"Synthetic {di}"))
    model = CtmModel(np.log(topics), mu, SpdMatrix(sigma), vocabulary=vocab.terms)
    return Corpus(vocab, documents), model


def sample_lda_corpus(k: int, v: int, d: int, doc_len: int, alpha: float = 0.5,
                      seed: int = 0, topics: np.ndarray | None = None) -> Corpus:
    """Draw a corpus from a known LDA model."""
    rng = np.random.default_rng(seed)
    if topics is None:
        topics = block_topics(k, v)
    vocab = Vocabulary([f"term{i:04d}" for i in range(v)])
    documents = []
    for di in range(d):
        theta = rng.dirichlet(np.full(k, alpha))
        counts = rng.multinomial(doc_len, theta @ topics)
        entries = [(int(t), int(c)) for t, c in enumerate(counts) if c > 0]
        documents.append(BowDocument(f"doc{di:05d}", entries))
    return Corpus(vocab, documents)


def demo_corpus(seed: int = 20070301) -> tuple[Corpus, CtmModel]:
    """The bundled 200-document synthetic corpus used by the demo pipeline.

    K=5, V=60, 80 words per document, with topics 0-1 strongly correlated.
    """
    sigma = correlated_sigma(5, rho=0.8, pairs=[(0, 1)])
    return sample_ctm_corpus(5, 60, 200, 80, seed=seed, sigma=sigma)


def greedy_topic_match(true_topics, fitted_topics) -> list[int]:
    """Greedy permutation matching fitted topics to true topics by TV distance."""
    true_topics = np.asarray(true_topics)
    fitted_topics = np.asarray(fitted_topics)
    k = true_topics.shape[0]
    tv = 0.5 * np.abs(true_topics[:, None, :] - fitted_topics[None, :, :]).sum(axis=2)
    assignment = [-1] * k
    used = set()
    for _ in range(k):
        best = None
        for i in range(k):
            if assignment[i] >= 0:
                continue
            for j in range(k):
                if j in used:
                    continue
                if best is None or tv[i, j] < best[2]:
                    best = (i, j, tv[i, j])
        assignment[best[0]] = best[1]
        used.add(best[1])
    return assignment


def mean_tv_after_matching(true_topics, fitted_topics) -> float:
    """Mean total-variation distance under the greedy permutation."""
    true_topics = np.asarray(true_topics)
    fitted_topics = np.asarray(fitted_topics)
    perm = greedy_topic_match(true_topics, fitted_topics)
    tv = [
        0.5 * np.abs(true_topics[i] - fitted_topics[perm[i]]).sum()
        for i in range(len(perm))
    ]
    return float(np.mean(tv))
