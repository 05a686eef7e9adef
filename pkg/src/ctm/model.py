"""Model containers and JSON persistence for CTM and LDA models."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numerics import SpdMatrix

MODEL_SCHEMA_VERSION = 1


class SchemaVersionError(ValueError):
    """Artifact schema version does not match this library."""


@dataclass
class CtmModel:
    """Correlated topic model: topics plus a Gaussian over topic proportions.

    Topics are stored in the log domain, shape (K, V); each row exponentiates
    to a point on the vocabulary simplex.
    """

    log_topics: np.ndarray
    mu: np.ndarray
    sigma: SpdMatrix
    vocabulary: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.log_topics = np.asarray(self.log_topics, dtype=float)
        self.mu = np.asarray(self.mu, dtype=float)
        k, v = self.log_topics.shape
        if k < 2:
            raise ValueError("CTM requires at least 2 topics")
        row_sums = np.exp(self.log_topics).sum(axis=1)
        if np.max(np.abs(row_sums - 1.0)) > 1e-8:
            raise ValueError("topic rows must sum to 1")
        if self.mu.shape != (k,) or self.sigma.dim != k:
            raise ValueError("mu/sigma dimensions must match topic count")
        if self.vocabulary and len(self.vocabulary) != v:
            raise ValueError("vocabulary length must match topic width")

    @property
    def K(self) -> int:
        return self.log_topics.shape[0]

    @property
    def V(self) -> int:
        return self.log_topics.shape[1]

    @property
    def topics(self) -> np.ndarray:
        return np.exp(self.log_topics)

    def top_words(self, topic: int, n: int = 20) -> list[tuple[str, float]]:
        probs = np.exp(self.log_topics[topic])
        order = np.argsort(-probs)[:n]
        vocab = self.vocabulary or [str(i) for i in range(self.V)]
        return [(vocab[i], float(probs[i])) for i in order]


@dataclass
class VariationalState:
    """Per-document variational parameters and the attained bound.

    ``phi`` has one simplex row per *unique* term in the document; identical
    words share a row and are weighted by their counts everywhere.
    """

    lam: np.ndarray
    nu2: np.ndarray
    phi: np.ndarray
    log_zeta: float
    elbo: float = float("-inf")
    converged: bool = True
    degraded: bool = False

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        self.nu2 = np.asarray(self.nu2, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if np.any(self.nu2 <= 0):
            raise ValueError("variational variances must be positive")

    @property
    def zeta(self) -> float:
        return float(np.exp(self.log_zeta))


def _floats(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def save_ctm_model(model: CtmModel, path, config: dict | None = None,
                   meta: dict | None = None) -> None:
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "model_type": "ctm",
        "K": model.K,
        "V": model.V,
        "vocabulary": model.vocabulary,
        "log_topics": _floats(model.log_topics),
        "mu": _floats(model.mu),
        "sigma": _floats(model.sigma.entries),
        "config": config or {},
        "meta": meta or {},
    }
    Path(path).write_text(json.dumps(doc), "utf-8")


def load_model(path):
    """Load a model JSON; returns a CtmModel or LdaModel by its type tag."""
    doc = json.loads(Path(path).read_text("utf-8"))
    if doc.get("schema_version") != MODEL_SCHEMA_VERSION:
        raise SchemaVersionError(
            f"model schema version {doc.get('schema_version')} != {MODEL_SCHEMA_VERSION}"
        )
    if doc["model_type"] == "ctm":
        return CtmModel(
            log_topics=np.array(doc["log_topics"]),
            mu=np.array(doc["mu"]),
            sigma=SpdMatrix(np.array(doc["sigma"])),
            vocabulary=doc.get("vocabulary", []),
        )
    if doc["model_type"] == "lda":
        from .lda import LdaModel

        return LdaModel(
            log_topics=np.array(doc["log_topics"]),
            alpha=np.array(doc["alpha"]),
            vocabulary=doc.get("vocabulary", []),
        )
    raise ValueError(f"unknown model type {doc['model_type']!r}")


def save_states(states, doc_ids, path) -> None:
    """Persist per-document variational summaries (lambda, nu2, zeta, elbo)."""
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "documents": [
            {
                "doc_id": doc_id,
                "lambda": _floats(s.lam),
                "nu2": _floats(s.nu2),
                "log_zeta": float(s.log_zeta),
                "elbo": float(s.elbo),
                "converged": bool(s.converged),
            }
            for doc_id, s in zip(doc_ids, states)
        ],
    }
    Path(path).write_text(json.dumps(doc), "utf-8")


def load_states(path) -> tuple[list[str], list[VariationalState]]:
    doc = json.loads(Path(path).read_text("utf-8"))
    if doc.get("schema_version") != MODEL_SCHEMA_VERSION:
        raise SchemaVersionError(
            f"states schema version {doc.get('schema_version')} != {MODEL_SCHEMA_VERSION}"
        )
    ids, states = [], []
    for rec in doc["documents"]:
        ids.append(rec["doc_id"])
        states.append(
            VariationalState(
                lam=np.array(rec["lambda"]),
                nu2=np.array(rec["nu2"]),
                phi=np.zeros((0, len(rec["lambda"]))),
                log_zeta=rec["log_zeta"],
                elbo=rec["elbo"],
                converged=rec["converged"],
            )
        )
    return ids, states
