"""Sparse topic graphs via l1-penalized neighborhood regression.

Each topic's variational-mean column is regressed onto the others with a
lasso penalty (intercept unpenalized); nonzero coefficients define estimated
neighborhoods, reconciled into an undirected graph by an AND or OR rule.

``lasso_regress`` minimizes 0.5 * ||y - A kappa||^2 + rho * ||kappa_no_icept||_1
with an unnormalized residual sum of squares, so its ``rho`` is an absolute
penalty. ``neighborhoods`` and ``build_graph`` take a *per-sample* penalty
rho_n and pass rho_n * D down, which keeps graph sparsity comparable across
corpus sizes (rho_n = 0.1 is the usual default).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

NONZERO_TOL = 1e-10
KKT_TOL = 1e-7
MAX_SWEEPS = 10_000


@dataclass
class LassoFit:
    target: int
    coefficients: np.ndarray  # kappa[target] is the intercept
    rho: float
    converged: bool = True

    @property
    def intercept(self) -> float:
        return float(self.coefficients[self.target])

    def neighbors(self) -> list[int]:
        return [
            t
            for t in range(len(self.coefficients))
            if t != self.target and abs(self.coefficients[t]) > NONZERO_TOL
        ]


@dataclass
class TopicGraph:
    n_topics: int
    edges: list[tuple[int, int]]
    rule: str
    rho: float
    weights: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        for s, t in self.edges:
            if s == t:
                raise ValueError("self-edges are not allowed")
            if not (0 <= s < t < self.n_topics):
                raise ValueError("edges must be ordered pairs of valid topic ids")


def standardize(lam_matrix) -> np.ndarray:
    """Center and scale each column to mean 0, sample sd 1 (n-1 convention)."""
    x = np.asarray(lam_matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least two rows to standardize")
    sd = x.std(axis=0, ddof=1)
    dead = np.nonzero(sd == 0)[0]
    if dead.size:
        raise ValueError(f"topic {dead[0]} has zero variance across documents")
    return (x - x.mean(axis=0)) / sd


def soft_threshold(z: float, t: float) -> float:
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


def lasso_objective(a, y, kappa, rho, target) -> float:
    r = y - a @ kappa
    penalty = rho * (np.sum(np.abs(kappa)) - abs(kappa[target]))
    return float(0.5 * r @ r + penalty)


def lasso_regress(x, target: int, rho: float) -> LassoFit:
    """Coordinate-descent lasso of column ``target`` on the remaining columns.

    Column ``target`` of the design is replaced by an all-ones intercept
    column, which is left unpenalized. Sweeps run until the KKT conditions
    hold to ``KKT_TOL``.
    """
    x = np.asarray(x, dtype=float)
    if rho < 0:
        raise ValueError("penalty must be nonnegative")
    d, k = x.shape
    y = x[:, target].copy()
    a = x.copy()
    a[:, target] = 1.0
    col_sq = np.sum(a * a, axis=0)

    kappa = np.zeros(k)
    r = y.copy()  # residual y - a @ kappa
    converged = False
    for _ in range(MAX_SWEEPS):
        for j in range(k):
            zj = col_sq[j] * kappa[j] + a[:, j] @ r
            new = zj / col_sq[j] if j == target else soft_threshold(zj, rho) / col_sq[j]
            if new != kappa[j]:
                r += a[:, j] * (kappa[j] - new)
                kappa[j] = new
        if _kkt_satisfied(a, r, kappa, rho, target):
            converged = True
            break
    return LassoFit(target, kappa, rho, converged)


def _kkt_satisfied(a, r, kappa, rho, target) -> bool:
    grad = a.T @ r  # gradient of -0.5||y - a k||^2 wrt kappa, negated
    for j in range(len(kappa)):
        if j == target:
            if abs(grad[j]) > KKT_TOL:
                return False
        elif kappa[j] == 0.0:
            if abs(grad[j]) > rho + KKT_TOL:
                return False
        else:
            if abs(grad[j] - rho * np.sign(kappa[j])) > KKT_TOL:
                return False
    return True


def kkt_residual(x, fit: LassoFit) -> float:
    """Worst-case KKT violation of a fit, for post-hoc verification."""
    x = np.asarray(x, dtype=float)
    a = x.copy()
    a[:, fit.target] = 1.0
    r = x[:, fit.target] - a @ fit.coefficients
    grad = a.T @ r
    worst = 0.0
    for j in range(len(fit.coefficients)):
        if j == fit.target:
            worst = max(worst, abs(grad[j]))
        elif fit.coefficients[j] == 0.0:
            worst = max(worst, abs(grad[j]) - fit.rho)
        else:
            worst = max(worst, abs(grad[j] - fit.rho * np.sign(fit.coefficients[j])))
    return worst


def neighborhoods(x, rho: float) -> list[list[int]]:
    """Estimated neighbor sets for every topic (nonzero lasso coefficients).

    ``rho`` is per sample; the absolute penalty passed to the solver is
    rho * rows(x).
    """
    x = np.asarray(x, dtype=float)
    eff = rho * x.shape[0]
    return [lasso_regress(x, s, eff).neighbors() for s in range(x.shape[1])]


def build_graph(lam_matrix, rho: float, rule: str = "and",
                standardized: bool = False) -> TopicGraph:
    """Topic graph from variational means via per-topic lasso neighborhoods.

    ``rho`` is the per-sample penalty (see module docstring).
    """
    rule = rule.lower()
    if rule not in ("and", "or"):
        raise ValueError("rule must be 'and' or 'or'")
    x = np.asarray(lam_matrix, dtype=float)
    if not standardized:
        x = standardize(x)
    k = x.shape[1]
    fits = [lasso_regress(x, s, rho * x.shape[0]) for s in range(k)]
    edge_pairs = edges_from_fits(fits, rule)
    edges, weights = [], {}
    for s, t in edge_pairs:
        st, ts = fits[s].coefficients[t], fits[t].coefficients[s]
        edges.append((s, t))
        weights[(s, t)] = max(abs(st), abs(ts))
    return TopicGraph(k, edges, rule, rho, weights)


def edges_from_fits(fits: list[LassoFit], rule: str) -> list[tuple[int, int]]:
    """Reconcile per-topic neighborhoods into an undirected edge list."""
    k = len(fits)
    edges = []
    for s in range(k):
        for t in range(s + 1, k):
            in_s = abs(fits[s].coefficients[t]) > NONZERO_TOL
            in_t = abs(fits[t].coefficients[s]) > NONZERO_TOL
            keep = (in_s and in_t) if rule == "and" else (in_s or in_t)
            if keep:
                edges.append((s, t))
    return edges


def graph_to_json(graph: TopicGraph, model=None, prevalence=None) -> dict:
    """JSON-ready dict: nodes with top words, edges with weights."""
    nodes = []
    for i in range(graph.n_topics):
        node = {"id": i}
        if model is not None:
            node["top_words"] = [[w, p] for w, p in model.top_words(i, 10)]
        if prevalence is not None:
            node["prevalence"] = float(prevalence[i])
        nodes.append(node)
    return {
        "rule": graph.rule,
        "rho": graph.rho,
        "nodes": nodes,
        "edges": [
            {"source": s, "target": t, "weight": graph.weights.get((s, t), 0.0)}
            for s, t in graph.edges
        ],
    }


def graph_to_dot(graph: TopicGraph, model=None) -> str:
    lines = ["graph topics {"]
    for i in range(graph.n_topics):
        label = str(i)
        if model is not None:
            label = f"{i}: " + ", ".join(w for w, _ in model.top_words(i, 3))
        lines.append(f'  t{i} [label="{label}"];')
    for s, t in graph.edges:
        w = graph.weights.get((s, t), 0.0)
        lines.append(f'  t{s} -- t{t} [weight={w:.4f}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_graph(graph: TopicGraph, path_prefix, model=None, prevalence=None) -> None:
    prefix = Path(path_prefix)
    doc = graph_to_json(graph, model, prevalence)
    doc["schema_version"] = 1
    # extensions are appended, not substituted: the prefix may contain dots
    # (e.g. "graph_rho0.01")
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.json").write_text(json.dumps(doc, indent=2), "utf-8")
    Path(f"{prefix}.dot").write_text(graph_to_dot(graph, model), "utf-8")
