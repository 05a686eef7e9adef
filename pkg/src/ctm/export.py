"""Static browser export: a self-contained directory of JSON artifacts.

The browser UI consumes these files directly; Hellinger similarity is
computed client-side from the exported sqrt-theta moment vectors, keeping
export size linear in documents x topics.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .evaluation import DEFAULT_MOMENT_SAMPLES, sqrt_theta_moment
from .graph import TopicGraph, graph_to_json
from .model import CtmModel, VariationalState
from .numerics import softmax

EXPORT_SCHEMA_VERSION = 1
EXPORT_FILES = ("manifest.json", "model.json", "graph.json",
                "documents.json", "moments.json")


def build_export(
    model: CtmModel,
    states: list[VariationalState],
    doc_ids: list[str],
    and_graph: TopicGraph,
    or_graph: TopicGraph,
    out_dir,
    doc_meta: dict[str, tuple[str, str]] | None = None,
    n_samples: int = DEFAULT_MOMENT_SAMPLES,
    seed: int = 0,
    top_words: int = 20,
) -> Path:
    """Write the browser export directory and return its path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc_meta = doc_meta or {}

    thetas = np.stack([softmax(st.lam) for st in states])
    prevalence = thetas.mean(axis=0)

    model_doc = {
        "schema_version": EXPORT_SCHEMA_VERSION,
        "K": model.K,
        "topics": [
            {"id": i, "top_words": [[w, p] for w, p in model.top_words(i, top_words)]}
            for i in range(model.K)
        ],
    }

    graph_doc = {
        "schema_version": EXPORT_SCHEMA_VERSION,
        "rho": and_graph.rho,
        "nodes": graph_to_json(and_graph, model, prevalence)["nodes"],
        "and_edges": graph_to_json(and_graph)["edges"],
        "or_edges": graph_to_json(or_graph)["edges"],
    }

    documents = []
    for doc_id, theta in zip(doc_ids, thetas):
        title, year = doc_meta.get(doc_id, ("", ""))
        top3 = np.argsort(-theta)[:3]
        documents.append(
            {
                "id": doc_id,
                "title": title,
                "year": year,
                "theta": theta.tolist(),
                "top_topics": [int(t) for t in top3],
            }
        )

    moments = [
        {
            "id": doc_id,
            "m": sqrt_theta_moment(st, n_samples, seed).tolist(),
        }
        for doc_id, st in zip(doc_ids, states)
    ]

    (out / "model.json").write_text(json.dumps(model_doc), "utf-8")
    (out / "graph.json").write_text(json.dumps(graph_doc), "utf-8")
    (out / "documents.json").write_text(
        json.dumps({"schema_version": EXPORT_SCHEMA_VERSION, "documents": documents}),
        "utf-8",
    )
    (out / "moments.json").write_text(
        json.dumps({"schema_version": EXPORT_SCHEMA_VERSION, "moments": moments}),
        "utf-8",
    )
    (out / "manifest.json").write_text(
        json.dumps(
            {
                "schema_version": EXPORT_SCHEMA_VERSION,
                "files": list(EXPORT_FILES[1:]),
                "K": model.K,
                "D": len(doc_ids),
            }
        ),
        "utf-8",
    )
    return out


def validate_export(path) -> list[str]:
    """Schema and invariant checks over an export directory.

    Returns a list of violation strings; empty means the export is valid.
    """
    path = Path(path)
    violations = []
    docs = {}
    for name in EXPORT_FILES:
        f = path / name
        if not f.exists():
            violations.append(f"missing file: {name}")
            continue
        try:
            docs[name] = json.loads(f.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            violations.append(f"{name}: invalid JSON ({exc})")
    if violations:
        return violations

    for name, doc in docs.items():
        if doc.get("schema_version") != EXPORT_SCHEMA_VERSION:
            violations.append(f"{name}: schema_version != {EXPORT_SCHEMA_VERSION}")

    k = docs["manifest.json"].get("K")
    model_doc = docs["model.json"]
    if model_doc.get("K") != k:
        violations.append("model.json: K disagrees with manifest")
    topic_ids = {t["id"] for t in model_doc.get("topics", [])}
    if topic_ids != set(range(k)):
        violations.append("model.json: topic ids are not 0..K-1")

    graph_doc = docs["graph.json"]
    node_ids = {n["id"] for n in graph_doc.get("nodes", [])}
    if node_ids != set(range(k)):
        violations.append("graph.json: node ids are not 0..K-1")
    and_set = set()
    for kind in ("and_edges", "or_edges"):
        for e in graph_doc.get(kind, []):
            s, t = e.get("source"), e.get("target")
            if s not in node_ids or t not in node_ids:
                violations.append(f"graph.json: {kind} edge ({s},{t}) references unknown topic")
            if kind == "and_edges":
                and_set.add((s, t))
    or_set = {(e["source"], e["target"]) for e in graph_doc.get("or_edges", [])}
    if not and_set <= or_set:
        violations.append("graph.json: AND edge set is not a subset of OR edge set")

    doc_ids = set()
    for rec in docs["documents.json"].get("documents", []):
        doc_ids.add(rec["id"])
        theta = np.asarray(rec.get("theta", []), dtype=float)
        if len(theta) != k:
            violations.append(f"documents.json: {rec['id']} theta length != K")
            continue
        if abs(theta.sum() - 1.0) > 1e-6 or np.any(theta < 0):
            violations.append(f"documents.json: {rec['id']} theta is not on the simplex")
        for t in rec.get("top_topics", []):
            if t not in topic_ids:
                violations.append(f"documents.json: {rec['id']} references topic {t}")

    for rec in docs["moments.json"].get("moments", []):
        if rec["id"] not in doc_ids:
            violations.append(f"moments.json: unknown document {rec['id']}")
        m = np.asarray(rec.get("m", []), dtype=float)
        if len(m) != k:
            violations.append(f"moments.json: {rec['id']} moment length != K")
        elif np.any(m < 0):
            violations.append(f"moments.json: {rec['id']} has negative moments")

    if docs["manifest.json"].get("D") != len(doc_ids):
        violations.append("manifest.json: D disagrees with documents.json")
    return violations
