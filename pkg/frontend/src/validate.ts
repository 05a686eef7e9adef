/** Client-side validation of a loaded export; mirrors the CLI validator. */

import { BrowserExport, EXPORT_SCHEMA_VERSION } from "./types.js";

const THETA_TOL = 1e-6;

/** Returns a list of violation strings; empty means the export is valid. */
export function validateExport(data: BrowserExport): string[] {
  const violations: string[] = [];
  const parts: [string, { schema_version: number }][] = [
    ["manifest.json", data.manifest],
    ["model.json", data.model],
    ["graph.json", data.graph],
    ["documents.json", data.documents],
    ["moments.json", data.moments],
  ];
  for (const [name, doc] of parts) {
    if (doc.schema_version !== EXPORT_SCHEMA_VERSION) {
      violations.push(`${name}: schema_version != ${EXPORT_SCHEMA_VERSION}`);
    }
  }

  const k = data.manifest.K;
  if (data.model.K !== k) {
    violations.push("model.json: K disagrees with manifest");
  }
  const topicIds = new Set(data.model.topics.map((t) => t.id));
  if (!idsAreRange(topicIds, k)) {
    violations.push("model.json: topic ids are not 0..K-1");
  }

  const nodeIds = new Set(data.graph.nodes.map((n) => n.id));
  if (!idsAreRange(nodeIds, k)) {
    violations.push("graph.json: node ids are not 0..K-1");
  }
  const orSet = new Set(data.graph.or_edges.map((e) => `${e.source},${e.target}`));
  for (const kind of ["and_edges", "or_edges"] as const) {
    for (const e of data.graph[kind]) {
      if (!nodeIds.has(e.source) || !nodeIds.has(e.target)) {
        violations.push(
          `graph.json: ${kind} edge (${e.source},${e.target}) references unknown topic`,
        );
      }
    }
  }
  for (const e of data.graph.and_edges) {
    if (!orSet.has(`${e.source},${e.target}`)) {
      violations.push("graph.json: AND edge set is not a subset of OR edge set");
      break;
    }
  }

  const docIds = new Set<string>();
  for (const rec of data.documents.documents) {
    docIds.add(rec.id);
    if (rec.theta.length !== k) {
      violations.push(`documents.json: ${rec.id} theta length != K`);
      continue;
    }
    const sum = rec.theta.reduce((a, b) => a + b, 0);
    if (Math.abs(sum - 1.0) > THETA_TOL || rec.theta.some((t) => t < 0)) {
      violations.push(`documents.json: ${rec.id} theta is not on the simplex`);
    }
    for (const t of rec.top_topics) {
      if (!topicIds.has(t)) {
        violations.push(`documents.json: ${rec.id} references topic ${t}`);
      }
    }
  }

  for (const rec of data.moments.moments) {
    if (!docIds.has(rec.id)) {
      violations.push(`moments.json: unknown document ${rec.id}`);
    }
    if (rec.m.length !== k) {
      violations.push(`moments.json: ${rec.id} moment length != K`);
    } else if (rec.m.some((v) => v < 0)) {
      violations.push(`moments.json: ${rec.id} has negative moments`);
    }
  }

  if (data.manifest.D !== docIds.size) {
    violations.push("manifest.json: D disagrees with documents.json");
  }
  return violations;
}

function idsAreRange(ids: Set<number>, k: number): boolean {
  if (ids.size !== k) return false;
  for (let i = 0; i < k; i++) {
    if (!ids.has(i)) return false;
  }
  return true;
}
