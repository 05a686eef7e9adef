import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { BrowserExport } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));
const exportDir = join(here, "..", "fixtures", "export");

function readJson<T>(path: string): T {
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

export function loadFixtureExport(): BrowserExport {
  return {
    manifest: readJson(join(exportDir, "manifest.json")),
    model: readJson(join(exportDir, "model.json")),
    graph: readJson(join(exportDir, "graph.json")),
    documents: readJson(join(exportDir, "documents.json")),
    moments: readJson(join(exportDir, "moments.json")),
  };
}

export interface SimilarExpected {
  [query: string]: {
    query: string;
    results: { id: string; distance: number }[];
  };
}

export function loadSimilarExpected(): SimilarExpected {
  return readJson(join(here, "..", "fixtures", "similar_expected.json"));
}
