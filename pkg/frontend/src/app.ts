/** Browser entry point: loads the export directory and wires the UI.
 *
 * Expects the five export JSON files to be served from ./export/ next to
 * index.html (see the README for how to stage them).
 */

import {
  BrowserExport,
  DocumentsDoc,
  GraphDoc,
  GraphEdge,
  Manifest,
  ModelDoc,
  MomentsDoc,
} from "./types.js";
import { validateExport } from "./validate.js";
import { rankSimilar } from "./hellinger.js";
import { layoutGraph, Point } from "./layout.js";

const GRAPH_W = 640;
const GRAPH_H = 480;
const SVG_NS = "http://www.w3.org/2000/svg";

async function fetchJson<T>(path: string): Promise<T> {
  const resp = await fetch(path);
  if (!resp.ok) {
    throw new Error(`failed to load ${path}: ${resp.status}`);
  }
  return (await resp.json()) as T;
}

export async function loadExport(base: string): Promise<BrowserExport> {
  const [manifest, model, graph, documents, moments] = await Promise.all([
    fetchJson<Manifest>(`${base}/manifest.json`),
    fetchJson<ModelDoc>(`${base}/model.json`),
    fetchJson<GraphDoc>(`${base}/graph.json`),
    fetchJson<DocumentsDoc>(`${base}/documents.json`),
    fetchJson<MomentsDoc>(`${base}/moments.json`),
  ]);
  return { manifest, model, graph, documents, moments };
}

function topicLabel(data: BrowserExport, id: number): string {
  const topic = data.model.topics.find((t) => t.id === id);
  const words = (topic?.top_words ?? []).slice(0, 3).map(([w]) => w);
  return words.length ? `${id}: ${words.join(", ")}` : `topic ${id}`;
}

function renderGraph(
  data: BrowserExport,
  svg: SVGSVGElement,
  minWeight: number,
  useAnd: boolean,
): void {
  svg.replaceChildren();
  const edges: GraphEdge[] = (useAnd ? data.graph.and_edges : data.graph.or_edges).filter(
    (e) => Math.abs(e.weight) >= minWeight,
  );
  const nodeIds = data.graph.nodes.map((n) => n.id);
  const pos = layoutGraph(nodeIds, edges, GRAPH_W, GRAPH_H);

  for (const e of edges) {
    const a = pos.get(e.source) as Point;
    const b = pos.get(e.target) as Point;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(a.x));
    line.setAttribute("y1", String(a.y));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y));
    line.setAttribute("class", e.weight >= 0 ? "edge pos" : "edge neg");
    line.setAttribute("stroke-width", String(1 + 4 * Math.min(1, Math.abs(e.weight))));
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${e.source} – ${e.target}: ${e.weight.toFixed(4)}`;
    line.appendChild(title);
    svg.appendChild(line);
  }
  for (const node of data.graph.nodes) {
    const p = pos.get(node.id) as Point;
    const g = document.createElementNS(SVG_NS, "g");
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(p.x));
    circle.setAttribute("cy", String(p.y));
    circle.setAttribute("r", String(8 + 40 * (node.prevalence ?? 0)));
    circle.setAttribute("class", "node");
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(p.x + 12));
    label.setAttribute("y", String(p.y + 4));
    label.textContent = topicLabel(data, node.id);
    g.appendChild(circle);
    g.appendChild(label);
    svg.appendChild(g);
  }
}

function renderTopics(data: BrowserExport, container: HTMLElement): void {
  container.replaceChildren();
  for (const topic of data.model.topics) {
    const card = document.createElement("div");
    card.className = "topic-card";
    const head = document.createElement("h3");
    head.textContent = `Topic ${topic.id}`;
    card.appendChild(head);
    const list = document.createElement("ol");
    for (const [word, prob] of topic.top_words.slice(0, 10)) {
      const item = document.createElement("li");
      item.textContent = `${word} (${prob.toFixed(4)})`;
      list.appendChild(item);
    }
    card.appendChild(list);
    container.appendChild(card);
  }
}

function renderSimilar(data: BrowserExport, queryId: string, container: HTMLElement): void {
  container.replaceChildren();
  const ids = data.moments.moments.map((m) => m.id);
  const moments = data.moments.moments.map((m) => m.m);
  const queryIndex = ids.indexOf(queryId);
  if (queryIndex < 0) {
    container.textContent = `unknown document: ${queryId}`;
    return;
  }
  const table = document.createElement("table");
  const header = document.createElement("tr");
  for (const col of ["rank", "document", "distance"]) {
    const th = document.createElement("th");
    th.textContent = col;
    header.appendChild(th);
  }
  table.appendChild(header);
  rankSimilar(queryIndex, ids, moments, 10).forEach((row, rank) => {
    const tr = document.createElement("tr");
    for (const cell of [String(rank + 1), row.id, row.distance.toFixed(6)]) {
      const td = document.createElement("td");
      td.textContent = cell;
      tr.appendChild(td);
    }
    table.appendChild(tr);
  });
  container.appendChild(table);
}

function renderDocuments(data: BrowserExport, container: HTMLElement, onPick: (id: string) => void): void {
  container.replaceChildren();
  for (const rec of data.documents.documents) {
    const row = document.createElement("div");
    row.className = "doc-row";
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = rec.title ? `${rec.id} — ${rec.title}` : rec.id;
    link.addEventListener("click", (ev) => {
      ev.preventDefault();
      onPick(rec.id);
    });
    row.appendChild(link);
    const topics = document.createElement("span");
    topics.className = "doc-topics";
    topics.textContent = ` topics: ${rec.top_topics.join(", ")}`;
    row.appendChild(topics);
    container.appendChild(row);
  }
}

export async function main(): Promise<void> {
  const status = document.getElementById("status") as HTMLElement;
  let data: BrowserExport;
  try {
    data = await loadExport("export");
  } catch (err) {
    status.textContent = `could not load export: ${String(err)}`;
    return;
  }
  const violations = validateExport(data);
  if (violations.length > 0) {
    status.textContent = `invalid export: ${violations.join("; ")}`;
    return;
  }
  status.textContent = `${data.manifest.K} topics, ${data.manifest.D} documents`;

  const svg = document.getElementById("graph") as unknown as SVGSVGElement;
  const slider = document.getElementById("weight-slider") as HTMLInputElement;
  const sliderValue = document.getElementById("weight-value") as HTMLElement;
  const andToggle = document.getElementById("and-toggle") as HTMLInputElement;
  const redraw = () => {
    const minWeight = Number(slider.value);
    sliderValue.textContent = minWeight.toFixed(2);
    renderGraph(data, svg, minWeight, andToggle.checked);
  };
  slider.addEventListener("input", redraw);
  andToggle.addEventListener("change", redraw);
  redraw();

  renderTopics(data, document.getElementById("topics") as HTMLElement);

  const similarPanel = document.getElementById("similar") as HTMLElement;
  const queryInput = document.getElementById("query-input") as HTMLInputElement;
  const queryButton = document.getElementById("query-button") as HTMLButtonElement;
  const runQuery = (id: string) => {
    queryInput.value = id;
    renderSimilar(data, id, similarPanel);
  };
  queryButton.addEventListener("click", () => runQuery(queryInput.value.trim()));

  renderDocuments(data, document.getElementById("documents") as HTMLElement, runQuery);
  const first = data.documents.documents[0];
  if (first) runQuery(first.id);
}

// Only auto-run in a real browser; tests import the pure functions directly.
if (typeof document !== "undefined" && document.getElementById("status")) {
  void main();
}
