/** Deterministic force-directed layout for the topic graph.
 *
 * Small graphs (K topics) only, so a fixed number of explicit integration
 * steps is plenty. No randomness: nodes start on a circle, so the same
 * graph always produces the same layout.
 */

import { GraphEdge } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

export function layoutGraph(
  nodeIds: number[],
  edges: GraphEdge[],
  width: number,
  height: number,
  iterations = 300,
): Map<number, Point> {
  const n = nodeIds.length;
  const pos = new Map<number, Point>();
  const radius = Math.min(width, height) * 0.35;
  nodeIds.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / Math.max(n, 1);
    pos.set(id, {
      x: width / 2 + radius * Math.cos(angle),
      y: height / 2 + radius * Math.sin(angle),
    });
  });
  if (n < 2) return pos;

  const ideal = radius * Math.sqrt(2.0 / n);
  const step0 = radius / 10;
  for (let it = 0; it < iterations; it++) {
    const step = step0 * (1 - it / iterations);
    const disp = new Map<number, Point>(nodeIds.map((id) => [id, { x: 0, y: 0 }]));

    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        const a = pos.get(nodeIds[i] as number) as Point;
        const b = pos.get(nodeIds[j] as number) as Point;
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        const dist = Math.max(Math.hypot(dx, dy), 1e-6);
        const force = (ideal * ideal) / dist;
        dx = (dx / dist) * force;
        dy = (dy / dist) * force;
        const da = disp.get(nodeIds[i] as number) as Point;
        const db = disp.get(nodeIds[j] as number) as Point;
        da.x += dx;
        da.y += dy;
        db.x -= dx;
        db.y -= dy;
      }
    }
    for (const e of edges) {
      const a = pos.get(e.source) as Point;
      const b = pos.get(e.target) as Point;
      let dx = a.x - b.x;
      let dy = a.y - b.y;
      const dist = Math.max(Math.hypot(dx, dy), 1e-6);
      const force = (dist * dist) / ideal;
      dx = (dx / dist) * force;
      dy = (dy / dist) * force;
      const da = disp.get(e.source) as Point;
      const db = disp.get(e.target) as Point;
      da.x -= dx;
      da.y -= dy;
      db.x += dx;
      db.y += dy;
    }
    for (const id of nodeIds) {
      const p = pos.get(id) as Point;
      const d = disp.get(id) as Point;
      const mag = Math.max(Math.hypot(d.x, d.y), 1e-6);
      p.x += (d.x / mag) * Math.min(mag, step);
      p.y += (d.y / mag) * Math.min(mag, step);
      p.x = Math.min(width - 20, Math.max(20, p.x));
      p.y = Math.min(height - 20, Math.max(20, p.y));
    }
  }
  return pos;
}
