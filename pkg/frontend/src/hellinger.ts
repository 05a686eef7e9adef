/** Document similarity from exported sqrt-proportion moment vectors.
 *
 * The distance is 2 - 2 * (m_i . m_j), clamped to [0, 2] — the expected
 * squared Hellinger distance between two documents' topic proportions.
 * It is computed from the same moment vectors the CLI uses, so rankings
 * agree with the `similar` command exactly.
 */

export interface RankedDoc {
  id: string;
  distance: number;
}

export function hellingerDistance(mi: number[], mj: number[]): number {
  if (mi.length !== mj.length) {
    throw new Error("moment vectors have different lengths");
  }
  let dot = 0;
  for (let k = 0; k < mi.length; k++) {
    dot += (mi[k] as number) * (mj[k] as number);
  }
  return Math.min(2, Math.max(0, 2 - 2 * dot));
}

/**
 * Rank all other documents by distance to the query, ascending; ties break
 * by position in the moments list (matching the CLI ordering).
 */
export function rankSimilar(
  queryIndex: number,
  ids: string[],
  moments: number[][],
  topN: number,
): RankedDoc[] {
  if (queryIndex < 0 || queryIndex >= moments.length) {
    throw new Error(`query index ${queryIndex} out of range`);
  }
  const q = moments[queryIndex] as number[];
  const scored: { index: number; id: string; distance: number }[] = [];
  for (let i = 0; i < moments.length; i++) {
    if (i === queryIndex) continue;
    scored.push({
      index: i,
      id: ids[i] as string,
      distance: hellingerDistance(q, moments[i] as number[]),
    });
  }
  scored.sort((a, b) => a.distance - b.distance || a.index - b.index);
  return scored.slice(0, topN).map(({ id, distance }) => ({ id, distance }));
}
