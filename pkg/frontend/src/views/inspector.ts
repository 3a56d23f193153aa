// Pair inspector view model: the token cosine grid with nearest-neighbor
// outlines and transport-pair emphasis, plus the Likert request body.

import type { HeatmapDto, LineRef } from "../types.js";

export interface InspectorCell {
  r: number;
  c: number;
  cosine: number;
  nearest: boolean;
  flowMass: number | null;
}

export interface InspectorView {
  rows: string[];
  cols: string[];
  cells: InspectorCell[][];
}

export const buildInspectorView = (heatmap: HeatmapDto): InspectorView => {
  const nearest = new Set(heatmap.nn.map(([r, c]) => `${r},${c}`));
  const flows = new Map(heatmap.flows.map((f) => [`${f.r},${f.c}`, f.mass]));
  const cells = heatmap.sim.map((row, r) =>
    row.map(
      (cosine, c): InspectorCell => ({
        r,
        c,
        cosine,
        nearest: nearest.has(`${r},${c}`),
        flowMass: flows.get(`${r},${c}`) ?? null,
      })
    )
  );
  return { rows: heatmap.rows, cols: heatmap.cols, cells };
};

export interface RatingBody {
  a: LineRef;
  b: LineRef;
  rating: number;
}

export const likertBody = (
  pair: { a: LineRef; b: LineRef },
  rating: number
): RatingBody => {
  if (!Number.isInteger(rating) || rating < 1 || rating > 5) {
    throw new Error(`rating must be an integer in 1..5, got ${rating}`);
  }
  return { a: pair.a, b: pair.b, rating };
};
