// Change lens view model: per-token background intensity over an edition's
// text between two iterations. Values are the engine's, never rescaled.

import type { WordChangeDto } from "../types.js";

export interface LensSpan {
  token: string;
  intensity: number;
}

export const buildLens = (change: WordChangeDto): LensSpan[] =>
  change.tokens.map((token, idx) => ({ token, intensity: change.intensity[idx] }));

export interface LensQuery {
  from: number;
  to: number;
  mode: "displacement" | "churn";
}

export const lensQuery = (
  fromIter: number,
  toIter: number,
  mode: "displacement" | "churn"
): LensQuery =>
  fromIter > toIter
    ? { from: toIter, to: fromIter, mode }
    : { from: fromIter, to: toIter, mode };

export const lensColor = (intensity: number): string =>
  `rgba(204, 85, 0, ${Math.min(1, Math.max(0, intensity)).toFixed(4)})`;
