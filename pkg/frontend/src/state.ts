// View state and its invariants: the selected pair must belong to the
// displayed alignment set, and the heatmap mode is one of the three lenses.

import type { AlignmentPairDto, AlignmentSetDto, LineRef } from "./types.js";

export type HeatmapMode = "similarity" | "displacement" | "churn";

export const MODES: readonly HeatmapMode[] = ["similarity", "displacement", "churn"];

export interface PairSelection {
  a: LineRef;
  b: LineRef;
  bin: string;
}

export interface ViewState {
  editionA: string;
  editionB: string;
  iteration: number;
  selected: PairSelection | null;
  mode: HeatmapMode;
  minSimilarity: number;
}

export const initialViewState = (
  editionA: string,
  editionB: string,
  iteration: number
): ViewState => ({
  editionA,
  editionB,
  iteration,
  selected: null,
  mode: "similarity",
  minSimilarity: 0,
});

export const sameRef = (x: LineRef, y: LineRef): boolean =>
  x[0] === y[0] && x[1] === y[1];

export const findPair = (
  set: AlignmentSetDto,
  selection: PairSelection
): AlignmentPairDto | null =>
  set.pairs.find(
    (p) => sameRef(p.a, selection.a) && sameRef(p.b, selection.b) && p.bin === selection.bin
  ) ?? null;

export const withMode = (state: ViewState, mode: HeatmapMode): ViewState => {
  if (!MODES.includes(mode)) throw new Error(`unknown heatmap mode ${mode}`);
  return { ...state, mode };
};

export const withSelection = (
  state: ViewState,
  set: AlignmentSetDto,
  selection: PairSelection | null
): ViewState => {
  if (selection !== null && findPair(set, selection) === null) {
    return { ...state, selected: null };
  }
  return { ...state, selected: selection };
};

export const withIteration = (
  state: ViewState,
  set: AlignmentSetDto
): ViewState => {
  // moving to another iteration's set drops a selection it does not contain
  const selected =
    state.selected !== null && findPair(set, state.selected) !== null
      ? state.selected
      : null;
  return { ...state, iteration: set.iteration, selected };
};

export const visiblePairs = (
  state: ViewState,
  set: AlignmentSetDto
): AlignmentPairDto[] => set.pairs.filter((p) => p.sim >= state.minSimilarity);
