// Side-by-side alignment view model: one ribbon per accepted pair, colored
// by bin with opacity set by similarity, plus a diff overlay of ghost ribbons
// for pairs removed since the previous iteration.

import type {
  AlignmentSetDto,
  BinLabel,
  DiffDto,
  DiffKeyDto,
  LineRef,
} from "../types.js";
import type { PairSelection } from "../state.js";
import { sameRef } from "../state.js";

export const BIN_COLORS: Record<BinLabel, string> = {
  full: "#33658a",
  half_a: "#b9722c",
  half_b: "#7a4f9e",
};

export type DiffMark = "added" | "retained" | "none";

export interface Ribbon {
  a: LineRef;
  b: LineRef;
  bin: BinLabel;
  similarity: number;
  span: [number, number] | null;
  color: string;
  opacity: number;
  diff: DiffMark;
  selected: boolean;
}

export interface GhostRibbon {
  a: LineRef;
  b: LineRef;
  bin: string;
}

export interface AlignmentView {
  ribbons: Ribbon[];
  ghosts: GhostRibbon[]; // removed vs the previous iteration, drawn red
  empty: boolean;
}

const keyOf = (a: LineRef, b: LineRef, bin: string): string =>
  `${a[0]}:${a[1]}|${b[0]}:${b[1]}|${bin}`;

export const buildAlignmentView = (
  set: AlignmentSetDto,
  diff: DiffDto | null,
  selected: PairSelection | null
): AlignmentView => {
  const added = new Set((diff?.added ?? []).map((k) => keyOf(k.a, k.b, k.bin)));
  const retained = new Set(
    (diff?.retained ?? []).map((k) => keyOf(k.a, k.b, k.bin))
  );
  const ribbons = set.pairs.map((pair): Ribbon => {
    const key = keyOf(pair.a, pair.b, pair.bin);
    let mark: DiffMark = "none";
    if (diff !== null) mark = added.has(key) ? "added" : retained.has(key) ? "retained" : "none";
    return {
      a: pair.a,
      b: pair.b,
      bin: pair.bin,
      similarity: pair.sim,
      span: pair.span,
      color: BIN_COLORS[pair.bin],
      opacity: pair.sim,
      diff: mark,
      selected:
        selected !== null &&
        sameRef(pair.a, selected.a) &&
        sameRef(pair.b, selected.b) &&
        pair.bin === selected.bin,
    };
  });
  const ghosts = (diff?.removed ?? []).map(
    (k: DiffKeyDto): GhostRibbon => ({ a: k.a, b: k.b, bin: k.bin })
  );
  return { ribbons, ghosts, empty: set.pairs.length === 0 };
};
