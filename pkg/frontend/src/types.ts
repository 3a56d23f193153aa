// Wire types mirroring the engine's HTTP payloads.

export type LineRef = [string, number];

export type BinLabel = "full" | "half_a" | "half_b";

export interface AlignmentPairDto {
  a: LineRef;
  b: LineRef;
  sim: number;
  bin: BinLabel;
  span: [number, number] | null;
}

export interface AlignerConfigDto {
  band_width: number;
  theta_full: number;
  theta_half: number;
  half_ratio: number;
  mutual_best: boolean;
}

export interface AlignmentSetDto {
  iteration: number;
  edition_a: string;
  edition_b: string;
  config: AlignerConfigDto;
  config_hash: string;
  pairs: AlignmentPairDto[];
}

export interface DiffKeyDto {
  a: LineRef;
  b: LineRef;
  bin: string;
}

export interface DiffDto {
  added: DiffKeyDto[];
  removed: DiffKeyDto[];
  retained: DiffKeyDto[];
}

export interface FlowCellDto {
  r: number;
  c: number;
  mass: number;
}

export interface HeatmapDto {
  rows: string[];
  cols: string[];
  sim: number[][];
  nn: Array<[number, number]>;
  flows: FlowCellDto[];
}

export interface LineDto {
  index: number;
  raw: string;
  tokens: string[];
}

export interface EditionDto {
  edition_id: string;
  title: string;
  lines: LineDto[];
}

export interface EditionsDto {
  editions: EditionDto[];
}

export interface WordChangeDto {
  line: string;
  tokens: string[];
  intensity: number[];
  mode: string;
  from: number;
  to: number;
}

export interface NeighborDto {
  id: number;
  token: string;
  cosine: number;
}

export interface NeighborsDto {
  token: { id: number; token: string };
  iteration: number;
  neighbors: NeighborDto[];
  pairwise: number[][];
}

export interface FeedbackResultDto {
  iteration: number;
  changed_tokens: string[];
}

export interface RealignResultDto {
  alignment: AlignmentSetDto;
  diff: DiffDto;
}

export interface HistoryDto {
  iterations: number[];
  alignments: number[];
  events: Array<Record<string, unknown>>;
}
