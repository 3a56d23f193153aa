// Drag canvas view model: a 2D spread of a token and its neighbors via
// classical MDS over pairwise cosines. Only the emitted target cosine is
// contractual; the layout is presentation. Dragging token j computes the
// target from the new screen distance to token i through a linear map
// calibrated so the current distance maps to the current cosine and zero
// distance maps to 1.

import type { NeighborsDto } from "../types.js";

export interface CanvasPoint {
  id: number;
  token: string;
  x: number;
  y: number;
  center: boolean;
}

const jacobiEigen = (
  matrix: number[][]
): { values: number[]; vectors: number[][] } => {
  // cyclic Jacobi on a small symmetric matrix; vectors come back as columns
  const n = matrix.length;
  const a = matrix.map((row) => row.slice());
  const v: number[][] = Array.from({ length: n }, (_, i) =>
    Array.from({ length: n }, (_, j) => (i === j ? 1 : 0))
  );
  for (let sweep = 0; sweep < 50; sweep++) {
    let off = 0;
    for (let p = 0; p < n; p++)
      for (let q = p + 1; q < n; q++) off += a[p][q] * a[p][q];
    if (off < 1e-18) break;
    for (let p = 0; p < n; p++) {
      for (let q = p + 1; q < n; q++) {
        if (Math.abs(a[p][q]) < 1e-15) continue;
        const theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const t =
          Math.sign(theta || 1) / (Math.abs(theta) + Math.sqrt(theta * theta + 1));
        const c = 1 / Math.sqrt(t * t + 1);
        const s = t * c;
        for (let k = 0; k < n; k++) {
          const akp = a[k][p];
          const akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (let k = 0; k < n; k++) {
          const apk = a[p][k];
          const aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
          const vkp = v[k][p];
          const vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  return { values: a.map((row, i) => row[i]), vectors: v };
};

export const mdsLayout = (pairwiseCosine: number[][]): Array<[number, number]> => {
  const n = pairwiseCosine.length;
  if (n === 1) return [[0, 0]];
  // squared chord distances between unit vectors, then double centering
  const d2 = pairwiseCosine.map((row) => row.map((c) => Math.max(0, 2 - 2 * c)));
  const rowMean = d2.map((row) => row.reduce((s, x) => s + x, 0) / n);
  const grandMean = rowMean.reduce((s, x) => s + x, 0) / n;
  const b = d2.map((row, i) =>
    row.map((x, j) => -0.5 * (x - rowMean[i] - rowMean[j] + grandMean))
  );
  const { values, vectors } = jacobiEigen(b);
  const order = values
    .map((value, index) => ({ value, index }))
    .sort((lhs, rhs) => rhs.value - lhs.value);
  const axes = order.slice(0, 2);
  return pairwiseCosine.map((_, i) => {
    const coords = axes.map(({ value, index }) =>
      value > 0 ? vectors[i][index] * Math.sqrt(value) : 0
    );
    return [coords[0] ?? 0, coords[1] ?? 0];
  });
};

export const buildCanvas = (data: NeighborsDto): CanvasPoint[] => {
  const layout = mdsLayout(data.pairwise);
  const points = [data.token, ...data.neighbors];
  return points.map((p, idx) => ({
    id: p.id,
    token: p.token,
    x: layout[idx][0],
    y: layout[idx][1],
    center: idx === 0,
  }));
};

export interface DragCalibration {
  refDistance: number; // screen distance between i and j at drag start
  refCosine: number; // cosine(i, j) at drag start
  minCosine: number; // clamp for drops beyond the calibration range
}

export const targetCosine = (distance: number, cal: DragCalibration): number => {
  if (cal.refDistance <= 0) return 1.0;
  const raw = 1 - (distance / cal.refDistance) * (1 - cal.refCosine);
  return Math.min(1.0, Math.max(cal.minCosine, raw));
};

export interface DragBody {
  i: number;
  j: number;
  target: number;
}

export const dragBody = (i: number, j: number, target: number): DragBody | null => {
  if (i === j) return null; // drop on self is ignored
  return { i, j, target };
};
