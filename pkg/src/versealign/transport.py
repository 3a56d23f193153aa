"""Word mover's distance between two lines as exact optimal transport.

Lines become normalized bags of words; the ground metric is Euclidean
distance between unit vectors (monotone in cosine and a true metric, so the
exact solver inherits symmetry and the triangle inequality). Downstream
similarity is 1 / (1 + cost).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .corpus import Line
from .embedding import EmbeddingState

FLOW_EPS = 1e-9
GROUND_ID = "unit-euclidean"


class TransportError(ValueError):
    """Invalid bag or mismatched plan."""


@dataclass(frozen=True)
class BagOfWords:
    """nBOW weights of one line: distinct token ids with weights summing to 1."""

    entries: tuple[tuple[int, float], ...]
    source_line: tuple[str, int]

    @property
    def token_ids(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.entries], dtype=np.float64)

    def __len__(self) -> int:
        return len(self.entries)


def bag_from_token_ids(
    token_ids: Sequence[int], source_line: tuple[str, int]
) -> BagOfWords:
    """Merge duplicates and normalize counts to weights."""
    if not token_ids:
        raise TransportError(f"empty token sequence for line {source_line}")
    counts: dict[int, int] = {}
    for t in token_ids:
        counts[t] = counts.get(t, 0) + 1
    total = len(token_ids)
    entries = tuple((t, counts[t] / total) for t in sorted(counts))
    return BagOfWords(entries=entries, source_line=source_line)


def nbow(line: Line) -> BagOfWords:
    return bag_from_token_ids(line.token_ids, line.line_id)


@dataclass(frozen=True)
class TransportPlan:
    """Exact optimal transport between two bags under one embedding snapshot.

    flows hold only strictly positive masses, ordered by bag position, and
    their marginals reproduce both bags' weights. iteration records the
    snapshot the ground costs came from, for staleness checks.
    """

    cost: float
    flows: tuple[tuple[int, int, float], ...]  # (token_id_a, token_id_b, mass)
    ground: str
    iteration: int

    def to_json(self) -> dict:
        return {
            "cost": self.cost,
            "ground": self.ground,
            "iteration": self.iteration,
            "flows": [[i, j, m] for i, j, m in self.flows],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "TransportPlan":
        return cls(
            cost=float(doc["cost"]),
            flows=tuple((int(i), int(j), float(m)) for i, j, m in doc["flows"]),
            ground=doc["ground"],
            iteration=int(doc["iteration"]),
        )

    def digest(self) -> str:
        canonical = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def ground_distance(state: EmbeddingState, i: int, j: int) -> float:
    """Euclidean distance between unit vectors, sqrt(2 - 2 cos) in closed form.

    Computed from the difference vector directly so identical rows are at
    distance exactly 0 and the matrix is exactly symmetric.
    """
    state.check_id(i)
    state.check_id(j)
    delta = state.vectors[i] - state.vectors[j]
    return float(np.sqrt(np.dot(delta, delta)))


def ground_matrix(
    state: EmbeddingState, ids_a: Sequence[int], ids_b: Sequence[int]
) -> np.ndarray:
    va = state.vectors[list(ids_a)]
    vb = state.vectors[list(ids_b)]
    delta = va[:, None, :] - vb[None, :, :]
    return np.sqrt(np.sum(delta * delta, axis=2))


def wmd(state: EmbeddingState, a: BagOfWords, b: BagOfWords) -> TransportPlan:
    """Exact minimum-cost transport between two bags.

    The solve is oriented canonically (lexicographically smaller bag first)
    and mapped back, so wmd(a, b) and wmd(b, a) return the same cost bit for
    bit and mirrored flows.
    """
    swapped = b.entries < a.entries
    x, y = (b, a) if swapped else (a, b)
    wx = x.weights
    wy = y.weights
    cost_matrix = ground_matrix(state, x.token_ids, y.token_ids)
    flow = kernels.transport_simplex(wx, wy, cost_matrix)
    if not (
        np.allclose(flow.sum(axis=1), wx, atol=1e-9)
        and np.allclose(flow.sum(axis=0), wy, atol=1e-9)
    ):
        raise RuntimeError("transport solver returned infeasible flows")
    cost = float(np.sum(flow * cost_matrix))
    ids_x = x.token_ids
    ids_y = y.token_ids
    cells = [
        (ids_x[i], ids_y[j], float(flow[i, j]))
        for i, j in zip(*np.nonzero(flow > 0.0))
    ]
    if swapped:
        cells = sorted((j, i, m) for i, j, m in cells)
    return TransportPlan(
        cost=cost, flows=tuple(cells), ground=GROUND_ID, iteration=state.iteration
    )


def relaxed_lower_bound(state: EmbeddingState, a: BagOfWords, b: BagOfWords) -> float:
    """Max of the two one-sided relaxations; never exceeds the exact cost."""
    cost_matrix = ground_matrix(state, a.token_ids, b.token_ids)
    lb_a = float(np.sum(a.weights * cost_matrix.min(axis=1)))
    lb_b = float(np.sum(b.weights * cost_matrix.min(axis=0)))
    return max(lb_a, lb_b)


def one_sided_lower_bound(
    state: EmbeddingState, a: BagOfWords, target_ids: Sequence[int]
) -> float:
    """Cost floor when every unit of `a` may move to its nearest target token.

    Valid for any bag drawn from a subset of target_ids, which is what makes
    it usable to prune sub-span searches.
    """
    cost_matrix = ground_matrix(state, a.token_ids, target_ids)
    return float(np.sum(a.weights * cost_matrix.min(axis=1)))


def similarity(cost: float) -> float:
    """Map a transport cost into (0, 1]: cost 0 -> 1, monotone decreasing."""
    return 1.0 / (1.0 + cost)


@dataclass(frozen=True)
class HeatmapData:
    """Token-position cosine grid plus nearest-neighbor and transport marks.

    transport_pairs spread each token-level flow evenly over the positions
    holding that token, so position marginals recombine to the bag weights.
    """

    rows: tuple[str, ...]
    cols: tuple[str, ...]
    sim: np.ndarray  # (|A|, |B|) cosines
    nn_pairs: tuple[tuple[int, int], ...]
    transport_pairs: tuple[tuple[int, int, float], ...]

    def to_json(self) -> dict:
        return {
            "rows": list(self.rows),
            "cols": list(self.cols),
            "sim": [[float(x) for x in row] for row in self.sim],
            "nn": [[r, c] for r, c in self.nn_pairs],
            "flows": [
                {"r": r, "c": c, "mass": m} for r, c, m in self.transport_pairs
            ],
        }


def pair_heatmap(state: EmbeddingState, line_a: Line, line_b: Line) -> HeatmapData:
    """Similarity grid over token positions with transport emphasis.

    nn_pairs marks the per-row argmax (ties to the lowest column);
    transport_pairs carries the optimal flows with mass above FLOW_EPS.
    """
    if not line_a.tokens or not line_b.tokens:
        raise TransportError("pair_heatmap requires two non-empty lines")
    va = state.vectors[list(line_a.token_ids)]
    vb = state.vectors[list(line_b.token_ids)]
    sim = np.clip(va @ vb.T, -1.0, 1.0)
    nn_pairs = tuple((p, int(np.argmax(sim[p]))) for p in range(sim.shape[0]))

    plan = wmd(state, nbow(line_a), nbow(line_b))
    positions_a: dict[int, list[int]] = {}
    for p, t in enumerate(line_a.token_ids):
        positions_a.setdefault(t, []).append(p)
    positions_b: dict[int, list[int]] = {}
    for q, t in enumerate(line_b.token_ids):
        positions_b.setdefault(t, []).append(q)
    cells: list[tuple[int, int, float]] = []
    for ti, tj, mass in plan.flows:
        pa = positions_a[ti]
        pb = positions_b[tj]
        share = mass / (len(pa) * len(pb))
        if share > FLOW_EPS:
            cells.extend((p, q, share) for p in pa for q in pb)
    cells.sort(key=lambda cell: (cell[0], cell[1]))
    return HeatmapData(
        rows=line_a.tokens,
        cols=line_b.tokens,
        sim=sim,
        nn_pairs=nn_pairs,
        transport_pairs=tuple(cells),
    )
