"""Train word vectors from the corpus alone; similarity and neighborhood queries.

No pretrained model is assumed anywhere: vectors come from a PPMI matrix of
within-line co-occurrences, factored by truncated SVD and renormalized to unit
length. Every embedding is an immutable snapshot tagged with the iteration
that produced it; feedback creates new snapshots rather than mutating rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from . import kernels
from .corpus import Edition, Vocabulary

DEFAULT_DIM = 50
DEFAULT_WINDOW = 5


class EmbeddingError(ValueError):
    """Invalid training input or token id."""


@dataclass(frozen=True)
class CooccurrenceMatrix:
    counts: np.ndarray  # (V, V) symmetric, zero diagonal
    window: int


@dataclass(frozen=True)
class EmbeddingState:
    """One immutable snapshot of the word-vector matrix.

    provenance is "trained" for iteration 0 and "event:<id>" for snapshots
    produced by a feedback event.
    """

    iteration: int
    vectors: np.ndarray  # (V, d), unit-norm rows, write-protected
    provenance: str

    def __post_init__(self) -> None:
        self.vectors.setflags(write=False)

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def check_id(self, token_id: int) -> int:
        if not 0 <= token_id < self.size:
            raise EmbeddingError(f"unknown token id {token_id}")
        return token_id


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    """Scale every row to Euclidean norm 1; rows must be nonzero."""
    norms = np.sqrt(np.sum(matrix * matrix, axis=1, keepdims=True))
    return matrix / norms


def build_cooccurrence(
    editions: Iterable[Edition], vocabulary: Vocabulary, window: int = DEFAULT_WINDOW
) -> CooccurrenceMatrix:
    """Count symmetric within-line co-occurrences over the whole corpus.

    A pair of positions counts when they sit on the same line at distance
    <= window; lines never share context. Equal tokens at two positions are
    skipped, keeping the diagonal zero.
    """
    if window < 1:
        raise EmbeddingError(f"window must be >= 1, got {window}")
    editions = list(editions)
    size = len(vocabulary)
    if not editions or size == 0:
        raise EmbeddingError("empty corpus")
    flat: list[int] = []
    offsets = [0]
    for edition in editions:
        for line in edition.lines:
            flat.extend(line.token_ids)
            offsets.append(len(flat))
    counts = np.zeros((size, size), dtype=np.float64)
    kernels.accumulate_cooccurrence(
        np.asarray(flat, dtype=np.int64),
        np.asarray(offsets, dtype=np.int64),
        window,
        counts,
    )
    return CooccurrenceMatrix(counts=counts, window=window)


def compute_ppmi(cooc: CooccurrenceMatrix) -> np.ndarray:
    """Positive pointwise mutual information from co-occurrence marginals."""
    counts = cooc.counts
    total = counts.sum()
    if total <= 0:
        raise EmbeddingError("co-occurrence matrix is empty")
    row = counts.sum(axis=1)
    expected = np.outer(row, row) / total
    with np.errstate(divide="ignore", invalid="ignore"):
        pmi = np.log(counts / expected)
    pmi[~np.isfinite(pmi)] = 0.0
    pmi[pmi < 0] = 0.0
    return pmi


def svd_factors(ppmi: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Rank-d factors (left, right) with left @ right ~= ppmi.

    Sign ambiguity is resolved by making the largest-magnitude entry of each
    right singular vector positive, so the factorization is deterministic.
    """
    size = ppmi.shape[0]
    if not 1 <= d <= size:
        raise EmbeddingError(f"dimension must be in [1, {size}], got {d}")
    u, s, vh = np.linalg.svd(ppmi)
    for k in range(size):
        pivot = int(np.argmax(np.abs(vh[k])))
        if vh[k, pivot] < 0:
            vh[k] = -vh[k]
            u[:, k] = -u[:, k]
    root = np.sqrt(s[:d])
    return u[:, :d] * root, root[:, None] * vh[:d]


def factorize(ppmi: np.ndarray, d: int, seed: int) -> EmbeddingState:
    """Build iteration-0 unit vectors from a truncated SVD of the PPMI matrix.

    Rows that are zero before normalization (tokens with no informative
    context) get a deterministic seeded unit vector instead.
    """
    left, _ = svd_factors(ppmi, d)
    rng = np.random.default_rng(seed)
    fallback = rng.standard_normal(left.shape)
    norms = np.sqrt(np.sum(left * left, axis=1))
    degenerate = norms < 1e-12
    if degenerate.any():
        left = left.copy()
        left[degenerate] = fallback[degenerate]
    return EmbeddingState(iteration=0, vectors=unit_rows(left), provenance="trained")


def train(
    editions: Iterable[Edition],
    vocabulary: Vocabulary,
    dim: int = DEFAULT_DIM,
    window: int = DEFAULT_WINDOW,
    seed: int = 0,
) -> EmbeddingState:
    """Corpus in, iteration-0 snapshot out (co-occurrence, PPMI, SVD)."""
    cooc = build_cooccurrence(editions, vocabulary, window=window)
    return factorize(compute_ppmi(cooc), dim, seed)


def cosine(state: EmbeddingState, i: int, j: int) -> float:
    """Dot product of two unit rows, clipped into [-1, 1]."""
    value = float(np.dot(state.vectors[state.check_id(i)], state.vectors[state.check_id(j)]))
    return max(-1.0, min(1.0, value))


def nearest_neighbors(
    state: EmbeddingState, i: int, k: int
) -> list[tuple[int, float]]:
    """Top-k neighbors of token i by descending cosine, ties by ascending id."""
    if not 1 <= k < state.size:
        raise EmbeddingError(f"k must be in [1, {state.size - 1}], got {k}")
    state.check_id(i)
    sims = state.vectors @ state.vectors[i]
    order = sorted(
        (j for j in range(state.size) if j != i), key=lambda j: (-sims[j], j)
    )
    return [(j, max(-1.0, min(1.0, float(sims[j])))) for j in order[:k]]


def save_vec(state: EmbeddingState, path: str | Path) -> None:
    """Write `V d iteration` then one `token_id f0 .. f(d-1)` line per token.

    Floats are written with shortest round-tripping repr, so a load followed
    by a save is byte-identical.
    """
    lines = [f"{state.size} {state.dim} {state.iteration}"]
    for i in range(state.size):
        values = " ".join(repr(float(x)) for x in state.vectors[i])
        lines.append(f"{i} {values}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_vec(path: str | Path) -> EmbeddingState:
    text = Path(path).read_text(encoding="utf-8")
    rows = text.splitlines()
    size, dim, iteration = (int(x) for x in rows[0].split())
    vectors = np.empty((size, dim), dtype=np.float64)
    for rec in rows[1 : size + 1]:
        parts = rec.split()
        vectors[int(parts[0])] = [float(x) for x in parts[1:]]
    provenance = "trained" if iteration == 0 else f"event:{iteration - 1}"
    return EmbeddingState(iteration=iteration, vectors=vectors, provenance=provenance)
