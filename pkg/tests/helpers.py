"""Shared test fixtures: independent oracles and synthetic corpora.

The vertex enumeration here is the reference solver for transport tests: it
enumerates every basic feasible solution (spanning tree of the bipartite
supply/demand graph) and takes the cheapest, touching none of the production
solver's code path.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

from versealign.corpus import Corpus
from versealign.embedding import EmbeddingState, unit_rows
from versealign.transport import BagOfWords


def random_state(
    size: int, dim: int, seed: int, iteration: int = 0
) -> EmbeddingState:
    rng = np.random.default_rng(seed)
    return EmbeddingState(
        iteration=iteration,
        vectors=unit_rows(rng.standard_normal((size, dim))),
        provenance="trained",
    )


def random_bag(
    rng: np.random.Generator, vocab_size: int, max_tokens: int = 4
) -> BagOfWords:
    n = int(rng.integers(1, max_tokens + 1))
    ids = sorted(rng.choice(vocab_size, size=n, replace=False).tolist())
    weights = rng.random(n) + 0.05
    weights = weights / weights.sum()
    return BagOfWords(
        entries=tuple((int(i), float(w)) for i, w in zip(ids, weights)),
        source_line=("rand", 0),
    )


@lru_cache(maxsize=None)
def _tree_programs(m: int, n: int):
    """All spanning trees of K_{m,n} with a leaf-peeling evaluation order."""
    cells = [(i, j) for i in range(m) for j in range(n)]
    programs = []
    for subset in combinations(range(m * n), m + n - 1):
        parent = list(range(m + n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        acyclic = True
        for idx in subset:
            i, j = cells[idx]
            ri, rj = find(i), find(m + j)
            if ri == rj:
                acyclic = False
                break
            parent[ri] = rj
        if not acyclic:
            continue
        tree = [cells[idx] for idx in subset]
        incident: dict[int, list[int]] = {}
        for k, (i, j) in enumerate(tree):
            incident.setdefault(i, []).append(k)
            incident.setdefault(m + j, []).append(k)
        degree = {node: len(ks) for node, ks in incident.items()}
        removed: set[int] = set()
        queue = [node for node, d in degree.items() if d == 1]
        program = []
        while queue:
            node = queue.pop(0)
            edge = next((k for k in incident[node] if k not in removed), None)
            if edge is None:
                continue
            i, j = tree[edge]
            other = m + j if node < m else i
            program.append((edge, node, other, i, j))
            removed.add(edge)
            degree[node] -= 1
            degree[other] -= 1
            if degree[other] == 1:
                queue.append(other)
        assert len(program) == len(tree)
        programs.append(program)
    return programs


def enumerate_vertex_cost(wa, wb, cost) -> float:
    """Exact optimum by brute force over all basic feasible solutions."""
    m, n = len(wa), len(wb)
    best = None
    for program in _tree_programs(m, n):
        residual = list(wa) + [float(x) for x in wb]
        feasible = True
        total = 0.0
        for _, node, other, i, j in program:
            mass = residual[node]
            if mass < -1e-12:
                feasible = False
                break
            residual[node] = 0.0
            residual[other] -= mass
            total += mass * cost[i][j]
        if feasible and (best is None or total < best):
            best = total
    assert best is not None
    return best


# Deterministic pseudo-archaic corpus: a base edition plus dialectal variants.

_STEMS = [
    "carles", "reis", "emperere", "france", "rollant", "olivier", "paien",
    "espee", "munt", "ciel", "deus", "franceis", "cheval", "halt", "grant",
    "baron", "cunte", "terre", "mort", "bataille", "escut", "helme", "ost",
    "seignur", "duc", "marche", "guarde", "porte", "chastel", "glaive",
    "sanc", "proz", "vassal", "honur", "clere", "lance", "destrier", "plaine",
    "fier", "bel", "riche", "saint", "veir", "grief", "noble", "ardit",
]

_VARIANTS = {
    "carles": "charles", "reis": "rois", "emperere": "empereur",
    "franceis": "francois", "cheval": "chival", "halt": "haut",
    "seignur": "seigneur", "honur": "honour", "munt": "mont",
    "espee": "espede", "veir": "voir", "proz": "preux", "cunte": "conte",
    "guarde": "garde", "helme": "heaume", "escut": "escu",
}


def synthetic_editions(
    n_lines: int = 67, n_editions: int = 3, seed: int = 5
) -> dict[str, str]:
    """Editions of one synthetic tradition with spelling drift and word swaps."""
    rng = np.random.default_rng(seed)
    base_lines = []
    for _ in range(n_lines):
        length = int(rng.integers(6, 11))
        base_lines.append([_STEMS[int(k)] for k in rng.integers(0, len(_STEMS), length)])
    editions = {"base": "\n".join(" ".join(line) for line in base_lines)}
    for e in range(1, n_editions):
        rows = []
        for line in base_lines:
            words = list(line)
            for idx, word in enumerate(words):
                if word in _VARIANTS and rng.random() < 0.35:
                    words[idx] = _VARIANTS[word]
            if len(words) > 6 and rng.random() < 0.2:
                words.pop(int(rng.integers(0, len(words))))
            if rng.random() < 0.15:
                k = int(rng.integers(0, len(words) - 1))
                words[k], words[k + 1] = words[k + 1], words[k]
            rows.append(" ".join(words))
        editions[f"var{e}"] = "\n".join(rows)
    return editions


def half_line_fixture(n_lines: int = 20, half: int = 6, seed: int = 3):
    """Edition B splits every line of edition A into two half-lines.

    Tokens are unique per line family; the embedding puts first-half words in
    one hemisphere and second-half words in the other, so a whole-line
    comparison of a true half-pair must ship half its mass across the sphere.
    Returns (corpus, state, ground_truth_keys).
    """
    corpus = Corpus()
    lines_a = []
    lines_b = []
    for i in range(n_lines):
        left = [f"l{i}w{k}" for k in range(half)]
        right = [f"r{i}w{k}" for k in range(half)]
        lines_a.append(" ".join(left + right))
        lines_b.append(" ".join(left))
        lines_b.append(" ".join(right))
    corpus.ingest_edition("\n".join(lines_a), "A")
    corpus.ingest_edition("\n".join(lines_b), "B")

    rng = np.random.default_rng(seed)
    dim = 16
    phi = np.deg2rad(20.0)
    vectors = np.zeros((len(corpus.vocabulary), dim))
    for token, token_id in corpus.vocabulary.token_to_id.items():
        pole = 1.0 if token.startswith("l") else -1.0
        noise = rng.standard_normal(dim)
        noise[0] = 0.0
        noise /= np.sqrt(np.dot(noise, noise))
        vectors[token_id] = np.cos(phi) * pole * np.eye(dim)[0] + np.sin(phi) * noise
    state = EmbeddingState(
        iteration=0, vectors=unit_rows(vectors), provenance="trained"
    )
    truth = set()
    for i in range(n_lines):
        truth.add((("A", i), ("B", 2 * i)))
        truth.add((("A", i), ("B", 2 * i + 1)))
    return corpus, state, truth
