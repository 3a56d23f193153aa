"""Quantify change across iterations and build blinded A/B evaluation bundles.

Change is reported per word as raw displacement (distance between the two
unit vectors) and neighborhood churn (1 - Jaccard overlap of the top-k
neighbor sets). Blind bundles pair two alignment sets in seeded random order
with all provenance stripped, so an expert can judge before vs after without
knowing which is which; the sealed key lives in a separate file.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .aligner import AlignmentSet
from .corpus import Line
from .embedding import EmbeddingState, nearest_neighbors

DEFAULT_NEIGHBORHOOD = 10


class AnalyticsError(ValueError):
    """Mismatched snapshots or unknown bundle."""


@dataclass(frozen=True)
class WordChange:
    token: int
    displacement: float  # Euclidean distance between unit vectors, in [0, 2]
    churn: float  # 1 - Jaccard of top-k neighbor sets, in [0, 1]


def _check_compatible(snap_a: EmbeddingState, snap_b: EmbeddingState) -> None:
    if snap_a.vectors.shape != snap_b.vectors.shape:
        raise AnalyticsError(
            f"snapshot shapes differ: {snap_a.vectors.shape} vs {snap_b.vectors.shape}"
        )


def word_change(
    snap_a: EmbeddingState,
    snap_b: EmbeddingState,
    token: int,
    k: int = DEFAULT_NEIGHBORHOOD,
) -> WordChange:
    """Displacement and neighborhood churn of one token between snapshots."""
    _check_compatible(snap_a, snap_b)
    snap_a.check_id(token)
    delta = snap_a.vectors[token] - snap_b.vectors[token]
    displacement = float(np.sqrt(np.dot(delta, delta)))
    set_a = {j for j, _ in nearest_neighbors(snap_a, token, k)}
    set_b = {j for j, _ in nearest_neighbors(snap_b, token, k)}
    union = set_a | set_b
    churn = 1.0 - len(set_a & set_b) / len(union) if union else 0.0
    return WordChange(token=token, displacement=displacement, churn=churn)


def line_heatmap(
    snap_a: EmbeddingState,
    snap_b: EmbeddingState,
    line: Line,
    mode: str = "displacement",
    k: int = DEFAULT_NEIGHBORHOOD,
) -> list[float]:
    """Per-token-position intensity in [0, 1] for one line.

    Displacement is normalized by 2, the unit-sphere diameter; churn is
    already in [0, 1]. Duplicate tokens share one value.
    """
    if mode not in ("displacement", "churn"):
        raise AnalyticsError(f"unknown heatmap mode {mode!r}")
    _check_compatible(snap_a, snap_b)
    by_token: dict[int, float] = {}
    for token in set(line.token_ids):
        change = word_change(snap_a, snap_b, token, k)
        by_token[token] = (
            change.displacement / 2.0 if mode == "displacement" else change.churn
        )
    return [by_token[t] for t in line.token_ids]


@dataclass(frozen=True)
class BlindBundle:
    """Two alignment sets in seeded random order plus the sealed truth."""

    bundle_id: str
    presented: tuple[AlignmentSet, AlignmentSet]  # order shown: X then Y
    key: dict  # {"X": "before" | "after", "Y": ...}
    seed: int

    def payload_json(self) -> dict:
        """Provenance-scrubbed payload: no iterations, hashes, or timestamps."""
        return {
            "bundle_id": self.bundle_id,
            "edition_a": self.presented[0].edition_a,
            "edition_b": self.presented[0].edition_b,
            "presented": [
                {
                    "label": label,
                    "pairs": [p.to_json() for p in aset.pairs],
                }
                for label, aset in zip(("X", "Y"), self.presented)
            ],
        }

    def key_json(self) -> dict:
        return {
            "bundle_id": self.bundle_id,
            "seed": self.seed,
            "mapping": dict(self.key),
        }


def make_blind_bundle(
    before: AlignmentSet, after: AlignmentSet, seed: int
) -> BlindBundle:
    """Randomize presentation order deterministically from the seed."""
    if (before.edition_a, before.edition_b) != (after.edition_a, after.edition_b):
        raise AnalyticsError("blind bundle requires one edition pair")
    swap = bool(np.random.default_rng(seed).integers(0, 2))
    ident = hashlib.sha256(
        json.dumps(
            [before.iteration, after.iteration, before.edition_a, before.edition_b, seed],
            separators=(",", ":"),
        ).encode("utf-8")
    ).hexdigest()[:12]
    presented = (after, before) if swap else (before, after)
    key = {"X": "after", "Y": "before"} if swap else {"X": "before", "Y": "after"}
    return BlindBundle(bundle_id=ident, presented=presented, key=key, seed=seed)


def write_bundle(bundle: BlindBundle, payload_dir: Path, key_dir: Path) -> Path:
    """Write bundle_<id>.json and the sealed bundle_<id>.key separately."""
    payload_dir.mkdir(parents=True, exist_ok=True)
    key_dir.mkdir(parents=True, exist_ok=True)
    payload_path = payload_dir / f"bundle_{bundle.bundle_id}.json"
    payload_path.write_text(
        json.dumps(bundle.payload_json(), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    (key_dir / f"bundle_{bundle.bundle_id}.key").write_text(
        json.dumps(bundle.key_json(), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    return payload_path


def unseal(
    bundle_id: str, verdict: str, key_dir: Path, log_path: Path, timestamp: str
) -> dict:
    """Map an X/Y preference through the sealed key and append it to the log."""
    if verdict not in ("X", "Y"):
        raise AnalyticsError(f"verdict must be 'X' or 'Y', got {verdict!r}")
    key_path = key_dir / f"bundle_{bundle_id}.key"
    if not key_path.exists():
        raise AnalyticsError(f"unknown bundle {bundle_id!r}")
    key_doc = json.loads(key_path.read_text(encoding="utf-8"))
    record = {
        "bundle_id": bundle_id,
        "verdict": verdict,
        "preferred": key_doc["mapping"][verdict],
        "ts": timestamp,
    }
    with open(log_path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")
    return record
