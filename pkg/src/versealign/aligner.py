"""Propose line alignments between two editions and diff them across iterations.

Pairs inside a diagonal band are scored by word mover's distance. Length-ratio
binning routes suspected half-lines (one verse split over two shorter lines in
the other edition, a different-meter artifact) through a sub-span search on
the longer line instead of a whole-line comparison that would punish them.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass

from .corpus import Edition, Line
from .embedding import EmbeddingState
from .transport import (
    TransportPlan,
    bag_from_token_ids,
    nbow,
    one_sided_lower_bound,
    relaxed_lower_bound,
    similarity,
    wmd,
)


class AlignerError(ValueError):
    """Invalid configuration or mismatched alignment sets."""


class Bin(enum.Enum):
    FULL = "full"
    HALF_A = "half_a"  # the a-side line is the half
    HALF_B = "half_b"


@dataclass(frozen=True)
class AlignerConfig:
    band_width: float = 0.15
    theta_full: float = 0.55
    theta_half: float = 0.5
    half_ratio: float = 0.65
    mutual_best: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.band_width <= 1.0:
            raise AlignerError(f"band_width must be in (0, 1], got {self.band_width}")
        for name in ("theta_full", "theta_half", "half_ratio"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise AlignerError(f"{name} must be in (0, 1), got {value}")

    def to_json(self) -> dict:
        return {
            "band_width": self.band_width,
            "theta_full": self.theta_full,
            "theta_half": self.theta_half,
            "half_ratio": self.half_ratio,
            "mutual_best": self.mutual_best,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "AlignerConfig":
        return cls(**doc)

    def digest(self) -> str:
        canonical = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    def theta(self, bin_: Bin) -> float:
        return self.theta_full if bin_ is Bin.FULL else self.theta_half


@dataclass(frozen=True)
class AlignmentPair:
    """One accepted line correspondence; half-line pairs carry the matched span.

    span is a half-open (start, stop) token range on the longer line, present
    exactly when bin is not FULL.
    """

    a: tuple[str, int]
    b: tuple[str, int]
    similarity: float
    bin: Bin
    span: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if (self.bin is Bin.FULL) != (self.span is None):
            raise AlignerError("span must be present exactly for half-line bins")
        if self.span is not None and not 0 <= self.span[0] < self.span[1]:
            raise AlignerError(f"invalid span {self.span}")

    @property
    def key(self) -> tuple:
        return (self.a, self.b, self.bin.value)

    def to_json(self) -> dict:
        return {
            "a": list(self.a),
            "b": list(self.b),
            "sim": self.similarity,
            "bin": self.bin.value,
            "span": list(self.span) if self.span else None,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "AlignmentPair":
        span = doc.get("span")
        return cls(
            a=(doc["a"][0], int(doc["a"][1])),
            b=(doc["b"][0], int(doc["b"][1])),
            similarity=float(doc["sim"]),
            bin=Bin(doc["bin"]),
            span=(int(span[0]), int(span[1])) if span else None,
        )


@dataclass(frozen=True)
class AlignmentSet:
    iteration: int
    edition_a: str
    edition_b: str
    pairs: tuple[AlignmentPair, ...]
    config_hash: str
    config: AlignerConfig

    def keys(self) -> frozenset:
        return frozenset(p.key for p in self.pairs)

    def pair(self, a: tuple[str, int], b: tuple[str, int]) -> AlignmentPair | None:
        for p in self.pairs:
            if p.a == a and p.b == b:
                return p
        return None

    def to_json(self) -> dict:
        return {
            "iteration": self.iteration,
            "edition_a": self.edition_a,
            "edition_b": self.edition_b,
            "config": self.config.to_json(),
            "config_hash": self.config_hash,
            "pairs": [p.to_json() for p in self.pairs],
        }

    def to_jsonl(self) -> str:
        header = {
            "iteration": self.iteration,
            "edition_a": self.edition_a,
            "edition_b": self.edition_b,
            "config": self.config.to_json(),
            "config_hash": self.config_hash,
        }
        records = [json.dumps(header, sort_keys=True)]
        records.extend(json.dumps(p.to_json(), sort_keys=True) for p in self.pairs)
        return "\n".join(records) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "AlignmentSet":
        rows = [json.loads(r) for r in text.splitlines() if r.strip()]
        if not rows:
            raise AlignerError("empty alignment document")
        header = rows[0]
        return cls(
            iteration=int(header["iteration"]),
            edition_a=header["edition_a"],
            edition_b=header["edition_b"],
            pairs=tuple(AlignmentPair.from_json(r) for r in rows[1:]),
            config_hash=header["config_hash"],
            config=AlignerConfig.from_json(header["config"]),
        )


@dataclass(frozen=True)
class AlignmentDiff:
    added: frozenset
    removed: frozenset
    retained: frozenset

    def to_json(self) -> dict:
        def encode(keys: frozenset) -> list:
            return [
                {"a": list(a), "b": list(b), "bin": bin_}
                for a, b, bin_ in sorted(keys)
            ]

        return {
            "added": encode(self.added),
            "removed": encode(self.removed),
            "retained": encode(self.retained),
        }


def candidate_window(
    edition_a: Edition, edition_b: Edition, band_width: float
) -> list[tuple[Line, Line]]:
    """Line pairs whose relative positions differ by at most band_width."""
    if not edition_a.lines or not edition_b.lines:
        raise AlignerError("candidate_window requires two non-empty editions")
    len_a = len(edition_a.lines)
    len_b = len(edition_b.lines)
    # |i/len_a - j/len_b| <= band, cross-multiplied to keep the boundary exact
    limit = band_width * len_a * len_b
    out = []
    for la in edition_a.lines:
        for lb in edition_b.lines:
            if abs(la.index * len_b - lb.index * len_a) <= limit:
                out.append((la, lb))
    return out


def classify_bin(line_a: Line, line_b: Line, half_ratio: float) -> Bin:
    """Length-ratio binning: markedly shorter side becomes the half-line."""
    na, nb = len(line_a), len(line_b)
    if min(na, nb) / max(na, nb) < half_ratio:
        return Bin.HALF_A if na < nb else Bin.HALF_B
    return Bin.FULL


def best_subspan(
    state: EmbeddingState, short_line: Line, long_line: Line
) -> tuple[tuple[int, int], TransportPlan]:
    """Cheapest contiguous span of the long line against the short line.

    Candidate spans have lengths within one token of the short line (clamped
    to valid sizes); ties resolve to the earliest start, then shortest span.
    """
    n_short, n_long = len(short_line), len(long_line)
    if n_short >= n_long:
        raise AlignerError("best_subspan requires the first line to be shorter")
    short_bag = nbow(short_line)
    lo = max(1, n_short - 1)
    hi = min(n_long, n_short + 1)
    best: tuple[tuple[int, int], TransportPlan] | None = None
    for start in range(n_long):
        for length in range(lo, hi + 1):
            stop = start + length
            if stop > n_long:
                break
            span_bag = bag_from_token_ids(
                long_line.token_ids[start:stop], long_line.line_id
            )
            plan = wmd(state, short_bag, span_bag)
            if best is None or plan.cost < best[1].cost:
                best = ((start, stop), plan)
    assert best is not None
    return best


def _score(
    state: EmbeddingState, line_a: Line, line_b: Line, bin_: Bin
) -> tuple[float, tuple[int, int] | None]:
    if bin_ is Bin.FULL:
        plan = wmd(state, nbow(line_a), nbow(line_b))
        return plan.cost, None
    short, long = (line_a, line_b) if bin_ is Bin.HALF_A else (line_b, line_a)
    span, plan = best_subspan(state, short, long)
    return plan.cost, span


def _cost_floor(
    state: EmbeddingState, line_a: Line, line_b: Line, bin_: Bin
) -> float:
    if bin_ is Bin.FULL:
        return relaxed_lower_bound(state, nbow(line_a), nbow(line_b))
    short, long = (line_a, line_b) if bin_ is Bin.HALF_A else (line_b, line_a)
    # nearest-target relaxation over the whole long line bounds every span
    return one_sided_lower_bound(state, nbow(short), sorted(set(long.token_ids)))


def _mutual_best_filter(pairs: list[AlignmentPair]) -> list[AlignmentPair]:
    """Keep pairs that are each other's best within their bin class.

    Classes are full vs half (both half sides together), so one line may
    still hold a full-line match and a half-line match simultaneously.
    """
    kept: list[AlignmentPair] = []
    for is_full in (True, False):
        group = [p for p in pairs if (p.bin is Bin.FULL) == is_full]
        best_a: dict[tuple, AlignmentPair] = {}
        best_b: dict[tuple, AlignmentPair] = {}
        for p in group:
            cur = best_a.get(p.a)
            if cur is None or (-p.similarity, p.b) < (-cur.similarity, cur.b):
                best_a[p.a] = p
            cur = best_b.get(p.b)
            if cur is None or (-p.similarity, p.a) < (-cur.similarity, cur.a):
                best_b[p.b] = p
        kept.extend(
            p for p in group if best_a[p.a] is p and best_b[p.b] is p
        )
    return kept


def align(
    state: EmbeddingState,
    edition_a: Edition,
    edition_b: Edition,
    config: AlignerConfig | None = None,
    prune: bool = True,
) -> AlignmentSet:
    """Score banded candidates per bin and keep those above the bin threshold.

    With prune on, candidates whose relaxed cost floor already caps their
    similarity below the threshold skip the exact solve; accepted sets are
    identical either way.
    """
    config = config or AlignerConfig()
    accepted: list[AlignmentPair] = []
    for line_a, line_b in candidate_window(edition_a, edition_b, config.band_width):
        bin_ = classify_bin(line_a, line_b, config.half_ratio)
        theta = config.theta(bin_)
        if prune and similarity(_cost_floor(state, line_a, line_b, bin_)) < theta:
            continue
        cost, span = _score(state, line_a, line_b, bin_)
        sim = similarity(cost)
        if sim >= theta:
            accepted.append(
                AlignmentPair(
                    a=line_a.line_id,
                    b=line_b.line_id,
                    similarity=sim,
                    bin=bin_,
                    span=span,
                )
            )
    if config.mutual_best:
        accepted = _mutual_best_filter(accepted)
    accepted.sort(key=lambda p: (p.a, p.b, p.bin.value))
    return AlignmentSet(
        iteration=state.iteration,
        edition_a=edition_a.edition_id,
        edition_b=edition_b.edition_id,
        pairs=tuple(accepted),
        config_hash=config.digest(),
        config=config,
    )


def diff(prev: AlignmentSet, next_: AlignmentSet) -> AlignmentDiff:
    """Exact set differences on (a, b, bin) keys."""
    if (prev.edition_a, prev.edition_b) != (next_.edition_a, next_.edition_b):
        raise AlignerError(
            "cannot diff alignment sets over different edition pairs: "
            f"{(prev.edition_a, prev.edition_b)} vs {(next_.edition_a, next_.edition_b)}"
        )
    prev_keys = prev.keys()
    next_keys = next_.keys()
    return AlignmentDiff(
        added=frozenset(next_keys - prev_keys),
        removed=frozenset(prev_keys - next_keys),
        retained=frozenset(prev_keys & next_keys),
    )
