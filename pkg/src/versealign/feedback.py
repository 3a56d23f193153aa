"""Turn expert judgments into embedding updates; keep a replayable event log.

Two event kinds exist: Likert ratings of proposed alignments, which nudge the
word pairs named by the alignment's transport flows, and drag edits, which set
a target similarity for one word pair directly. Both produce a fresh snapshot;
replaying the ordered event log reproduces every snapshot bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .embedding import EmbeddingState
from .transport import TransportPlan


class FeedbackError(ValueError):
    """Invalid event, stale plan, or broken event ordering."""


@dataclass(frozen=True)
class FeedbackConfig:
    eta: float = 0.1  # learning rate, the signed Rocchio-style step scale
    flow_floor: float = 0.0  # minimum transport mass for a pair to count
    max_step: float = 0.5  # cap on any single word's displacement

    def __post_init__(self) -> None:
        if not 0.0 < self.eta <= 1.0:
            raise FeedbackError(f"eta must be in (0, 1], got {self.eta}")
        if self.flow_floor < 0.0:
            raise FeedbackError(f"flow_floor must be >= 0, got {self.flow_floor}")
        if not 0.0 < self.max_step <= 1.0:
            raise FeedbackError(f"max_step must be in (0, 1], got {self.max_step}")

    def to_json(self) -> dict:
        return {
            "eta": self.eta,
            "flow_floor": self.flow_floor,
            "max_step": self.max_step,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FeedbackConfig":
        return cls(**doc)


@dataclass(frozen=True)
class RatingEvent:
    event_id: int
    a: tuple[str, int]
    b: tuple[str, int]
    rating: int  # Likert 1..5, 3 neutral
    plan_digest: str
    base_iteration: int
    timestamp: str

    def __post_init__(self) -> None:
        if self.rating not in (1, 2, 3, 4, 5):
            raise FeedbackError(f"rating must be in 1..5, got {self.rating}")

    @property
    def strength(self) -> float:
        return (self.rating - 3) / 2

    def to_json(self) -> dict:
        return {
            "event_id": self.event_id,
            "kind": "rating",
            "a": list(self.a),
            "b": list(self.b),
            "rating": self.rating,
            "plan": self.plan_digest,
            "base_iteration": self.base_iteration,
            "ts": self.timestamp,
        }


@dataclass(frozen=True)
class DragEvent:
    event_id: int
    i: int
    j: int
    target_similarity: float
    base_iteration: int
    timestamp: str

    def __post_init__(self) -> None:
        if self.i == self.j:
            raise FeedbackError("drag requires two distinct tokens")
        if not -1.0 < self.target_similarity <= 1.0:
            raise FeedbackError(
                f"target similarity must be in (-1, 1], got {self.target_similarity}"
            )

    def to_json(self) -> dict:
        return {
            "event_id": self.event_id,
            "kind": "drag",
            "i": self.i,
            "j": self.j,
            "target": self.target_similarity,
            "base_iteration": self.base_iteration,
            "ts": self.timestamp,
        }


FeedbackEvent = RatingEvent | DragEvent


def event_from_json(doc: dict) -> FeedbackEvent:
    kind = doc["kind"]
    if kind == "rating":
        return RatingEvent(
            event_id=int(doc["event_id"]),
            a=(doc["a"][0], int(doc["a"][1])),
            b=(doc["b"][0], int(doc["b"][1])),
            rating=int(doc["rating"]),
            plan_digest=doc["plan"],
            base_iteration=int(doc["base_iteration"]),
            timestamp=doc["ts"],
        )
    if kind == "drag":
        return DragEvent(
            event_id=int(doc["event_id"]),
            i=int(doc["i"]),
            j=int(doc["j"]),
            target_similarity=float(doc["target"]),
            base_iteration=int(doc["base_iteration"]),
            timestamp=doc["ts"],
        )
    raise FeedbackError(f"unknown event kind {kind!r}")


def _renormalized(row: np.ndarray) -> np.ndarray:
    return row / math.sqrt(float(np.dot(row, row)))


def apply_rating(
    state: EmbeddingState,
    event: RatingEvent,
    plan: TransportPlan,
    config: FeedbackConfig | None = None,
) -> EmbeddingState:
    """Move each qualifying flow pair together (positive rating) or apart.

    Every flow (i, j, mass) with mass >= flow_floor contributes the step
    eta * s * mass' * (v_j - v_i) to word i and its mirror to word j, with
    mass' the mass over the plan's largest flow and s = (rating - 3) / 2.
    Steps accumulate against the base snapshot, each word's total step is
    clipped to max_step, touched rows are renormalized; everything else is
    left bit-identical.
    """
    config = config or FeedbackConfig()
    if plan.iteration != state.iteration:
        raise FeedbackError(
            f"stale plan: computed at iteration {plan.iteration}, "
            f"state is at {state.iteration}"
        )
    if event.base_iteration != state.iteration:
        raise FeedbackError(
            f"event targets iteration {event.base_iteration}, "
            f"state is at {state.iteration}"
        )
    provenance = f"event:{event.event_id}"
    strength = event.strength
    qualifying = [f for f in plan.flows if f[2] >= config.flow_floor]
    if strength == 0.0 or not qualifying:
        return EmbeddingState(
            iteration=state.iteration + 1, vectors=state.vectors, provenance=provenance
        )
    max_mass = max(m for _, _, m in qualifying)
    base = state.vectors
    deltas: dict[int, np.ndarray] = {}
    for i, j, mass in qualifying:
        if i == j:
            continue
        coeff = config.eta * strength * (mass / max_mass)
        step = coeff * (base[j] - base[i])
        deltas[i] = deltas.get(i, 0.0) + step
        deltas[j] = deltas.get(j, 0.0) - step
    vectors = base.copy()
    for token, delta in deltas.items():
        norm = math.sqrt(float(np.dot(delta, delta)))
        if norm == 0.0:
            continue
        if norm > config.max_step:
            delta = delta * (config.max_step / norm)
        vectors[token] = _renormalized(base[token] + delta)
    return EmbeddingState(
        iteration=state.iteration + 1, vectors=vectors, provenance=provenance
    )


def _attraction_coefficient(c: float, gain: float) -> float:
    # beta solves new_cos - c = gain for the symmetric convex move
    # u' = (1-alpha) u + alpha v (and mirrored), beta = 2 alpha (1 - alpha).
    beta = gain / ((1.0 - c) * (1.0 + c + gain))
    beta = min(beta, 0.5)
    return (1.0 - math.sqrt(max(0.0, 1.0 - 2.0 * beta))) / 2.0


def _repulsion_coefficient(c: float, drop: float) -> float:
    # b solves c - new_cos = drop for u' = (1+alpha) u - alpha v (mirrored),
    # b = 2 alpha (1 + alpha).
    b = drop / ((1.0 - c) * (1.0 + c - drop))
    return (math.sqrt(1.0 + 2.0 * b) - 1.0) / 2.0


def apply_drag(
    state: EmbeddingState, event: DragEvent, config: FeedbackConfig | None = None
) -> EmbeddingState:
    """Move both dragged words so their cosine steps a fraction eta toward
    the target, never past it.

    The step coefficient is solved in closed form from the target gap, then
    shrunk if either word's displacement would exceed max_step. A drag to the
    current cosine leaves the vectors bit-identical.
    """
    config = config or FeedbackConfig()
    if event.base_iteration != state.iteration:
        raise FeedbackError(
            f"event targets iteration {event.base_iteration}, "
            f"state is at {state.iteration}"
        )
    state.check_id(event.i)
    state.check_id(event.j)
    provenance = f"event:{event.event_id}"
    u = state.vectors[event.i]
    v = state.vectors[event.j]
    c = max(-1.0, min(1.0, float(np.dot(u, v))))
    t = event.target_similarity
    if t == c:
        return EmbeddingState(
            iteration=state.iteration + 1, vectors=state.vectors, provenance=provenance
        )
    if c >= 1.0 - 1e-12 and t < c:
        raise FeedbackError("vectors coincide; repulsion direction is undefined")
    if c <= -1.0 + 1e-12 and t > c:
        raise FeedbackError("vectors are antipodal; attraction direction is undefined")
    if t > c:
        alpha = _attraction_coefficient(c, config.eta * (t - c))
    else:
        alpha = -_repulsion_coefficient(c, config.eta * (c - t))
    displacement = abs(alpha) * math.sqrt(max(0.0, 2.0 - 2.0 * c))
    if displacement > config.max_step:
        alpha *= config.max_step / displacement
    vectors = state.vectors.copy()
    vectors[event.i] = _renormalized(u + alpha * (v - u))
    vectors[event.j] = _renormalized(v + alpha * (u - v))
    return EmbeddingState(
        iteration=state.iteration + 1, vectors=vectors, provenance=provenance
    )


def replay(
    initial_state: EmbeddingState,
    events: Iterable[FeedbackEvent],
    stored_plans: Mapping[str, TransportPlan],
    config: FeedbackConfig | None = None,
) -> EmbeddingState:
    """Fold the ordered event log over the initial snapshot.

    Event ids must be consecutive; every rating's plan must be present in
    stored_plans under its digest. The result is bit-identical to the state
    the live session ended with.
    """
    config = config or FeedbackConfig()
    state = initial_state
    expected: int | None = None
    for event in events:
        if expected is not None and event.event_id != expected:
            raise FeedbackError(
                f"gap or reorder in event ids: expected {expected}, "
                f"got {event.event_id}"
            )
        if isinstance(event, RatingEvent):
            plan = stored_plans.get(event.plan_digest)
            if plan is None:
                raise FeedbackError(f"missing stored plan {event.plan_digest}")
            state = apply_rating(state, event, plan, config)
        else:
            state = apply_drag(state, event, config)
        expected = event.event_id + 1
    return state


def append_event_line(fh, event: FeedbackEvent) -> None:
    """Serialize one event as a single JSON line (the append-only log format)."""
    fh.write(json.dumps(event.to_json(), sort_keys=True) + "\n")
