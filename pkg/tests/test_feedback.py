import math

import numpy as np
import pytest

from helpers import random_bag, random_state
from versealign.embedding import EmbeddingState, cosine
from versealign.feedback import (
    DragEvent,
    FeedbackConfig,
    FeedbackError,
    RatingEvent,
    apply_drag,
    apply_rating,
    replay,
)
from versealign.transport import TransportPlan, wmd


def expected_cosine_after_pair_step(c: float, alpha: float) -> float:
    # scalar oracle: cosine of ((1-a)u + av, (1-a)v + au) for unit u.v = c,
    # derived by expanding the dot products by hand; holds for a < 0 too
    coupled = 2 * alpha * (1 - alpha)
    straight = (1 - alpha) ** 2 + alpha**2
    return (coupled + straight * c) / (straight + coupled * c)


def two_vector_state(c: float) -> EmbeddingState:
    # unit 2D vectors with cosine exactly c
    u = np.array([1.0, 0.0])
    v = np.array([c, math.sqrt(1 - c * c)])
    return EmbeddingState(iteration=0, vectors=np.array([u, v]), provenance="trained")


def rating_event(rating: int, plan: TransportPlan, event_id: int = 0) -> RatingEvent:
    return RatingEvent(
        event_id=event_id,
        a=("A", 0),
        b=("B", 0),
        rating=rating,
        plan_digest=plan.digest(),
        base_iteration=plan.iteration,
        timestamp="2025-01-01T00:00:00+00:00",
    )


def single_flow_plan(iteration: int = 0) -> TransportPlan:
    return TransportPlan(
        cost=0.5, flows=((0, 1, 1.0),), ground="unit-euclidean", iteration=iteration
    )


class TestApplyRating:
    def test_neutral_rating_is_bit_identical(self):
        state = random_state(6, 4, seed=0)
        plan = single_flow_plan()
        new = apply_rating(state, rating_event(3, plan), plan)
        assert new.iteration == 1
        assert np.array_equal(new.vectors, state.vectors)
        assert new.provenance == "event:0"

    def test_rating_five_matches_closed_form_and_increases(self):
        config = FeedbackConfig(eta=0.1, max_step=0.5)
        state = two_vector_state(0.0)
        plan = single_flow_plan()
        new = apply_rating(state, rating_event(5, plan), plan, config)
        # s = 1, mass' = 1, no clip since 0.1 * sqrt(2) < 0.5
        expected = expected_cosine_after_pair_step(0.0, 0.1)
        got = cosine(new, 0, 1)
        assert got == pytest.approx(expected, abs=1e-12)
        assert got > 0.0

    def test_rating_one_matches_closed_form_and_decreases(self):
        config = FeedbackConfig(eta=0.1, max_step=0.5)
        state = two_vector_state(0.3)
        plan = single_flow_plan()
        new = apply_rating(state, rating_event(1, plan), plan, config)
        expected = expected_cosine_after_pair_step(0.3, -0.1)
        got = cosine(new, 0, 1)
        assert got == pytest.approx(expected, abs=1e-12)
        assert got < 0.3

    def test_rating_four_is_half_strength(self):
        config = FeedbackConfig(eta=0.2, max_step=0.9)
        state = two_vector_state(0.1)
        plan = single_flow_plan()
        new = apply_rating(state, rating_event(4, plan), plan, config)
        # s = 0.5 so the step coefficient is eta / 2
        assert cosine(new, 0, 1) == pytest.approx(
            expected_cosine_after_pair_step(0.1, 0.1), abs=1e-12
        )

    def test_max_step_clips_the_displacement(self):
        config = FeedbackConfig(eta=0.9, max_step=0.2)
        state = two_vector_state(0.0)
        plan = single_flow_plan()
        new = apply_rating(state, rating_event(5, plan), plan, config)
        moved = np.linalg.norm(new.vectors[0] - state.vectors[0] * 1.0)
        # clipped step of norm 0.2, then renormalization shifts it slightly
        alpha_eff = 0.2 / math.sqrt(2.0)
        assert cosine(new, 0, 1) == pytest.approx(
            expected_cosine_after_pair_step(0.0, alpha_eff), abs=1e-12
        )
        assert moved < 0.9 * math.sqrt(2.0)

    def test_flow_floor_gates_small_flows(self):
        state = random_state(4, 3, seed=1)
        plan = TransportPlan(
            cost=0.4,
            flows=((0, 1, 0.9), (2, 3, 0.05)),
            ground="unit-euclidean",
            iteration=0,
        )
        config = FeedbackConfig(eta=0.1, flow_floor=0.1, max_step=0.5)
        new = apply_rating(state, rating_event(5, plan), plan, config)
        assert np.array_equal(new.vectors[2], state.vectors[2])
        assert np.array_equal(new.vectors[3], state.vectors[3])
        assert not np.array_equal(new.vectors[0], state.vectors[0])

    def test_locality_untouched_rows_bit_equal(self):
        state = random_state(10, 5, seed=2)
        plan = TransportPlan(
            cost=0.4,
            flows=((1, 4, 0.6), (1, 7, 0.4)),
            ground="unit-euclidean",
            iteration=0,
        )
        new = apply_rating(state, rating_event(5, plan), plan)
        touched = {1, 4, 7}
        for row in range(10):
            if row in touched:
                assert not np.array_equal(new.vectors[row], state.vectors[row])
            else:
                assert np.array_equal(new.vectors[row], state.vectors[row])

    def test_unit_norm_preserved(self):
        state = random_state(8, 4, seed=3)
        plan = TransportPlan(
            cost=0.4,
            flows=((0, 3, 0.5), (2, 3, 0.3), (0, 5, 0.2)),
            ground="unit-euclidean",
            iteration=0,
        )
        new = apply_rating(state, rating_event(5, plan), plan)
        assert np.abs(np.linalg.norm(new.vectors, axis=1) - 1).max() < 1e-9

    def test_stale_plan_rejected(self):
        state = random_state(4, 3, seed=4)
        plan = single_flow_plan(iteration=2)
        event = RatingEvent(
            event_id=0,
            a=("A", 0),
            b=("B", 0),
            rating=5,
            plan_digest=plan.digest(),
            base_iteration=0,
            timestamp="",
        )
        with pytest.raises(FeedbackError):
            apply_rating(state, event, plan)

    def test_invalid_rating_rejected(self):
        plan = single_flow_plan()
        with pytest.raises(FeedbackError):
            rating_event(0, plan)
        with pytest.raises(FeedbackError):
            rating_event(6, plan)


def drag_event(i, j, target, event_id=0, base_iteration=0) -> DragEvent:
    return DragEvent(
        event_id=event_id,
        i=i,
        j=j,
        target_similarity=target,
        base_iteration=base_iteration,
        timestamp="2025-01-01T00:00:00+00:00",
    )


class TestApplyDrag:
    def test_drag_to_current_cosine_is_noop(self):
        state = random_state(5, 4, seed=5)
        c = cosine(state, 0, 1)
        new = apply_drag(state, drag_event(0, 1, c))
        assert new.iteration == 1
        assert np.array_equal(new.vectors, state.vectors)

    def test_half_eta_covers_half_the_gap(self):
        # from c=0 toward t=1 at eta=0.5 the new cosine is exactly 0.5
        state = two_vector_state(0.0)
        new = apply_drag(state, drag_event(0, 1, 1.0), FeedbackConfig(eta=0.5))
        got = cosine(new, 0, 1)
        assert got == pytest.approx(0.5, abs=1e-12)
        assert 0.0 < got < 1.0

    def test_repulsion_covers_eta_fraction(self):
        state = two_vector_state(0.6)
        new = apply_drag(state, drag_event(0, 1, 0.2), FeedbackConfig(eta=0.25))
        assert cosine(new, 0, 1) == pytest.approx(0.6 - 0.25 * 0.4, abs=1e-12)

    def test_self_drag_rejected(self):
        with pytest.raises(FeedbackError):
            drag_event(2, 2, 0.5)

    def test_target_out_of_range_rejected(self):
        with pytest.raises(FeedbackError):
            drag_event(0, 1, 1.5)
        with pytest.raises(FeedbackError):
            drag_event(0, 1, -1.0)

    def test_moves_strictly_toward_never_past(self):
        rng = np.random.default_rng(6)
        state = random_state(12, 6, seed=7)
        for trial in range(200):
            i, j = rng.choice(12, 2, replace=False)
            c = cosine(state, int(i), int(j))
            t = float(rng.uniform(-0.9, 1.0))
            if abs(t - c) < 1e-9:
                continue
            new = apply_drag(state, drag_event(int(i), int(j), t))
            moved = cosine(new, int(i), int(j))
            assert (moved - c) * (t - c) > 0, trial
            assert abs(moved - c) <= abs(t - c) + 1e-12, trial

    def test_locality(self):
        state = random_state(9, 4, seed=8)
        new = apply_drag(state, drag_event(2, 6, 0.9))
        for row in range(9):
            if row in (2, 6):
                assert not np.array_equal(new.vectors[row], state.vectors[row])
            else:
                assert np.array_equal(new.vectors[row], state.vectors[row])

    def test_clip_shrinks_but_keeps_direction(self):
        state = two_vector_state(-0.5)
        config = FeedbackConfig(eta=1.0, max_step=0.05)
        new = apply_drag(state, drag_event(0, 1, 1.0), config)
        moved = cosine(new, 0, 1)
        assert -0.5 < moved < 1.0
        displacement = np.linalg.norm(
            (new.vectors[0] - state.vectors[0]).astype(float)
        )
        # renormalization can only shrink the raw clipped step of 0.05
        assert displacement <= 0.05 + 1e-12


class TestReplay:
    def test_empty_event_list_returns_initial(self):
        state = random_state(5, 3, seed=9)
        assert replay(state, [], {}) is state

    def test_one_neutral_rating(self):
        state = random_state(5, 3, seed=10)
        plan = single_flow_plan()
        event = rating_event(3, plan)
        out = replay(state, [event], {plan.digest(): plan})
        assert out.iteration == 1
        assert np.array_equal(out.vectors, state.vectors)

    def test_ten_event_session_bit_identical(self):
        state = random_state(15, 6, seed=11)
        rng = np.random.default_rng(12)
        events = []
        plans = {}
        live = state
        for event_id in range(10):
            if event_id % 2 == 0:
                a = random_bag(rng, 15)
                b = random_bag(rng, 15)
                plan = wmd(live, a, b)
                event = RatingEvent(
                    event_id=event_id,
                    a=("A", 0),
                    b=("B", 0),
                    rating=int(rng.integers(1, 6)),
                    plan_digest=plan.digest(),
                    base_iteration=live.iteration,
                    timestamp="",
                )
                plans[plan.digest()] = plan
                live = apply_rating(live, event, plan)
            else:
                i, j = (int(x) for x in rng.choice(15, 2, replace=False))
                event = drag_event(
                    i, j, float(rng.uniform(-0.5, 1.0)),
                    event_id=event_id, base_iteration=live.iteration,
                )
                live = apply_drag(live, event)
            events.append(event)
        replayed = replay(state, events, plans)
        assert replayed.iteration == live.iteration == 10
        assert np.array_equal(replayed.vectors, live.vectors)

    def test_gap_in_event_ids_rejected(self):
        state = random_state(5, 3, seed=13)
        events = [
            drag_event(0, 1, 0.5, event_id=0, base_iteration=0),
            drag_event(0, 2, 0.5, event_id=2, base_iteration=1),
        ]
        with pytest.raises(FeedbackError):
            replay(state, events, {})

    def test_missing_plan_rejected(self):
        state = random_state(5, 3, seed=14)
        plan = single_flow_plan()
        with pytest.raises(FeedbackError):
            replay(state, [rating_event(5, plan)], {})

    def test_wrong_base_iteration_rejected(self):
        state = random_state(5, 3, seed=15)
        with pytest.raises(FeedbackError):
            apply_drag(state, drag_event(0, 1, 0.5, base_iteration=3))
