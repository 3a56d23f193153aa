import json

import numpy as np
import pytest

from helpers import random_state
from versealign.aligner import AlignerConfig, AlignmentPair, AlignmentSet, Bin
from versealign.analytics import (
    AnalyticsError,
    line_heatmap,
    make_blind_bundle,
    unseal,
    word_change,
    write_bundle,
)
from versealign.corpus import Corpus
from versealign.embedding import EmbeddingState, unit_rows
from versealign.feedback import DragEvent, apply_drag


def aligned_set(pairs, iteration=0, a="A", b="B"):
    config = AlignerConfig()
    return AlignmentSet(
        iteration=iteration,
        edition_a=a,
        edition_b=b,
        pairs=tuple(pairs),
        config_hash=config.digest(),
        config=config,
    )


def pair(ai, bi, sim=0.9):
    return AlignmentPair(a=("A", ai), b=("B", bi), similarity=sim, bin=Bin.FULL)


class TestWordChange:
    def test_identical_snapshots(self):
        state = random_state(8, 4, seed=0)
        change = word_change(state, state, 3, k=4)
        assert change.displacement == 0.0
        assert change.churn == 0.0

    def test_disjoint_neighborhoods_churn_one(self):
        # two blocks of mutually close vectors; token 0's top-2 flips blocks
        vectors = unit_rows(
            np.array(
                [
                    [1.0, 0.0, 0.0, 0.0],
                    [0.99, 0.1, 0.0, 0.0],
                    [0.99, -0.1, 0.0, 0.0],
                    [0.0, 0.0, 1.0, 0.1],
                    [0.0, 0.0, 1.0, -0.1],
                ]
            )
        )
        snap_a = EmbeddingState(iteration=0, vectors=vectors, provenance="trained")
        flipped = vectors.copy()
        flipped[0] = np.array([0.0, 0.0, 1.0, 0.0])
        snap_b = EmbeddingState(iteration=1, vectors=flipped, provenance="event:0")
        change = word_change(snap_a, snap_b, 0, k=2)
        assert change.churn == 1.0

    def test_hand_computed_jaccard(self):
        # k=4 with overlap 2 and union 6: churn = 1 - 2/6
        base = np.eye(8)
        snap_a = EmbeddingState(iteration=0, vectors=base.copy(), provenance="trained")
        moved = base.copy()
        # neighbors of token 0 in A: {1,2,3,4} (tiny boosts); in B: {3,4,5,6}
        for j, eps in ((1, 0.4), (2, 0.3), (3, 0.2), (4, 0.1)):
            snap_a.vectors.setflags(write=True)
            snap_a.vectors[j, 0] = eps
        snap_a = EmbeddingState(
            iteration=0, vectors=unit_rows(snap_a.vectors), provenance="trained"
        )
        for j, eps in ((3, 0.4), (4, 0.3), (5, 0.2), (6, 0.1)):
            moved[j, 0] = eps
        snap_b = EmbeddingState(
            iteration=1, vectors=unit_rows(moved), provenance="event:0"
        )
        change = word_change(snap_a, snap_b, 0, k=4)
        assert change.churn == pytest.approx(1 - 2 / 6, abs=1e-12)

    def test_displacement_zero_iff_bit_equal(self):
        state = random_state(6, 4, seed=1)
        nudged = state.vectors.copy()
        nudged[2] = unit_rows(nudged[2][None, :] + 1e-9)[0]
        snap_b = EmbeddingState(iteration=1, vectors=nudged, provenance="event:0")
        assert word_change(state, snap_b, 2, k=2).displacement > 0.0
        assert word_change(state, snap_b, 1, k=2).displacement == 0.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(AnalyticsError):
            word_change(random_state(5, 3, seed=2), random_state(5, 4, seed=2), 0, 2)


class TestLineHeatmap:
    def make_line(self, text="carles li reis li"):
        corpus = Corpus()
        corpus.ingest_edition(text, "A")
        return corpus, corpus.edition("A").lines[0]

    def test_identical_snapshots_all_zero(self):
        corpus, line = self.make_line()
        state = random_state(len(corpus.vocabulary), 4, seed=3)
        assert line_heatmap(state, state, line, "displacement", k=2) == [0.0] * 4
        assert line_heatmap(state, state, line, "churn", k=2) == [0.0] * 4

    def test_drag_locality_in_displacement_mode(self):
        corpus, line = self.make_line()
        state = random_state(len(corpus.vocabulary), 4, seed=4)
        li = corpus.vocabulary.id("li")
        other = corpus.vocabulary.id("carles")
        event = DragEvent(
            event_id=0, i=li, j=other, target_similarity=0.9,
            base_iteration=0, timestamp="",
        )
        moved = apply_drag(state, event)
        intensity = line_heatmap(state, moved, line, "displacement", k=2)
        for position, token_id in enumerate(line.token_ids):
            if token_id in (li, other):
                assert intensity[position] > 0.0
            else:
                assert intensity[position] == 0.0

    def test_duplicate_positions_share_one_value(self):
        corpus, line = self.make_line("li reis li reis")
        state = random_state(len(corpus.vocabulary), 4, seed=5)
        moved = apply_drag(
            state,
            DragEvent(
                event_id=0, i=0, j=1, target_similarity=0.5,
                base_iteration=0, timestamp="",
            ),
        )
        intensity = line_heatmap(state, moved, line, "displacement", k=1)
        assert intensity[0] == intensity[2]
        assert intensity[1] == intensity[3]

    def test_intensities_within_unit_interval(self):
        corpus, line = self.make_line()
        snap_a = random_state(len(corpus.vocabulary), 4, seed=6)
        snap_b = random_state(len(corpus.vocabulary), 4, seed=7, iteration=1)
        for mode in ("displacement", "churn"):
            for value in line_heatmap(snap_a, snap_b, line, mode, k=2):
                assert 0.0 <= value <= 1.0

    def test_unknown_mode_rejected(self):
        corpus, line = self.make_line()
        state = random_state(len(corpus.vocabulary), 4, seed=8)
        with pytest.raises(AnalyticsError):
            line_heatmap(state, state, line, "velocity", k=2)


FORBIDDEN_KEYS = {"iteration", "config", "config_hash", "ts", "timestamp", "created", "seed"}


def all_keys(doc):
    keys = set()
    if isinstance(doc, dict):
        for key, value in doc.items():
            keys.add(key)
            keys |= all_keys(value)
    elif isinstance(doc, list):
        for item in doc:
            keys |= all_keys(item)
    return keys


class TestBlindBundle:
    def sets(self):
        before = aligned_set([pair(0, 0), pair(1, 1)], iteration=0)
        after = aligned_set([pair(0, 0), pair(2, 2, sim=0.8)], iteration=4)
        return before, after

    def test_same_seed_identical_bundle(self, tmp_path):
        before, after = self.sets()
        b1 = make_blind_bundle(before, after, seed=42)
        b2 = make_blind_bundle(before, after, seed=42)
        assert b1 == b2
        p1 = write_bundle(b1, tmp_path / "one", tmp_path / "one_keys")
        p2 = write_bundle(b2, tmp_path / "two", tmp_path / "two_keys")
        assert p1.read_bytes() == p2.read_bytes()

    def test_payload_scrubbed(self):
        before, after = self.sets()
        for seed in range(100):
            payload = make_blind_bundle(before, after, seed).payload_json()
            assert not (all_keys(payload) & FORBIDDEN_KEYS), seed

    def test_both_orders_occur(self):
        before, after = self.sets()
        orders = {
            make_blind_bundle(before, after, seed).key["X"] for seed in range(100)
        }
        assert orders == {"before", "after"}

    def test_key_restores_truth(self):
        before, after = self.sets()
        bundle = make_blind_bundle(before, after, seed=7)
        x_label = bundle.key["X"]
        shown_first = bundle.presented[0]
        assert (shown_first is before) == (x_label == "before")
        assert set(bundle.key.values()) == {"before", "after"}

    def test_mismatched_edition_pairs_rejected(self):
        before = aligned_set([pair(0, 0)])
        other = aligned_set([pair(0, 0)], a="A", b="C")
        with pytest.raises(AnalyticsError):
            make_blind_bundle(before, other, seed=0)


class TestUnseal:
    def test_verdict_maps_through_key(self, tmp_path):
        before, after = TestBlindBundle().sets()
        bundle = make_blind_bundle(before, after, seed=9)
        write_bundle(bundle, tmp_path / "bundles", tmp_path / "keys")
        log = tmp_path / "evaluations.jsonl"
        record = unseal(bundle.bundle_id, "X", tmp_path / "keys", log, "t0")
        assert record["preferred"] == bundle.key["X"]

    def test_unknown_bundle_rejected(self, tmp_path):
        with pytest.raises(AnalyticsError):
            unseal("nope", "X", tmp_path, tmp_path / "log.jsonl", "t0")

    def test_two_verdicts_append(self, tmp_path):
        before, after = TestBlindBundle().sets()
        bundle = make_blind_bundle(before, after, seed=10)
        write_bundle(bundle, tmp_path / "bundles", tmp_path / "keys")
        log = tmp_path / "evaluations.jsonl"
        unseal(bundle.bundle_id, "X", tmp_path / "keys", log, "t0")
        unseal(bundle.bundle_id, "Y", tmp_path / "keys", log, "t1")
        rows = [json.loads(r) for r in log.read_text().splitlines()]
        assert len(rows) == 2
        assert {r["ts"] for r in rows} == {"t0", "t1"}
