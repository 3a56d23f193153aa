"""Project persistence: directory layout, event-sourced state, and replay.

A project directory holds the raw editions, the tokenized corpus, one
embedding snapshot per iteration, alignment sets, the append-only feedback
log, content-addressed transport plans, and blind evaluation bundles:

    project.json  editions/*.txt  corpus/*.json  snapshots/iter_<n>.vec
    alignments/iter_<n>.jsonl  events.jsonl  plans/  bundles/  bundles/keys/

The event log is the ground truth: every snapshot above iteration 0 is
derivable from iter_0.vec plus the log, so a crash between an event append
and its snapshot write loses nothing that replay cannot rebuild.
"""

from __future__ import annotations

import json
import os
import re
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np

from . import aligner as aligner_mod
from . import analytics, embedding, feedback, transport
from .aligner import AlignerConfig, AlignmentDiff, AlignmentSet, Bin
from .corpus import Corpus, Edition, edition_from_json, edition_to_json
from .embedding import EmbeddingState
from .feedback import DragEvent, FeedbackConfig, FeedbackEvent, RatingEvent
from .transport import TransportPlan

_SNAPSHOT_RE = re.compile(r"iter_(\d+)\.vec$")
_ALIGNMENT_RE = re.compile(r"iter_(\d+)\.jsonl$")


class ProjectError(ValueError):
    """Invalid project operation or inconsistent directory state."""


class NotFoundError(ProjectError):
    """Unknown edition, line, iteration, pair, or bundle."""


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


class Project:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.corpus = Corpus()

    # --- lifecycle -------------------------------------------------------

    @classmethod
    def init(cls, root: str | Path, project_id: str | None = None) -> "Project":
        root = Path(root)
        if (root / "project.json").exists():
            raise ProjectError(f"project already initialized at {root}")
        for sub in ("editions", "corpus", "snapshots", "alignments", "plans",
                    "bundles", "bundles/keys"):
            (root / sub).mkdir(parents=True, exist_ok=True)
        doc = {
            "project_id": project_id or root.name,
            "created": _utcnow(),
            "editions": [],
            "defaults": {
                "embedding": {
                    "dim": embedding.DEFAULT_DIM,
                    "window": embedding.DEFAULT_WINDOW,
                    "seed": 0,
                },
                "aligner": AlignerConfig().to_json(),
                "feedback": FeedbackConfig().to_json(),
            },
        }
        _write_atomic(root / "project.json", json.dumps(doc, indent=2) + "\n")
        return cls.load(root)

    @classmethod
    def load(cls, root: str | Path) -> "Project":
        project = cls(root)
        if not project.manifest_path.exists():
            raise NotFoundError(f"no project at {project.root}")
        manifest = project.manifest
        vocab_path = project.root / "corpus" / "vocabulary.json"
        if vocab_path.exists():
            from .corpus import Vocabulary

            vocabulary = Vocabulary.from_json(
                json.loads(vocab_path.read_text(encoding="utf-8"))
            )
            project.corpus.vocabulary = vocabulary
            for edition_id in manifest["editions"]:
                doc = json.loads(
                    (project.root / "corpus" / f"{edition_id}.json").read_text(
                        encoding="utf-8"
                    )
                )
                project.corpus.editions[edition_id] = edition_from_json(doc, vocabulary)
        # snapshot iterations must be contiguous from zero
        iterations = project.snapshot_iterations()
        if iterations and iterations != list(range(len(iterations))):
            raise ProjectError(f"snapshot iterations not contiguous: {iterations}")
        return project

    @property
    def manifest_path(self) -> Path:
        return self.root / "project.json"

    @property
    def manifest(self) -> dict:
        return json.loads(self.manifest_path.read_text(encoding="utf-8"))

    def _update_manifest(self, **changes) -> None:
        doc = self.manifest
        doc.update(changes)
        _write_atomic(self.manifest_path, json.dumps(doc, indent=2) + "\n")

    @property
    def feedback_config(self) -> FeedbackConfig:
        return FeedbackConfig.from_json(self.manifest["defaults"]["feedback"])

    # --- corpus ----------------------------------------------------------

    def ingest(self, source_text: str, edition_id: str, title: str = "") -> Edition:
        """Add one edition; allowed only before any embedding is trained."""
        if self.snapshot_iterations():
            raise ProjectError(
                "cannot ingest new editions after training: token ids are frozen"
            )
        edition = self.corpus.ingest_edition(source_text, edition_id, title)
        (self.root / "editions" / f"{edition_id}.txt").write_text(
            source_text, encoding="utf-8"
        )
        self._write_corpus()
        manifest = self.manifest
        ids = manifest["editions"] + [edition_id]
        self._update_manifest(editions=ids)
        return edition

    def _write_corpus(self) -> None:
        for edition_id, edition in self.corpus.editions.items():
            _write_atomic(
                self.root / "corpus" / f"{edition_id}.json",
                json.dumps(edition_to_json(edition), ensure_ascii=False, indent=2)
                + "\n",
            )
        _write_atomic(
            self.root / "corpus" / "vocabulary.json",
            json.dumps(self.corpus.vocabulary.to_json(), ensure_ascii=False, indent=2)
            + "\n",
        )

    def edition(self, edition_id: str) -> Edition:
        try:
            return self.corpus.edition(edition_id)
        except ValueError as exc:
            raise NotFoundError(str(exc)) from None

    def line(self, line_id: tuple[str, int]):
        try:
            return self.corpus.line(line_id)
        except ValueError as exc:
            raise NotFoundError(str(exc)) from None

    # --- snapshots -------------------------------------------------------

    def snapshot_path(self, iteration: int) -> Path:
        return self.root / "snapshots" / f"iter_{iteration}.vec"

    def snapshot_iterations(self) -> list[int]:
        found = []
        snapdir = self.root / "snapshots"
        if snapdir.exists():
            for name in os.listdir(snapdir):
                match = _SNAPSHOT_RE.fullmatch(name)
                if match:
                    found.append(int(match.group(1)))
        return sorted(found)

    def load_snapshot(self, iteration: int) -> EmbeddingState:
        path = self.snapshot_path(iteration)
        if not path.exists():
            raise NotFoundError(f"no snapshot for iteration {iteration}")
        return embedding.load_vec(path)

    def latest_iteration(self) -> int:
        iterations = self.snapshot_iterations()
        if not iterations:
            raise ProjectError("no embedding trained yet; run train first")
        return iterations[-1]

    def latest_state(self) -> EmbeddingState:
        return self.load_snapshot(self.latest_iteration())

    def _save_snapshot(self, state: EmbeddingState) -> Path:
        path = self.snapshot_path(state.iteration)
        tmp = path.with_suffix(".vec.tmp")
        embedding.save_vec(state, tmp)
        os.replace(tmp, path)
        return path

    def train(self, dim: int | None = None, window: int | None = None,
              seed: int | None = None) -> EmbeddingState:
        """Build the iteration-0 snapshot from the ingested corpus."""
        if not self.corpus.editions:
            raise ProjectError("no editions ingested")
        if len(self.snapshot_iterations()) > 1:
            raise ProjectError(
                "feedback snapshots exist; retraining would orphan the event log"
            )
        defaults = self.manifest["defaults"]["embedding"]
        params = {
            "dim": dim if dim is not None else defaults["dim"],
            "window": window if window is not None else defaults["window"],
            "seed": seed if seed is not None else defaults["seed"],
        }
        state = embedding.train(
            self.corpus.editions.values(), self.corpus.vocabulary, **params
        )
        self._save_snapshot(state)
        manifest = self.manifest
        manifest["defaults"]["embedding"] = params
        self._update_manifest(defaults=manifest["defaults"])
        return state

    # --- alignments ------------------------------------------------------

    def alignment_path(self, iteration: int) -> Path:
        return self.root / "alignments" / f"iter_{iteration}.jsonl"

    def alignment_iterations(self) -> list[int]:
        found = []
        adir = self.root / "alignments"
        if adir.exists():
            for name in os.listdir(adir):
                match = _ALIGNMENT_RE.fullmatch(name)
                if match:
                    found.append(int(match.group(1)))
        return sorted(found)

    def load_alignment(self, iteration: int) -> AlignmentSet:
        path = self.alignment_path(iteration)
        if not path.exists():
            raise NotFoundError(f"no alignment set for iteration {iteration}")
        return AlignmentSet.from_jsonl(path.read_text(encoding="utf-8"))

    def latest_alignment(self) -> AlignmentSet | None:
        iterations = self.alignment_iterations()
        return self.load_alignment(iterations[-1]) if iterations else None

    def align(
        self,
        edition_a: str,
        edition_b: str,
        config: AlignerConfig | None = None,
        prune: bool = True,
    ) -> tuple[AlignmentSet, AlignmentDiff]:
        """Align under the latest snapshot; diff against the last stored set."""
        state = self.latest_state()
        previous = self.latest_alignment()
        result = aligner_mod.align(
            state, self.edition(edition_a), self.edition(edition_b), config, prune
        )
        if previous is not None and (
            (previous.edition_a, previous.edition_b) != (edition_a, edition_b)
        ):
            previous = None  # different pair: nothing comparable to diff against
        empty = AlignmentSet(
            iteration=result.iteration,
            edition_a=result.edition_a,
            edition_b=result.edition_b,
            pairs=(),
            config_hash=result.config_hash,
            config=result.config,
        )
        change = aligner_mod.diff(previous if previous is not None else empty, result)
        _write_atomic(self.alignment_path(result.iteration), result.to_jsonl())
        return result, change

    # --- feedback --------------------------------------------------------

    @property
    def events_path(self) -> Path:
        return self.root / "events.jsonl"

    def read_events(self) -> list[FeedbackEvent]:
        if not self.events_path.exists():
            return []
        events = []
        for row in self.events_path.read_text(encoding="utf-8").splitlines():
            if row.strip():
                events.append(feedback.event_from_json(json.loads(row)))
        return events

    def event_count(self) -> int:
        return len(self.read_events())

    def plan_path(self, digest: str) -> Path:
        return self.root / "plans" / f"{digest}.json"

    def store_plan(self, plan: TransportPlan) -> str:
        digest = plan.digest()
        path = self.plan_path(digest)
        if not path.exists():
            _write_atomic(path, json.dumps(plan.to_json(), sort_keys=True) + "\n")
        return digest

    def load_plan(self, digest: str) -> TransportPlan:
        path = self.plan_path(digest)
        if not path.exists():
            raise NotFoundError(f"missing stored plan {digest}")
        return TransportPlan.from_json(json.loads(path.read_text(encoding="utf-8")))

    def _append_event(self, event: FeedbackEvent) -> None:
        line = json.dumps(event.to_json(), sort_keys=True) + "\n"
        with open(self.events_path, "ab") as fh:
            fh.write(line.encode("utf-8"))
            fh.flush()
            os.fsync(fh.fileno())

    def _check_writable(self) -> tuple[EmbeddingState, int]:
        state = self.latest_state()
        count = self.event_count()
        if count != state.iteration:
            raise ProjectError(
                f"{count} events but latest snapshot is iteration "
                f"{state.iteration}; run replay to recover"
            )
        return state, count

    def plan_for_pair(
        self, state: EmbeddingState, pair: aligner_mod.AlignmentPair
    ) -> TransportPlan:
        """The transport plan a rating of this pair updates, under `state`.

        Full pairs use the whole-line plan; half pairs use the plan against
        the stored sub-span, so ratings only touch the matched region.
        """
        line_a = self.line(pair.a)
        line_b = self.line(pair.b)
        if pair.bin is Bin.FULL:
            return transport.wmd(state, transport.nbow(line_a), transport.nbow(line_b))
        short, long = (line_a, line_b) if pair.bin is Bin.HALF_A else (line_b, line_a)
        start, stop = pair.span
        span_bag = transport.bag_from_token_ids(
            long.token_ids[start:stop], long.line_id
        )
        if pair.bin is Bin.HALF_A:
            return transport.wmd(state, transport.nbow(short), span_bag)
        return transport.wmd(state, span_bag, transport.nbow(short))

    def submit_rating(
        self,
        a: tuple[str, int],
        b: tuple[str, int],
        rating: int,
        crash_hook: Callable[[], None] | None = None,
    ) -> tuple[EmbeddingState, list[str]]:
        """Append a rating event for an aligned pair and apply it."""
        state, count = self._check_writable()
        current = self.latest_alignment()
        pair = current.pair(a, b) if current is not None else None
        if pair is None:
            raise NotFoundError(f"pair {a} / {b} is not in the current alignment set")
        plan = self.plan_for_pair(state, pair)
        digest = self.store_plan(plan)
        event = RatingEvent(
            event_id=count,
            a=a,
            b=b,
            rating=rating,
            plan_digest=digest,
            base_iteration=state.iteration,
            timestamp=_utcnow(),
        )
        self._append_event(event)
        if crash_hook is not None:
            crash_hook()
        new_state = feedback.apply_rating(state, event, plan, self.feedback_config)
        self._save_snapshot(new_state)
        return new_state, self._changed_tokens(state, new_state)

    def submit_drag(
        self,
        i: int,
        j: int,
        target: float,
        crash_hook: Callable[[], None] | None = None,
    ) -> tuple[EmbeddingState, list[str]]:
        """Append a drag event for a token pair and apply it."""
        state, count = self._check_writable()
        event = DragEvent(
            event_id=count,
            i=i,
            j=j,
            target_similarity=target,
            base_iteration=state.iteration,
            timestamp=_utcnow(),
        )
        state.check_id(i)
        state.check_id(j)
        self._append_event(event)
        if crash_hook is not None:
            crash_hook()
        new_state = feedback.apply_drag(state, event, self.feedback_config)
        self._save_snapshot(new_state)
        return new_state, self._changed_tokens(state, new_state)

    def _changed_tokens(
        self, old: EmbeddingState, new: EmbeddingState
    ) -> list[str]:
        changed = np.nonzero(np.any(old.vectors != new.vectors, axis=1))[0]
        return [self.corpus.vocabulary.token(int(t)) for t in changed]

    def ensure_consistent(self) -> bool:
        """Replay when the log is ahead of the snapshots; True if work was done."""
        if not self.snapshot_iterations():
            return False
        if self.event_count() != self.latest_iteration():
            self.replay_all()
            return True
        return False

    def replay_all(self) -> dict:
        """Rebuild every post-training snapshot from the event log."""
        state = self.load_snapshot(0)
        events = self.read_events()
        plans = {}
        for position, event in enumerate(events):
            if event.event_id != position:
                raise ProjectError(
                    f"gap or reorder in event log at position {position}"
                )
            if isinstance(event, RatingEvent):
                plans[event.plan_digest] = self.load_plan(event.plan_digest)
        written = [self.snapshot_path(0).name]
        for event in events:
            state = feedback.replay(state, [event], plans, self.feedback_config)
            self._save_snapshot(state)
            written.append(self.snapshot_path(state.iteration).name)
        # drop snapshots beyond what the log supports
        for iteration in self.snapshot_iterations():
            if iteration > len(events):
                self.snapshot_path(iteration).unlink()
        return {"events": len(events), "snapshots": written}

    # --- blind evaluation ------------------------------------------------

    def export_blind(self, before_iter: int, after_iter: int, seed: int) -> dict:
        bundle = analytics.make_blind_bundle(
            self.load_alignment(before_iter), self.load_alignment(after_iter), seed
        )
        path = analytics.write_bundle(
            bundle, self.root / "bundles", self.root / "bundles" / "keys"
        )
        return {"bundle_id": bundle.bundle_id, "payload": str(path)}

    def record_verdict(self, bundle_id: str, verdict: str) -> dict:
        try:
            return analytics.unseal(
                bundle_id,
                verdict,
                self.root / "bundles" / "keys",
                self.root / "evaluations.jsonl",
                _utcnow(),
            )
        except analytics.AnalyticsError as exc:
            if "unknown bundle" in str(exc):
                raise NotFoundError(str(exc)) from None
            raise
