"""HTTP API through which the workbench drives the feedback loop.

All reads are pure functions of the project directory; feedback and realign
mutations are serialized behind one writer lock (409 when a writer cannot be
admitted in time). Validation failures map to 422, unknown ids to 404.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import analytics, embedding, transport
from .aligner import AlignerConfig, diff as alignment_diff
from .project import NotFoundError, Project

WRITER_TIMEOUT_S = 30.0


class RatingBody(BaseModel):
    a: tuple[str, int]
    b: tuple[str, int]
    rating: int


class DragBody(BaseModel):
    i: int
    j: int
    target: float


class RealignBody(BaseModel):
    a: str
    b: str
    config: dict | None = None
    prune: bool = True


class VerdictBody(BaseModel):
    bundle_id: str
    verdict: str


def parse_line_ref(ref: str) -> tuple[str, int]:
    edition_id, _, index = ref.rpartition(":")
    if not edition_id or not index.isdigit():
        raise ValueError(f"line reference must look like 'edition:index', got {ref!r}")
    return edition_id, int(index)


def create_app(project: Project) -> FastAPI:
    project.ensure_consistent()
    app = FastAPI(title="versealign", version="0.1.0")
    # the workbench is served from its own origin (desk tool, no auth)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    writer_lock = threading.Lock()

    @app.exception_handler(NotFoundError)
    async def _not_found(request: Request, exc: NotFoundError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _invalid(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    def _acquire_writer():
        if not writer_lock.acquire(timeout=WRITER_TIMEOUT_S):
            return None
        return writer_lock

    @app.get("/editions")
    def editions():
        return {
            "editions": [
                {
                    "edition_id": ed.edition_id,
                    "title": ed.title,
                    "lines": [
                        {"index": ln.index, "raw": ln.raw, "tokens": list(ln.tokens)}
                        for ln in ed.lines
                    ],
                }
                for ed in project.corpus.editions.values()
            ]
        }

    @app.get("/alignments/diff")
    def alignments_diff(
        from_iter: int = Query(alias="from"), to_iter: int = Query(alias="to")
    ):
        prev = project.load_alignment(from_iter)
        nxt = project.load_alignment(to_iter)
        return alignment_diff(prev, nxt).to_json()

    @app.get("/alignments/{iteration}")
    def alignments(iteration: int, a: str | None = None, b: str | None = None):
        aset = project.load_alignment(iteration)
        if a is not None and b is not None and (aset.edition_a, aset.edition_b) != (a, b):
            raise NotFoundError(
                f"alignment at iteration {iteration} covers "
                f"({aset.edition_a}, {aset.edition_b}), not ({a}, {b})"
            )
        return aset.to_json()

    @app.get("/heatmap")
    def heatmap(a: str, b: str):
        line_a = project.line(parse_line_ref(a))
        line_b = project.line(parse_line_ref(b))
        state = project.latest_state()
        return transport.pair_heatmap(state, line_a, line_b).to_json()

    @app.get("/wordchange")
    def wordchange(
        line: str,
        from_iter: int = Query(alias="from"),
        to_iter: int = Query(alias="to"),
        mode: str = "displacement",
        k: int = analytics.DEFAULT_NEIGHBORHOOD,
    ):
        target = project.line(parse_line_ref(line))
        snap_a = project.load_snapshot(from_iter)
        snap_b = project.load_snapshot(to_iter)
        intensity = analytics.line_heatmap(snap_a, snap_b, target, mode, k)
        return {
            "line": line,
            "tokens": list(target.tokens),
            "intensity": intensity,
            "mode": mode,
            "from": from_iter,
            "to": to_iter,
        }

    @app.get("/neighbors")
    def neighbors(token: str, k: int = analytics.DEFAULT_NEIGHBORHOOD):
        vocab = project.corpus.vocabulary
        if token in vocab.token_to_id:
            token_id = vocab.token_to_id[token]
        elif token.isdigit() and int(token) < len(vocab):
            token_id = int(token)
        else:
            raise NotFoundError(f"unknown token {token!r}")
        state = project.latest_state()
        near = embedding.nearest_neighbors(state, token_id, k)
        ids = [token_id] + [j for j, _ in near]
        pairwise = [
            [embedding.cosine(state, x, y) for y in ids] for x in ids
        ]
        return {
            "token": {"id": token_id, "token": vocab.token(token_id)},
            "iteration": state.iteration,
            "neighbors": [
                {"id": j, "token": vocab.token(j), "cosine": c} for j, c in near
            ],
            "pairwise": pairwise,
        }

    @app.post("/feedback/rating")
    def feedback_rating(body: RatingBody):
        lock = _acquire_writer()
        if lock is None:
            return JSONResponse(
                status_code=409, content={"detail": "another feedback is in flight"}
            )
        try:
            new_state, changed = project.submit_rating(
                tuple(body.a), tuple(body.b), body.rating
            )
        finally:
            lock.release()
        return {"iteration": new_state.iteration, "changed_tokens": changed}

    @app.post("/feedback/drag")
    def feedback_drag(body: DragBody):
        lock = _acquire_writer()
        if lock is None:
            return JSONResponse(
                status_code=409, content={"detail": "another feedback is in flight"}
            )
        try:
            new_state, changed = project.submit_drag(body.i, body.j, body.target)
        finally:
            lock.release()
        return {"iteration": new_state.iteration, "changed_tokens": changed}

    @app.post("/realign")
    def realign(body: RealignBody):
        lock = _acquire_writer()
        if lock is None:
            return JSONResponse(
                status_code=409, content={"detail": "another writer is in flight"}
            )
        try:
            config = AlignerConfig.from_json(body.config) if body.config else None
            aset, change = project.align(body.a, body.b, config, body.prune)
        finally:
            lock.release()
        return {"alignment": aset.to_json(), "diff": change.to_json()}

    @app.post("/verdict")
    def verdict(body: VerdictBody):
        return project.record_verdict(body.bundle_id, body.verdict)

    @app.get("/history")
    def history():
        return {
            "iterations": project.snapshot_iterations(),
            "alignments": project.alignment_iterations(),
            "events": [e.to_json() for e in project.read_events()],
        }

    return app
