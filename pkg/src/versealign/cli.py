"""Batch CLI over a project directory.

Commands map 1:1 onto core operations; results go to stdout as JSON,
diagnostics to stderr. Exit codes: 0 success, 2 validation error, 1 internal.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from .aligner import AlignerConfig
from .project import Project


def _cmd_init(args) -> str:
    project = Project.init(args.dir, args.id)
    return json.dumps(
        {"project_id": project.manifest["project_id"], "root": str(project.root)}
    )


def _cmd_ingest(args) -> str:
    project = Project.load(args.dir)
    source = Path(args.source).read_text(encoding="utf-8")
    edition_id = args.id or Path(args.source).stem
    edition = project.ingest(source, edition_id, args.title or edition_id)
    return json.dumps(
        {
            "edition_id": edition.edition_id,
            "lines": len(edition.lines),
            "vocabulary": len(project.corpus.vocabulary),
        }
    )


def _cmd_train(args) -> str:
    project = Project.load(args.dir)
    state = project.train(dim=args.dim, window=args.window, seed=args.seed)
    path = project.snapshot_path(0)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return json.dumps(
        {
            "iteration": state.iteration,
            "vocabulary": state.size,
            "dim": state.dim,
            "snapshot": str(path),
            "digest": digest,
        }
    )


def _cmd_align(args) -> str:
    project = Project.load(args.dir)
    defaults = AlignerConfig.from_json(project.manifest["defaults"]["aligner"])
    config = AlignerConfig(
        band_width=args.band if args.band is not None else defaults.band_width,
        theta_full=args.theta_full if args.theta_full is not None else defaults.theta_full,
        theta_half=args.theta_half if args.theta_half is not None else defaults.theta_half,
        half_ratio=args.half_ratio if args.half_ratio is not None else defaults.half_ratio,
        mutual_best=args.mutual_best,
    )
    result, change = project.align(args.a, args.b, config, prune=not args.no_prune)
    # JSON-lines: header record, one record per accepted pair, then the diff
    return result.to_jsonl() + json.dumps({"diff": change.to_json()}, sort_keys=True)


def _cmd_replay(args) -> str:
    project = Project.load(args.dir)
    return json.dumps(project.replay_all())


def _cmd_export_blind(args) -> str:
    project = Project.load(args.dir)
    return json.dumps(project.export_blind(args.before, args.after, args.seed))


def _cmd_serve(args) -> str | None:
    import uvicorn

    from .api import create_app

    app = create_app(Project.load(args.dir))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="versealign",
        description="align variant text editions and refine the alignment with expert feedback",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create an empty project directory")
    p.add_argument("dir")
    p.add_argument("--id", default=None, help="project id (default: directory name)")
    p.set_defaults(func=_cmd_init)

    p = sub.add_parser("ingest", help="add one edition from a UTF-8 text file")
    p.add_argument("dir")
    p.add_argument("source", help="path to <edition>.txt, one verse per line")
    p.add_argument("--id", default=None, help="edition id (default: file stem)")
    p.add_argument("--title", default=None)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("train", help="train the iteration-0 embedding")
    p.add_argument("dir")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("align", help="align two editions under the latest snapshot")
    p.add_argument("dir")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--band", type=float, default=None)
    p.add_argument("--theta-full", type=float, default=None)
    p.add_argument("--theta-half", type=float, default=None)
    p.add_argument("--half-ratio", type=float, default=None)
    p.add_argument("--mutual-best", action="store_true")
    p.add_argument("--no-prune", action="store_true", help="skip lower-bound pruning")
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("replay", help="rebuild all snapshots from the event log")
    p.add_argument("dir")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("export-blind", help="export a blinded A/B evaluation bundle")
    p.add_argument("dir")
    p.add_argument("--before", type=int, required=True)
    p.add_argument("--after", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_export_blind)

    p = sub.add_parser("serve", help="serve the workbench HTTP API")
    p.add_argument("dir")
    p.add_argument("--port", type=int, default=8040)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if result is not None:
        print(result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
