#!/usr/bin/env python3
"""Regenerate the golden API fixtures under test/fixtures/.

Three scenarios, all captured through the engine's real HTTP layer:
identity (two identical editions), empty (nothing clears the thresholds),
and halfline (edition B splits every line of edition A in two).
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from versealign.aligner import AlignerConfig
from versealign.api import create_app
from versealign.project import Project

FIXTURES = Path(__file__).resolve().parent.parent / "test" / "fixtures"

IDENTITY_TEXT = """carles li reis est halt
nostre emperere magnes vint
set anz tuz pleins ad estet
li quens rollant fiert grant colp
paien chevalchent par le munt"""

DISJOINT_A = """aa bb cc dd
ee ff gg hh
ii jj kk ll"""

DISJOINT_B = """mm nn oo pp
qq rr ss tt
uu vv ww xx"""


def dump(relative: str, doc) -> None:
    path = FIXTURES / relative
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path.relative_to(FIXTURES.parent.parent)}")


def identity_scenario(tmp: Path) -> None:
    project = Project.init(tmp / "identity")
    project.ingest(IDENTITY_TEXT, "A", "Edition A")
    project.ingest(IDENTITY_TEXT, "B", "Edition B")
    project.train(dim=8, window=4, seed=0)
    project.align("A", "B", AlignerConfig(theta_full=0.9, mutual_best=True))
    client = TestClient(create_app(project))
    alignment = client.get("/alignments/0").json()
    assert len(alignment["pairs"]) == 5, "identity fixture must align every line"
    dump("identity/editions.json", client.get("/editions").json())
    dump("identity/alignment.json", alignment)
    dump(
        "identity/diff_self.json",
        client.get("/alignments/diff", params={"from": 0, "to": 0}).json(),
    )
    dump(
        "identity/heatmap.json",
        client.get("/heatmap", params={"a": "A:0", "b": "B:0"}).json(),
    )


def empty_scenario(tmp: Path) -> None:
    project = Project.init(tmp / "empty")
    project.ingest(DISJOINT_A, "A", "Edition A")
    project.ingest(DISJOINT_B, "B", "Edition B")
    project.train(dim=12, window=4, seed=1)
    project.align(
        "A", "B", AlignerConfig(theta_full=0.95, theta_half=0.95, band_width=1.0)
    )
    client = TestClient(create_app(project))
    alignment = client.get("/alignments/0").json()
    assert alignment["pairs"] == [], "empty fixture must stay empty"
    dump("empty/editions.json", client.get("/editions").json())
    dump("empty/alignment.json", alignment)


def halfline_scenario(tmp: Path) -> None:
    lines_a = []
    lines_b = []
    for i in range(6):
        left = [f"l{i}w{k}" for k in range(4)]
        right = [f"r{i}w{k}" for k in range(4)]
        lines_a.append(" ".join(left + right))
        lines_b.append(" ".join(left))
        lines_b.append(" ".join(right))
    project = Project.init(tmp / "halfline")
    project.ingest("\n".join(lines_a), "A", "Long meter")
    project.ingest("\n".join(lines_b), "B", "Short meter")
    project.train(dim=16, window=4, seed=2)
    project.align("A", "B")
    client = TestClient(create_app(project))
    alignment = client.get("/alignments/0").json()
    halves = [p for p in alignment["pairs"] if p["bin"] != "full"]
    assert halves, "halfline fixture must contain half-line pairs"
    dump("halfline/editions.json", client.get("/editions").json())
    dump("halfline/alignment.json", alignment)
    dump(
        "halfline/heatmap.json",
        client.get("/heatmap", params={"a": "A:0", "b": "B:0"}).json(),
    )
    # one drag, then the change lens between the two iterations
    drag = client.post("/feedback/drag", json={"i": 0, "j": 1, "target": 0.9})
    assert drag.status_code == 200, drag.text
    dump("halfline/drag_result.json", drag.json())
    dump(
        "halfline/wordchange.json",
        client.get(
            "/wordchange",
            params={"from": 0, "to": 1, "line": "A:0", "mode": "displacement"},
        ).json(),
    )
    dump(
        "halfline/neighbors.json",
        client.get("/neighbors", params={"token": "l0w0", "k": 5}).json(),
    )


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        identity_scenario(Path(tmp))
        empty_scenario(Path(tmp))
        halfline_scenario(Path(tmp))


if __name__ == "__main__":
    main()
