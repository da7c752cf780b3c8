#!/usr/bin/env python3
"""Capture API responses from the query service over the mini corpus and
freeze them as frontend test fixtures (frontend/tests/fixtures/*.json).

The frontend's headless tests replay these captured payloads, so the UI is
tested against exactly what the service returns.
"""

from __future__ import annotations

import json
import sys
import tempfile
import warnings
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from fastapi.testclient import TestClient  # noqa: E402

from certlab import cli  # noqa: E402
from certlab.service import build_app  # noqa: E402
from certlab.snapshot import load_snapshot  # noqa: E402

CORPUS = ROOT / "tests" / "data" / "minicorpus"
OUT = ROOT / "frontend" / "tests" / "fixtures"


def run_pipeline(out: Path) -> Path:
    steps = [
        ["ingest", "--csv", str(CORPUS / "snapshot.csv"), "--html", str(CORPUS / "snapshot_html.txt"),
         "--artifacts-dir", str(CORPUS / "artifacts"), "--out", str(out / "snapshot.json"),
         "--created", "2024-06-01T00:00:00+00:00"],
        ["assign-ids", "--snapshot", str(out / "snapshot.json"), "--out", str(out / "ids.json")],
        ["build-graph", "--ids", str(out / "ids.json"), "--snapshot", str(out / "snapshot.json"),
         "--out", str(out / "graph.json")],
        ["match-cpe", "--snapshot", str(out / "snapshot.json"), "--nvd-dir", str(CORPUS / "nvd"),
         "--out", str(out / "matches.json")],
        ["analyze", "--snapshot", str(out / "snapshot.json"), "--matches", str(out / "matches.json"),
         "--ids", str(out / "ids.json"), "--graph", str(out / "graph.json"),
         "--min-support", "10", "--min-level-count", "3", "--out", str(out / "report.json")],
        ["bundle", "--snapshot", str(out / "snapshot.json"), "--ids", str(out / "ids.json"),
         "--graph", str(out / "graph.json"), "--matches", str(out / "matches.json"),
         "--report", str(out / "report.json"), "--out", str(out / "full.json")],
    ]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for argv in steps:
            assert cli.main(argv) == 0
    return out / "full.json"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    labels = json.loads((CORPUS / "id_labels.json").read_text(encoding="utf-8"))
    by_slug = {entry["slug"]: key for key, entry in labels.items()}

    with tempfile.TemporaryDirectory() as tmp:
        full = run_pipeline(Path(tmp))
        app, _ = build_app(load_snapshot(str(full)))
        client = TestClient(app)

        captures = {
            "search_fulltext_firmware.json": client.get(
                "/search/fulltext", params={"q": "00.03.11.0*"}
            ),
            "certs_query_firewall.json": client.get("/certs", params={"q": "firewall"}),
            "cert_detail_vulnerable.json": client.get(f"/certs/{by_slug['v1']}"),
            "cert_detail_no_cves.json": client.get(f"/certs/{by_slug['sg1']}"),
            "references_star_in.json": client.get(
                f"/certs/{by_slug['chip0']}/references", params={"direction": "in", "depth": 1}
            ),
            "references_star_in_depth2.json": client.get(
                f"/certs/{by_slug['chip0']}/references", params={"direction": "in", "depth": 2}
            ),
            "references_isolated.json": client.get(
                f"/certs/{by_slug['sg1']}/references", params={"direction": "both", "depth": 1}
            ),
        }
        for name, response in captures.items():
            assert response.status_code == 200, (name, response.status_code)
            payload = response.json()
            (OUT / name).write_text(
                json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
            print(f"wrote {name}")


if __name__ == "__main__":
    main()
