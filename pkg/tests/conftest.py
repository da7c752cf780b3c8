from __future__ import annotations

import sys
from datetime import date
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from certlab.ingest import CertRecord, MaintenanceUpdate

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
    deadline=None,
)
settings.load_profile("ci")

DATA_DIR = Path(__file__).parent / "data"
CORPUS_DIR = DATA_DIR / "minicorpus"


def make_record(
    key: str = "k1",
    scheme: str = "DE",
    category: str = "Network Devices",
    title: str = "ACME Firewall 2.0",
    vendor: str = "ACME",
    cert_date: date = date(2015, 3, 1),
    expiry_date: date | None = date(2020, 3, 1),
    status: str = "active",
    declared_eal: str | None = "EAL4+",
    artifact_paths: dict | None = None,
    maintenance_updates: tuple = (),
) -> CertRecord:
    return CertRecord(
        record_key=key,
        scheme=scheme,
        category=category,
        title=title,
        vendor=vendor,
        cert_date=cert_date,
        expiry_date=expiry_date,
        status=status,
        declared_eal=declared_eal,
        artifact_paths=artifact_paths or {},
        maintenance_updates=tuple(
            MaintenanceUpdate(d, p) if not isinstance(d, MaintenanceUpdate) else d
            for d, p in maintenance_updates
        ),
    )


@pytest.fixture
def record_factory():
    return make_record


@pytest.fixture
def corpus_dir() -> Path:
    if not CORPUS_DIR.exists():
        pytest.skip("mini corpus not generated")
    return CORPUS_DIR


CREATED = "2024-06-01T00:00:00+00:00"
GOLDEN_ANALYZE_FLAGS = ["--min-support", "10", "--min-level-count", "3"]


@pytest.fixture(scope="session")
def pipeline(tmp_path_factory) -> dict:
    """Run the whole CLI pipeline over the mini corpus once per session."""
    import warnings

    from certlab import cli

    corpus = CORPUS_DIR
    out = tmp_path_factory.mktemp("pipeline")
    paths = {
        "corpus": corpus,
        "snapshot": out / "snapshot.json",
        "features": out / "features.json",
        "ids": out / "ids.json",
        "graph": out / "graph.json",
        "matches": out / "matches.json",
        "report": out / "report.json",
        "full": out / "full.json",
    }
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        steps = [
            ["ingest", "--csv", str(corpus / "snapshot.csv"), "--html", str(corpus / "snapshot_html.txt"),
             "--artifacts-dir", str(corpus / "artifacts"), "--out", str(paths["snapshot"]),
             "--created", CREATED],
            ["extract", "--snapshot", str(paths["snapshot"]), "--out", str(paths["features"])],
            ["assign-ids", "--snapshot", str(paths["snapshot"]), "--features", str(paths["features"]),
             "--out", str(paths["ids"])],
            ["build-graph", "--ids", str(paths["ids"]), "--snapshot", str(paths["snapshot"]),
             "--out", str(paths["graph"])],
            ["match-cpe", "--snapshot", str(paths["snapshot"]), "--nvd-dir", str(corpus / "nvd"),
             "--out", str(paths["matches"])],
            ["analyze", "--snapshot", str(paths["snapshot"]), "--matches", str(paths["matches"]),
             "--ids", str(paths["ids"]), "--graph", str(paths["graph"]),
             *GOLDEN_ANALYZE_FLAGS, "--out", str(paths["report"])],
            ["bundle", "--snapshot", str(paths["snapshot"]), "--ids", str(paths["ids"]),
             "--graph", str(paths["graph"]), "--matches", str(paths["matches"]),
             "--report", str(paths["report"]), "--out", str(paths["full"])],
        ]
        for argv in steps:
            assert cli.main(argv) == 0, f"pipeline step failed: {argv[0]}"
    return paths
