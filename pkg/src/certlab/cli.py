"""Command-line pipeline: ingest -> extract -> assign-ids -> build-graph ->
match-cpe -> analyze -> bundle -> serve/diff.

Every stage reads and writes plain JSON files so any step can be rerun or
inspected in isolation; `bundle` assembles the stage outputs into one
self-contained snapshot for the query service.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from datetime import date

from . import analytics, certid, rules as rules_mod, vulnmap
from .certid import Source
from .ingest import DocKind, ingest_snapshot, register_artifacts
from .refgraph import ReferenceGraph, build_graph
from .snapshot import (
    diff,
    dump_json,
    load_artifact_texts,
    load_snapshot,
    make_snapshot,
    save_snapshot,
    snapshot_date,
)

FRONTPAGE_LINES = 40


def _write_json(path: str, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_json(data))


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_ingest(args) -> int:
    records = ingest_snapshot(args.csv, args.html)
    records = register_artifacts(records, args.artifacts_dir)
    save_snapshot(make_snapshot(records, created=args.created), args.out)
    print(f"ingested {len(records)} records -> {args.out}")
    return 0


def cmd_extract(args) -> int:
    ruleset = rules_mod.load_rules(args.rules) if args.rules else rules_mod.default_rules()
    snapshot = load_snapshot(args.snapshot)
    texts = load_artifact_texts(snapshot.records)
    features = {
        key: {
            kind.value: rules_mod.extract(text, ruleset)
            for kind, text in sorted(by_kind.items(), key=lambda kv: kv[0].value)
        }
        for key, by_kind in texts.items()
    }
    _write_json(args.out, features)
    print(f"extracted features for {len(features)} records -> {args.out}")
    return 0


def _id_sources(record, texts, features) -> tuple[list[certid.IdCandidate], list[str]]:
    report_path = record.artifact_paths.get(DocKind.CERTIFICATE_REPORT)
    report_text = texts.get(record.record_key, {}).get(DocKind.CERTIFICATE_REPORT, "")
    by_source = {
        Source.FILENAME: os.path.basename(report_path) if report_path else "",
        Source.FRONTPAGE: "\n".join(report_text.splitlines()[:FRONTPAGE_LINES]),
    }
    meta_path = f"{report_path}.meta" if report_path else ""
    if meta_path and os.path.isfile(meta_path):
        with open(meta_path, encoding="utf-8") as fh:
            by_source[Source.PDF_METADATA] = fh.read()

    candidates = certid.find_candidates(by_source, record.scheme)
    sources_used = [s.value for s, t in by_source.items() if t]

    feature_hits = None
    if features is not None:
        feature_hits = (
            features.get(record.record_key, {})
            .get(DocKind.CERTIFICATE_REPORT.value, {})
            .get("certificate_id")
        )
    if feature_hits:
        candidates += certid.candidates_from_counts(feature_hits, Source.CONTENTS, record.scheme)
        sources_used.append(f"{Source.CONTENTS.value} (from features)")
    elif report_text:
        candidates += certid.find_candidates({Source.CONTENTS: report_text}, record.scheme)
        sources_used.append(Source.CONTENTS.value)
    return candidates, sources_used


def cmd_assign_ids(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    texts = load_artifact_texts(snapshot.records)
    features = _read_json(args.features) if args.features else None

    assignments: dict[str, certid.CertId | None] = {}
    considered: dict[str, list[dict]] = {}
    for record in snapshot.records:
        candidates, _ = _id_sources(record, texts, features)
        assignments[record.record_key] = certid.assign_id(candidates)
        totals: dict[str, float] = {}
        for cand in candidates:
            weighted = float(cand.weight * certid.SOURCE_WEIGHTS[cand.source])
            totals[cand.canonical] = totals.get(cand.canonical, 0.0) + weighted
        considered[record.record_key] = [
            {"canonical": canonical, "total_weight": round(weight, 6)}
            for canonical, weight in sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
        ]

    collisions = certid.detect_collisions(assignments)
    for canonical, keys in sorted(collisions.items()):
        print(f"warning: records {keys} share canonical ID {canonical}", file=sys.stderr)

    payload = {
        "assignments": {
            key: (
                {
                    "canonical": cid.canonical,
                    "scheme": cid.scheme,
                    "components": cid.components,
                    "candidates_considered": considered[key],
                }
                if cid
                else None
            )
            for key, cid in sorted(assignments.items())
        },
        "collisions": collisions,
    }
    _write_json(args.out, payload)
    assigned = sum(1 for v in assignments.values() if v)
    print(f"assigned {assigned}/{len(assignments)} IDs -> {args.out}")
    return 0


def _load_ids(path: str) -> dict[str, certid.CertId | None]:
    data = _read_json(path)
    out: dict[str, certid.CertId | None] = {}
    for key, entry in data["assignments"].items():
        out[key] = (
            certid.CertId(scheme=entry["scheme"], canonical=entry["canonical"], components=entry["components"])
            if entry
            else None
        )
    return out


def _id_index(ids: dict[str, certid.CertId | None]) -> dict[str, list[str]]:
    index: dict[str, list[str]] = {}
    for key, cid in sorted(ids.items()):
        if cid is not None:
            index.setdefault(cid.canonical, []).append(key)
    return index


def cmd_build_graph(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    ids = _load_ids(args.ids)
    texts = load_artifact_texts(snapshot.records)
    graph = build_graph(_id_index(ids), texts)
    _write_json(args.out, graph.to_dict())
    print(f"graph: {len(graph.nodes)} nodes, {len(graph.edges)} edges -> {args.out}")
    return 0


def cmd_match_cpe(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    nvd = vulnmap.load_nvd(
        os.path.join(args.nvd_dir, "cpe_dict.txt"),
        os.path.join(args.nvd_dir, "cve_feed.txt"),
    )
    aliases = vulnmap.load_vendor_aliases(args.aliases)
    results = {}
    for record in snapshot.records:
        versions = vulnmap.extract_versions(record.title)
        candidates = vulnmap.candidate_cpes(
            record,
            versions,
            nvd,
            aliases=aliases,
            allow_wildcard_version=args.allow_wildcard_version,
        )
        match = vulnmap.match_certificate(record, candidates, nvd, threshold=args.threshold)
        if not match.matched_cpes:
            continue
        entry = match.to_dict()
        entry["cve_details"] = {
            cve_id: {
                "published": nvd.cve_by_id[cve_id].published.isoformat(),
                "base_score": nvd.cve_by_id[cve_id].base_score,
                "cwe_ids": sorted(nvd.cve_by_id[cve_id].cwe_ids),
            }
            for cve_id in sorted(match.cves)
        }
        results[record.record_key] = entry
    _write_json(args.out, {"threshold": args.threshold, "results": results})
    print(f"matched {len(results)} records -> {args.out}")
    return 0


def _dataset_from_files(snapshot, matches_data, exclude_categories):
    texts = load_artifact_texts(snapshot.records)
    ruleset = rules_mod.default_rules()
    profiles = {}
    for record in snapshot.records:
        by_kind = texts.get(record.record_key, {})
        st = rules_mod.extract(by_kind.get(DocKind.SECURITY_TARGET, ""), ruleset)
        cr = rules_mod.extract(by_kind.get(DocKind.CERTIFICATE_REPORT, ""), ruleset)
        profiles[record.record_key] = analytics.reconstruct_sars(record, st, cr)

    results = matches_data.get("results", {})
    matches = {key: entry.get("cves", []) for key, entry in results.items()}
    cves = {}
    for entry in results.values():
        for cve_id, detail in entry.get("cve_details", {}).items():
            if cve_id not in cves:
                cves[cve_id] = vulnmap.CveEntry(
                    id=cve_id,
                    published=date.fromisoformat(detail["published"]),
                    base_score=detail["base_score"],
                    cwe_ids=frozenset(detail["cwe_ids"]),
                    vulnerable_cpes=frozenset(),
                )
    return analytics.build_dataset(
        snapshot.records,
        matches,
        cves.values(),
        profiles,
        snapshot_date(snapshot),
        exclude_categories=exclude_categories,
    )


def cmd_analyze(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    matches_data = _read_json(args.matches)
    exclude = () if args.no_category_filter else tuple(args.exclude_category)
    dataset = _dataset_from_files(snapshot, matches_data, exclude)
    report = analytics.build_report(
        dataset,
        min_support=args.min_support,
        min_level_count=args.min_level_count,
    )
    _write_json(args.out, report)
    print(f"report with {len(report['correlations'])} correlations -> {args.out}")
    return 0


def cmd_bundle(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    ids = _load_ids(args.ids) if args.ids else {}
    graph = ReferenceGraph.from_dict(_read_json(args.graph)) if args.graph else None
    matches = _read_json(args.matches).get("results", {}) if args.matches else {}
    report = _read_json(args.report) if args.report else {}
    bundled = make_snapshot(
        snapshot.records,
        ids=ids,
        graph=graph,
        matches=matches,
        report=report,
        created=args.created or snapshot.created,
    )
    save_snapshot(bundled, args.out)
    print(f"bundled snapshot -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    snapshot = load_snapshot(args.snapshot)
    running = serve(snapshot, bind_address=(args.host, args.port), ui_dir=args.ui_dir)
    print(f"serving on http://{running.host}:{running.port} (Ctrl-C to stop)")
    try:
        while True:
            time.sleep(1)
    except KeyboardInterrupt:
        running.stop()
    return 0


def cmd_diff(args) -> int:
    old = load_snapshot(args.old)
    new = load_snapshot(args.new)
    events = diff(old, new)
    _write_json(args.out, {"events": [e.to_dict() for e in events], "count": len(events)})
    print(f"{len(events)} events -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="certlab")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="unify CSV + HTML snapshots into records")
    ingest.add_argument("--csv", required=True)
    ingest.add_argument("--html", required=True)
    ingest.add_argument("--artifacts-dir", required=True)
    ingest.add_argument("--out", required=True)
    ingest.add_argument("--created", help="snapshot timestamp override (ISO-8601)")
    ingest.set_defaults(func=cmd_ingest)

    extract = sub.add_parser("extract", help="run keyword rules over artifact texts")
    extract.add_argument("--rules", help="rules file (default: bundled set)")
    extract.add_argument("--snapshot", required=True)
    extract.add_argument("--out", required=True)
    extract.set_defaults(func=cmd_extract)

    assign = sub.add_parser("assign-ids", help="pick each certificate's canonical ID")
    assign.add_argument("--snapshot", required=True)
    assign.add_argument("--features", help="features.json; its certificate_id hits feed the contents source")
    assign.add_argument("--out", required=True)
    assign.set_defaults(func=cmd_assign_ids)

    graph = sub.add_parser("build-graph", help="build the inter-certificate reference graph")
    graph.add_argument("--ids", required=True)
    graph.add_argument("--snapshot", required=True)
    graph.add_argument("--out", required=True)
    graph.set_defaults(func=cmd_build_graph)

    match = sub.add_parser("match-cpe", help="map certificates to NVD CPEs/CVEs")
    match.add_argument("--snapshot", required=True)
    match.add_argument("--nvd-dir", required=True, help="directory with cpe_dict.txt and cve_feed.txt")
    match.add_argument("--threshold", type=float, default=vulnmap.DEFAULT_THRESHOLD)
    match.add_argument("--aliases", help="vendor alias file (default: bundled table)")
    match.add_argument("--allow-wildcard-version", action="store_true")
    match.add_argument("--out", required=True)
    match.set_defaults(func=cmd_match_cpe)

    analyze = sub.add_parser("analyze", help="compute the analytics report")
    analyze.add_argument("--snapshot", required=True)
    analyze.add_argument("--matches", required=True)
    analyze.add_argument("--ids", required=True)
    analyze.add_argument("--graph", required=True)
    analyze.add_argument("--out", required=True)
    analyze.add_argument("--min-support", type=int, default=analytics.DEFAULT_MIN_SUPPORT)
    analyze.add_argument("--min-level-count", type=int, default=analytics.DEFAULT_MIN_LEVEL_COUNT)
    analyze.add_argument(
        "--exclude-category",
        action="append",
        default=list(analytics.DEFAULT_EXCLUDED_CATEGORIES),
        help="category token to exclude (repeatable; default: smartcard)",
    )
    analyze.add_argument("--no-category-filter", action="store_true")
    analyze.set_defaults(func=cmd_analyze)

    bundle = sub.add_parser("bundle", help="assemble stage outputs into one snapshot")
    bundle.add_argument("--snapshot", required=True)
    bundle.add_argument("--ids")
    bundle.add_argument("--graph")
    bundle.add_argument("--matches")
    bundle.add_argument("--report")
    bundle.add_argument("--created")
    bundle.add_argument("--out", required=True)
    bundle.set_defaults(func=cmd_bundle)

    serve_cmd = sub.add_parser("serve", help="serve the query API over a snapshot")
    serve_cmd.add_argument("--snapshot", required=True)
    serve_cmd.add_argument("--host", default="127.0.0.1")
    serve_cmd.add_argument("--port", type=int, default=8730)
    serve_cmd.add_argument("--ui-dir", help="static UI assets to mount at /ui")
    serve_cmd.set_defaults(func=cmd_serve)

    diff_cmd = sub.add_parser("diff", help="diff two snapshot files")
    diff_cmd.add_argument("old")
    diff_cmd.add_argument("new")
    diff_cmd.add_argument("--out", required=True)
    diff_cmd.set_defaults(func=cmd_diff)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
