"""Dataset snapshot persistence, diffing, and full-text search.

A snapshot is one self-contained JSON document carrying the unified records
and every derived layer (IDs, reference graph, CVE matches, report). The
schema_version field gates readers. Diffing two snapshots yields a
deterministic, order-stable event list used for change notifications;
reference removals and record removals are not evented (the event-kind set
is closed), so replaying a diff reconstructs additive deltas exactly.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from datetime import date, datetime, timezone
from typing import Iterable, Mapping

from .certid import CertId
from .errors import SchemaError, SchemaMismatch
from .ingest import CertRecord, DocKind, MaintenanceUpdate
from .refgraph import ReferenceGraph

SCHEMA_VERSION = 1


def _record_to_dict(record: CertRecord) -> dict:
    return {
        "record_key": record.record_key,
        "scheme": record.scheme,
        "category": record.category,
        "title": record.title,
        "vendor": record.vendor,
        "cert_date": record.cert_date.isoformat(),
        "expiry_date": record.expiry_date.isoformat() if record.expiry_date else None,
        "status": record.status,
        "declared_eal": record.declared_eal,
        "artifact_paths": {kind.value: path for kind, path in sorted(record.artifact_paths.items())},
        "maintenance_updates": [
            [upd.update_date.isoformat(), upd.path] for upd in record.maintenance_updates
        ],
    }


def _record_from_dict(data: dict) -> CertRecord:
    return CertRecord(
        record_key=data["record_key"],
        scheme=data["scheme"],
        category=data["category"],
        title=data["title"],
        vendor=data["vendor"],
        cert_date=date.fromisoformat(data["cert_date"]),
        expiry_date=date.fromisoformat(data["expiry_date"]) if data.get("expiry_date") else None,
        status=data["status"],
        declared_eal=data.get("declared_eal"),
        artifact_paths={DocKind(k): v for k, v in data.get("artifact_paths", {}).items()},
        maintenance_updates=tuple(
            MaintenanceUpdate(date.fromisoformat(d), p)
            for d, p in data.get("maintenance_updates", [])
        ),
    )


@dataclass(frozen=True)
class Snapshot:
    schema_version: int
    created: str
    records: tuple[CertRecord, ...]
    ids: dict[str, CertId | None]
    graph: ReferenceGraph
    matches: dict[str, dict]
    report: dict

    def __post_init__(self):
        keys = {r.record_key for r in self.records}
        for mapping_name in ("ids", "matches"):
            unknown = set(getattr(self, mapping_name)) - keys
            if unknown:
                raise SchemaError(f"{mapping_name} references unknown records {sorted(unknown)}")

    def record(self, record_key: str) -> CertRecord | None:
        for r in self.records:
            if r.record_key == record_key:
                return r
        return None

    def cve_sets(self) -> dict[str, frozenset[str]]:
        """Per-record CVE sets; records without CVEs are absent."""
        out = {key: frozenset(entry.get("cves", [])) for key, entry in self.matches.items()}
        return {key: cves for key, cves in out.items() if cves}

    def reference_sets(self) -> dict[str, frozenset[str]]:
        """Outgoing reference targets per record key (via its canonical ID);
        records without outgoing references are absent."""
        out: dict[str, frozenset[str]] = {}
        for record in self.records:
            cert_id = self.ids.get(record.record_key)
            if cert_id is None:
                continue
            targets = frozenset(self.graph.successors(cert_id.canonical))
            if targets:
                out[record.record_key] = targets
        return out

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "created": self.created,
            "records": [_record_to_dict(r) for r in self.records],
            "ids": {
                key: (
                    {"canonical": cid.canonical, "scheme": cid.scheme, "components": cid.components}
                    if cid is not None
                    else None
                )
                for key, cid in sorted(self.ids.items())
            },
            "graph": self.graph.to_dict(),
            "matches": {k: self.matches[k] for k in sorted(self.matches)},
            "report": self.report,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Snapshot":
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaMismatch(f"unsupported snapshot schema_version {version!r}")
        ids: dict[str, CertId | None] = {}
        for key, entry in data.get("ids", {}).items():
            ids[key] = (
                CertId(scheme=entry["scheme"], canonical=entry["canonical"], components=entry["components"])
                if entry
                else None
            )
        return cls(
            schema_version=version,
            created=data["created"],
            records=tuple(_record_from_dict(r) for r in data.get("records", [])),
            ids=ids,
            graph=ReferenceGraph.from_dict(data.get("graph", {"nodes": [], "edges": []})),
            matches=data.get("matches", {}),
            report=data.get("report", {}),
        )


def empty_snapshot(created: str | None = None) -> Snapshot:
    return make_snapshot((), created=created)


def make_snapshot(
    records: Iterable[CertRecord],
    ids: Mapping[str, CertId | None] | None = None,
    graph: ReferenceGraph | None = None,
    matches: Mapping[str, dict] | None = None,
    report: dict | None = None,
    created: str | None = None,
) -> Snapshot:
    if created is None:
        created = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return Snapshot(
        schema_version=SCHEMA_VERSION,
        created=created,
        records=tuple(records),
        ids=dict(ids or {}),
        graph=graph or ReferenceGraph(nodes=frozenset(), edges={}),
        matches=dict(matches or {}),
        report=dict(report or {}),
    )


def dump_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save_snapshot(snapshot: Snapshot, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_json(snapshot.to_dict()))


def load_snapshot(path: str) -> Snapshot:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    return Snapshot.from_dict(data)


def snapshot_date(snapshot: Snapshot) -> date:
    return datetime.fromisoformat(snapshot.created).date()


def load_artifact_texts(records: Iterable[CertRecord]) -> dict[str, dict[DocKind, str]]:
    """Read every registered artifact text. Maintenance updates concatenate
    under their shared document kind."""
    texts: dict[str, dict[DocKind, str]] = {}
    for record in records:
        by_kind: dict[DocKind, str] = {}
        for kind, path in record.artifact_paths.items():
            try:
                with open(path, encoding="utf-8", errors="replace") as fh:
                    by_kind[kind] = fh.read()
            except OSError:
                continue
        chunks = []
        for upd in record.maintenance_updates:
            try:
                with open(upd.path, encoding="utf-8", errors="replace") as fh:
                    chunks.append(fh.read())
            except OSError:
                continue
        if chunks:
            by_kind[DocKind.MAINTENANCE_UPDATE] = "\n".join(chunks)
        texts[record.record_key] = by_kind
    return texts


# --- diffing ----------------------------------------------------------------


class DiffKind(str, enum.Enum):
    NEW_CERT = "new_cert"
    NEW_CVE = "new_cve"
    REMOVED_CVE = "removed_cve"
    ID_CHANGED = "id_changed"
    REFERENCE_ADDED = "reference_added"
    STATUS_CHANGED = "status_changed"


@dataclass(frozen=True, order=True)
class DiffEvent:
    record_key: str
    kind: DiffKind
    detail: str

    def to_dict(self) -> dict:
        return {"record_key": self.record_key, "kind": self.kind.value, "detail": self.detail}

    @classmethod
    def from_dict(cls, data: dict) -> "DiffEvent":
        return cls(record_key=data["record_key"], kind=DiffKind(data["kind"]), detail=data["detail"])


def diff(old: Snapshot, new: Snapshot) -> list[DiffEvent]:
    """Deterministic event list describing what changed between snapshots."""
    if old.schema_version != new.schema_version:
        raise SchemaMismatch(
            f"cannot diff schema versions {old.schema_version} and {new.schema_version}"
        )
    events: list[DiffEvent] = []
    old_records = {r.record_key: r for r in old.records}
    new_records = {r.record_key: r for r in new.records}

    for key, record in new_records.items():
        old_record = old_records.get(key)
        if old_record is None:
            events.append(DiffEvent(key, DiffKind.NEW_CERT, record.title))
        elif old_record.status != record.status:
            events.append(DiffEvent(key, DiffKind.STATUS_CHANGED, f"{old_record.status} -> {record.status}"))

    old_cves = old.cve_sets()
    new_cves = new.cve_sets()
    for key in set(old_cves) | set(new_cves):
        if key not in new_records:
            continue
        before = old_cves.get(key, frozenset())
        after = new_cves.get(key, frozenset())
        for cve in sorted(after - before):
            events.append(DiffEvent(key, DiffKind.NEW_CVE, cve))
        for cve in sorted(before - after):
            events.append(DiffEvent(key, DiffKind.REMOVED_CVE, cve))

    for key, record in new_records.items():
        if key not in old_records:
            continue
        old_id = old.ids.get(key)
        new_id = new.ids.get(key)
        old_canonical = old_id.canonical if old_id else None
        new_canonical = new_id.canonical if new_id else None
        if old_canonical != new_canonical:
            events.append(DiffEvent(key, DiffKind.ID_CHANGED, f"{old_canonical} -> {new_canonical}"))

    old_refs = old.reference_sets()
    new_refs = new.reference_sets()
    for key, targets in new_refs.items():
        if key not in new_records:
            continue
        added = targets - old_refs.get(key, frozenset())
        for target in sorted(added):
            events.append(DiffEvent(key, DiffKind.REFERENCE_ADDED, target))

    return sorted(events, key=lambda e: (e.record_key, e.kind.value, e.detail))


def replay_cve_sets(
    old_sets: Mapping[str, frozenset[str]], events: Iterable[DiffEvent]
) -> dict[str, frozenset[str]]:
    """Apply new_cve/removed_cve events to the old per-record CVE sets."""
    out = {k: set(v) for k, v in old_sets.items()}
    for event in events:
        if event.kind is DiffKind.NEW_CVE:
            out.setdefault(event.record_key, set()).add(event.detail)
        elif event.kind is DiffKind.REMOVED_CVE:
            out.get(event.record_key, set()).discard(event.detail)
    return {k: frozenset(v) for k, v in out.items() if v}


def replay_reference_sets(
    old_sets: Mapping[str, frozenset[str]], events: Iterable[DiffEvent]
) -> dict[str, frozenset[str]]:
    """Apply reference_added events to the old per-record reference sets."""
    out = {k: set(v) for k, v in old_sets.items()}
    for event in events:
        if event.kind is DiffKind.REFERENCE_ADDED:
            out.setdefault(event.record_key, set()).add(event.detail)
    return {k: frozenset(v) for k, v in out.items() if v}


# --- wildcard full-text search -----------------------------------------------


def wildcard_to_regex(query: str) -> re.Pattern:
    """Compile a wildcard query ("*" = any character run, "?" = one
    character) to a regex; matching is case-insensitive and a document
    matches when any substring does."""
    parts = []
    for ch in query:
        if ch == "*":
            parts.append(".*")
        elif ch == "?":
            parts.append(".")
        else:
            parts.append(re.escape(ch))
    return re.compile("".join(parts), re.IGNORECASE | re.DOTALL)


def _literal_segments(query: str) -> list[str]:
    return [seg for seg in re.split(r"[*?]+", query) if seg]


class FulltextIndex:
    """Searchable view over artifact texts: a linear regex scan, optionally
    prefiltered by a prebuilt trigram index (behavior identical, scan fewer
    documents)."""

    def __init__(self, texts: Mapping[str, Mapping[DocKind, str]], use_trigrams: bool = False):
        self._texts = {
            key: "\n".join(by_kind[k] for k in sorted(by_kind, key=lambda d: d.value))
            for key, by_kind in texts.items()
        }
        self._trigrams: dict[str, set[str]] | None = None
        if use_trigrams:
            self._trigrams = {}
            for key, text in self._texts.items():
                lowered = text.lower()
                for i in range(len(lowered) - 2):
                    self._trigrams.setdefault(lowered[i : i + 3], set()).add(key)

    def _candidates(self, query: str) -> Iterable[str]:
        if self._trigrams is None:
            return self._texts
        segments = [s.lower() for s in _literal_segments(query) if len(s) >= 3]
        if not segments:
            return self._texts
        candidates: set[str] | None = None
        for segment in segments:
            keys: set[str] = set()
            grams = [segment[i : i + 3] for i in range(len(segment) - 2)]
            keys = set.intersection(*(self._trigrams.get(g, set()) for g in grams)) if grams else set()
            candidates = keys if candidates is None else candidates & keys
        return candidates or set()

    def search(self, query: str) -> list[str]:
        pattern = wildcard_to_regex(query)
        return sorted(
            key for key in self._candidates(query) if pattern.search(self._texts[key])
        )


def search_fulltext(
    texts: Mapping[str, Mapping[DocKind, str]], query: str
) -> list[str]:
    """Record keys whose artifact texts contain a wildcard-query match."""
    return FulltextIndex(texts).search(query)
