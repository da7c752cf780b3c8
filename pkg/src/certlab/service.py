"""Read-only HTTP query API over an immutable snapshot.

Handlers capture the serving state exactly once per request, and snapshot
replacement swaps a single reference, so concurrent readers always see one
coherent snapshot (old or new, never a mix). Swapping also diffs the
snapshots and feeds matching events to registered subscriptions, whose
delivery sink is pluggable (in-memory log, append-to-file, or webhook).

Feature hits served on the certificate detail endpoint are extracted from
the registered artifact texts with the bundled default rules when the
snapshot is loaded.
"""

from __future__ import annotations

import itertools
import json
import socket
import threading
import time
import urllib.request
from dataclasses import dataclass, field
from datetime import date

from fastapi import FastAPI, HTTPException, Request

from . import rules as rules_mod
from .errors import BadSelector, BindError, UnknownSeed
from .ingest import CertRecord
from .refgraph import neighborhood
from .snapshot import (
    DiffEvent,
    DiffKind,
    FulltextIndex,
    Snapshot,
    diff,
    load_artifact_texts,
    snapshot_date,
    wildcard_to_regex,
)

DEFAULT_PORT = 8730


def _summary(record: CertRecord, state: "ServingState") -> dict:
    cert_id = state.snapshot.ids.get(record.record_key)
    cves = state.snapshot.matches.get(record.record_key, {}).get("cves", [])
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
        "canonical_id": cert_id.canonical if cert_id else None,
        "cve_count": len(cves),
    }


class ServingState:
    """Everything derived from one snapshot, built once and never mutated."""

    def __init__(self, snapshot: Snapshot):
        self.snapshot = snapshot
        self.by_key = {r.record_key: r for r in snapshot.records}
        self.texts = load_artifact_texts(snapshot.records)
        self.fulltext = FulltextIndex(self.texts)
        ruleset = rules_mod.default_rules()
        self.features = {
            key: {
                kind.value: rules_mod.extract(text, ruleset)
                for kind, text in by_kind.items()
            }
            for key, by_kind in self.texts.items()
        }
        self.cve_to_keys: dict[str, list[str]] = {}
        for key, entry in snapshot.matches.items():
            for cve in entry.get("cves", []):
                self.cve_to_keys.setdefault(cve, []).append(key)
        self.keys_by_canonical: dict[str, list[str]] = {}
        for key, cert_id in snapshot.ids.items():
            if cert_id is not None:
                self.keys_by_canonical.setdefault(cert_id.canonical, []).append(key)

    def timeline_marker(self, record: CertRecord, published: date) -> str:
        if published < record.cert_date:
            return "before_cert"
        end = record.expiry_date or snapshot_date(self.snapshot)
        return "during_validity" if published < end else "after_expiry"


@dataclass
class Subscription:
    sub_id: int
    selector: str
    terms: list[tuple[str, str]]
    sink: str
    deliveries: list[dict] = field(default_factory=list)

    def matches(self, event: DiffEvent) -> bool:
        for fld, value in self.terms:
            if fld == "record_key" and event.record_key != value:
                return False
            if fld == "kind" and event.kind.value != value:
                return False
        return True


def parse_selector(selector: str) -> list[tuple[str, str]]:
    """Selector syntax: space-separated "field:value" terms, all of which
    must match; an empty selector matches every event. Fields: record_key,
    kind."""
    terms: list[tuple[str, str]] = []
    for token in selector.split():
        fld, sep, value = token.partition(":")
        if not sep or not value:
            raise BadSelector(f"term {token!r} is not field:value")
        if fld not in ("record_key", "kind"):
            raise BadSelector(f"unknown selector field {fld!r}")
        if fld == "kind":
            try:
                DiffKind(value)
            except ValueError:
                raise BadSelector(f"unknown event kind {value!r}") from None
        terms.append((fld, value))
    return terms


class SnapshotService:
    """Holds the current serving state, the snapshot history for diffing,
    and the subscription registry."""

    def __init__(self, snapshot: Snapshot, http_post=None):
        self._state = ServingState(snapshot)
        self._history: list[Snapshot] = [snapshot]
        self._subs: dict[int, Subscription] = {}
        self._sub_ids = itertools.count(1)
        self._lock = threading.Lock()
        self._http_post = http_post or _post_json

    @property
    def state(self) -> ServingState:
        return self._state

    def swap(self, new_snapshot: Snapshot) -> list[DiffEvent]:
        """Atomically replace the served snapshot; diff events from the
        previous snapshot are delivered to matching subscriptions."""
        new_state = ServingState(new_snapshot)
        old_snapshot = self._state.snapshot
        events = diff(old_snapshot, new_snapshot)
        self._state = new_state
        self._history.append(new_snapshot)
        self.notify(events)
        return events

    def find_snapshot(self, ref: str) -> Snapshot | None:
        if ref == "current":
            return self._history[-1]
        if ref == "previous":
            return self._history[-2] if len(self._history) > 1 else None
        for snap in reversed(self._history):
            if snap.created == ref:
                return snap
        return None

    def subscribe(self, selector: str, sink: str = "log") -> int:
        terms = parse_selector(selector)
        if not (sink == "log" or sink.startswith("file:") or sink.startswith("webhook:")):
            raise BadSelector(f"unknown sink {sink!r}")
        with self._lock:
            sub_id = next(self._sub_ids)
            self._subs[sub_id] = Subscription(sub_id, selector, terms, sink)
            return sub_id

    def subscription(self, sub_id: int) -> Subscription | None:
        with self._lock:
            return self._subs.get(sub_id)

    def notify(self, events: list[DiffEvent]) -> int:
        """Deliver matching events to every subscription; returns the number
        of deliveries made."""
        delivered = 0
        with self._lock:
            subs = list(self._subs.values())
        for sub in subs:
            matching = [e.to_dict() for e in events if sub.matches(e)]
            if not matching:
                continue
            with self._lock:
                sub.deliveries.extend(matching)
            delivered += len(matching)
            if sub.sink.startswith("file:"):
                with open(sub.sink[len("file:"):], "a", encoding="utf-8") as fh:
                    for entry in matching:
                        fh.write(json.dumps(entry, sort_keys=True) + "\n")
            elif sub.sink.startswith("webhook:"):
                self._http_post(sub.sink[len("webhook:"):], matching)
        return delivered


def _post_json(url: str, payload) -> None:
    request = urllib.request.Request(
        url,
        data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    with urllib.request.urlopen(request, timeout=10):
        pass


def _matches_query(title: str, query: str) -> bool:
    if "*" in query or "?" in query:
        return bool(wildcard_to_regex(query).search(title))
    return query.lower() in title.lower()


def create_app(service: SnapshotService, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="certlab", docs_url=None, redoc_url=None)
    app.state.service = service

    @app.get("/certs")
    def list_certs(q: str = "", scheme: str = "", category: str = "", status: str = ""):
        state = service.state
        out = []
        for record in state.snapshot.records:
            if q and not _matches_query(record.title, q):
                continue
            if scheme and record.scheme.lower() != scheme.lower():
                continue
            if category and category.lower() not in record.category.lower():
                continue
            if status and record.status != status.lower():
                continue
            out.append(_summary(record, state))
        return {"results": out, "count": len(out)}

    @app.get("/certs/{record_key}")
    def cert_detail(record_key: str):
        state = service.state
        record = state.by_key.get(record_key)
        if record is None:
            raise HTTPException(status_code=404, detail=f"no record {record_key}")
        entry = state.snapshot.matches.get(record_key, {})
        cve_details = entry.get("cve_details", {})
        cves = []
        for cve_id in sorted(entry.get("cves", [])):
            detail = dict(cve_details.get(cve_id, {}))
            detail["id"] = cve_id
            if "published" in detail:
                detail["timeline"] = state.timeline_marker(record, date.fromisoformat(detail["published"]))
            cves.append(detail)
        cves.sort(key=lambda c: (-c.get("base_score", 0.0), c["id"]))
        return {
            "record": _summary(record, state),
            "features": state.features.get(record_key, {}),
            "matched_cpes": entry.get("matched_cpes", []),
            "cves": cves,
            "threshold_used": entry.get("threshold_used"),
        }

    @app.get("/certs/{record_key}/references")
    def cert_references(record_key: str, direction: str = "both", depth: int = 1):
        state = service.state
        record = state.by_key.get(record_key)
        if record is None:
            raise HTTPException(status_code=404, detail=f"no record {record_key}")
        cert_id = state.snapshot.ids.get(record_key)
        if cert_id is None:
            return {"center": None, "nodes": [], "edges": []}
        if direction not in ("in", "out", "both"):
            raise HTTPException(status_code=422, detail=f"bad direction {direction!r}")
        try:
            sub = neighborhood(state.snapshot.graph, cert_id.canonical, direction, max(depth, 0))
        except UnknownSeed:
            raise HTTPException(status_code=404, detail=f"{cert_id.canonical} not in graph") from None
        nodes = []
        for canonical in sorted(sub.nodes):
            keys = state.keys_by_canonical.get(canonical, [])
            vulnerable = any(state.snapshot.matches.get(k, {}).get("cves") for k in keys)
            titles = [state.by_key[k].title for k in keys if k in state.by_key]
            nodes.append(
                {
                    "canonical": canonical,
                    "record_keys": keys,
                    "title": titles[0] if titles else None,
                    "vulnerable": vulnerable,
                }
            )
        return {
            "center": cert_id.canonical,
            "nodes": nodes,
            "edges": sub.to_dict()["edges"],
        }

    @app.get("/search/fulltext")
    def fulltext(q: str = ""):
        state = service.state
        if not q:
            return {"results": [], "count": 0}
        keys = state.fulltext.search(q)
        out = [_summary(state.by_key[k], state) for k in keys if k in state.by_key]
        return {"results": out, "count": len(out)}

    @app.get("/cve/{cve_id}/certs")
    def cve_certs(cve_id: str):
        state = service.state
        keys = sorted(state.cve_to_keys.get(cve_id, []))
        return {
            "cve": cve_id,
            "results": [_summary(state.by_key[k], state) for k in keys if k in state.by_key],
        }

    @app.get("/report")
    def report():
        return service.state.snapshot.report

    @app.post("/subscriptions")
    def add_subscription(body: dict):
        selector = body.get("selector", "")
        sink = body.get("sink", "log")
        try:
            sub_id = service.subscribe(selector, sink)
        except BadSelector as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return {"id": sub_id, "selector": selector, "sink": sink}

    @app.get("/subscriptions/{sub_id}")
    def get_subscription(sub_id: int):
        sub = service.subscription(sub_id)
        if sub is None:
            raise HTTPException(status_code=404, detail=f"no subscription {sub_id}")
        return {
            "id": sub.sub_id,
            "selector": sub.selector,
            "sink": sub.sink,
            "deliveries": list(sub.deliveries),
        }

    @app.get("/diff")
    def diff_endpoint(request: Request):
        # "from" is a Python keyword, so both params come off the raw query.
        ref_from = request.query_params.get("from", "")
        ref_to = request.query_params.get("to", "current")
        if not ref_from:
            raise HTTPException(status_code=422, detail="from and to are required")
        old = service.find_snapshot(ref_from)
        new = service.find_snapshot(ref_to)
        if old is None or new is None:
            raise HTTPException(status_code=404, detail="unknown snapshot reference")
        events = diff(old, new)
        return {"events": [e.to_dict() for e in events], "count": len(events)}

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def build_app(snapshot: Snapshot, ui_dir: str | None = None) -> tuple[FastAPI, SnapshotService]:
    service = SnapshotService(snapshot)
    app = create_app(service, ui_dir)
    return app, service


@dataclass
class RunningService:
    service: SnapshotService
    host: str
    port: int
    _server: object = None
    _thread: threading.Thread | None = None

    def stop(self) -> None:
        if self._server is not None:
            self._server.should_exit = True
        if self._thread is not None:
            self._thread.join(timeout=10)


def serve(
    snapshot: Snapshot,
    bind_address: tuple[str, int] = ("127.0.0.1", DEFAULT_PORT),
    ui_dir: str | None = None,
) -> RunningService:
    """Start the API server in a background thread and return a handle with
    the bound port and a stop() method."""
    import uvicorn

    host, port = bind_address
    if port != 0:
        probe = socket.socket()
        try:
            probe.bind((host, port))
        except OSError as exc:
            raise BindError(f"cannot bind {host}:{port}: {exc}") from exc
        finally:
            probe.close()

    app, service = build_app(snapshot, ui_dir)
    config = uvicorn.Config(app, host=host, port=port, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started:
        if not thread.is_alive():
            raise BindError(f"server failed to start on {host}:{port}")
        if time.time() > deadline:
            server.should_exit = True
            raise BindError(f"server did not start within 15s on {host}:{port}")
        time.sleep(0.02)
    actual_port = port
    for srv in server.servers:
        for sock in srv.sockets:
            actual_port = sock.getsockname()[1]
    return RunningService(service=service, host=host, port=actual_port, _server=server, _thread=thread)
