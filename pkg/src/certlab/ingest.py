"""Load and unify certificate metadata from CSV and HTML-derived snapshots.

The two portal exports describe the same certificates with overlapping
fields. They are joined on (scheme, report-file basename); the CSV is
authoritative for dates and status, the HTML snapshot for artifact links
and maintenance updates. Disagreements on other fields are surfaced as
ConflictWarning, never as failures.

Also provides the conversion-quality checks that flag malformed PDF-to-text
output, and the wrapper for the external converter command.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import os
import shlex
import subprocess
import warnings
from dataclasses import dataclass, field, replace
from datetime import date

from .errors import ConflictWarning, ConverterFailed, SchemaError

SCHEME_CODES = frozenset(
    ["AU", "CA", "DE", "ES", "FR", "IN", "IT", "JP", "KR", "MY", "NL", "NO", "SE", "SG", "TR", "UK", "US"]
)
UNKNOWN_SCHEME = "??"

CSV_COLUMNS = [
    "scheme",
    "category",
    "title",
    "vendor",
    "cert_date",
    "expiry_date",
    "status",
    "eal",
    "report_path",
    "target_path",
]

CONVERTER_ENV_VAR = "CERTLAB_CONVERTER"


class DocKind(str, enum.Enum):
    CERTIFICATE_REPORT = "certificate_report"
    SECURITY_TARGET = "security_target"
    MAINTENANCE_UPDATE = "maintenance_update"


class IngestWarning(UserWarning):
    """Recoverable data defect in a snapshot file (coerced, not fatal)."""


@dataclass(frozen=True)
class MaintenanceUpdate:
    update_date: date
    path: str


@dataclass(frozen=True)
class CertRecord:
    """Unified metadata of one certified product."""

    record_key: str
    scheme: str
    category: str
    title: str
    vendor: str
    cert_date: date
    expiry_date: date | None
    status: str
    declared_eal: str | None
    artifact_paths: dict[DocKind, str] = field(default_factory=dict)
    maintenance_updates: tuple[MaintenanceUpdate, ...] = ()


def record_key(scheme: str, title: str, report_basename: str) -> str:
    """Stable 16-hex-digit key over the fields that identify a certificate."""
    digest = hashlib.sha256(f"{scheme}|{title}|{report_basename}".encode()).hexdigest()
    return digest[:16]


def _parse_date(value: str, *, context: str) -> date | None:
    value = value.strip()
    if not value:
        return None
    try:
        return date.fromisoformat(value)
    except ValueError as exc:
        raise SchemaError(f"{context}: bad date {value!r}") from exc


def _coerce_scheme(value: str, *, context: str) -> str:
    value = value.strip().upper()
    if value in SCHEME_CODES or value == UNKNOWN_SCHEME:
        return value
    warnings.warn(f"{context}: unrecognized scheme {value!r}, using {UNKNOWN_SCHEME!r}", IngestWarning)
    return UNKNOWN_SCHEME


def _coerce_status(value: str, *, context: str) -> str:
    value = value.strip().lower()
    if value not in ("active", "archived"):
        raise SchemaError(f"{context}: bad status {value!r}")
    return value


@dataclass
class _RawEntry:
    scheme: str
    category: str
    title: str
    vendor: str
    cert_date: date | None
    expiry_date: date | None
    status: str | None
    eal: str | None
    report_path: str | None
    target_path: str | None
    maintenance: list[tuple[date, str]] = field(default_factory=list)

    @property
    def join_key(self) -> tuple[str, str, str]:
        return (self.scheme, self.title, os.path.basename(self.report_path or ""))


def _read_csv(csv_path: str) -> list[_RawEntry]:
    entries: list[_RawEntry] = []
    with open(csv_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return []
        missing = [c for c in CSV_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{csv_path}: missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            ctx = f"{csv_path}:{lineno}"
            cert_date = _parse_date(row["cert_date"], context=ctx)
            if cert_date is None:
                raise SchemaError(f"{ctx}: cert_date is required")
            entries.append(
                _RawEntry(
                    scheme=_coerce_scheme(row["scheme"], context=ctx),
                    category=row["category"].strip(),
                    title=row["title"].strip(),
                    vendor=row["vendor"].strip(),
                    cert_date=cert_date,
                    expiry_date=_parse_date(row["expiry_date"], context=ctx),
                    status=_coerce_status(row["status"], context=ctx),
                    eal=row["eal"].strip() or None,
                    report_path=row["report_path"].strip() or None,
                    target_path=row["target_path"].strip() or None,
                )
            )
    return entries


def _read_html_snapshot(path: str) -> list[_RawEntry]:
    """Parse the flattened HTML-derived snapshot: "[cert]" blocks of
    "key: value" lines, with repeatable "maintenance: DATE PATH" lines."""
    entries: list[_RawEntry] = []
    current: dict[str, str] | None = None
    maintenance: list[tuple[date, str]] = []

    def flush(ctx: str) -> None:
        nonlocal current, maintenance
        if current is None:
            return
        for required in ("scheme", "title"):
            if required not in current:
                raise SchemaError(f"{ctx}: block missing {required!r}")
        entries.append(
            _RawEntry(
                scheme=_coerce_scheme(current["scheme"], context=ctx),
                category=current.get("category", "").strip(),
                title=current["title"].strip(),
                vendor=current.get("vendor", "").strip(),
                cert_date=_parse_date(current.get("cert_date", ""), context=ctx),
                expiry_date=_parse_date(current.get("expiry_date", ""), context=ctx),
                status=current.get("status", "").strip().lower() or None,
                eal=current.get("eal", "").strip() or None,
                report_path=current.get("report_path", "").strip() or None,
                target_path=current.get("target_path", "").strip() or None,
                maintenance=maintenance,
            )
        )
        current = None
        maintenance = []

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            ctx = f"{path}:{lineno}"
            if not line or line.startswith("#"):
                continue
            if line == "[cert]":
                flush(ctx)
                current = {}
                continue
            if current is None:
                raise SchemaError(f"{ctx}: content before first [cert] block")
            key, sep, value = line.partition(":")
            if not sep:
                raise SchemaError(f"{ctx}: expected 'key: value', got {line!r}")
            key = key.strip()
            value = value.strip()
            if key == "maintenance":
                parts = value.split(None, 1)
                if len(parts) != 2:
                    raise SchemaError(f"{ctx}: maintenance needs 'DATE PATH'")
                upd_date = _parse_date(parts[0], context=ctx)
                if upd_date is None:
                    raise SchemaError(f"{ctx}: maintenance needs a date")
                maintenance.append((upd_date, parts[1].strip()))
            else:
                current[key] = value
    flush(path)
    return entries


def _warn_conflict(key: str, field_name: str, csv_value, html_value) -> None:
    warnings.warn(
        f"record {key}: CSV and HTML disagree on {field_name} "
        f"({csv_value!r} vs {html_value!r}); keeping CSV value",
        ConflictWarning,
    )


def _merge(csv_entry: _RawEntry | None, html_entry: _RawEntry | None) -> CertRecord:
    primary = csv_entry or html_entry
    assert primary is not None
    key = record_key(primary.scheme, primary.title, os.path.basename(primary.report_path or ""))

    if csv_entry is not None and html_entry is not None:
        for field_name in ("title", "vendor", "category", "status", "eal"):
            a, b = getattr(csv_entry, field_name), getattr(html_entry, field_name)
            if b and a != b:
                _warn_conflict(key, field_name, a, b)
        for field_name in ("cert_date", "expiry_date"):
            a, b = getattr(csv_entry, field_name), getattr(html_entry, field_name)
            if b is not None and a != b:
                _warn_conflict(key, field_name, a, b)

    cert_date = primary.cert_date
    expiry = primary.expiry_date
    if csv_entry is not None:
        cert_date, expiry = csv_entry.cert_date, csv_entry.expiry_date
    if cert_date is None:
        raise SchemaError(f"record {key}: no certification date in either source")
    if expiry is not None and expiry < cert_date:
        warnings.warn(f"record {key}: expiry {expiry} precedes cert date {cert_date}; dropping expiry", IngestWarning)
        expiry = None

    links = html_entry if html_entry is not None else primary
    artifact_paths: dict[DocKind, str] = {}
    if links.report_path:
        artifact_paths[DocKind.CERTIFICATE_REPORT] = links.report_path
    if links.target_path:
        artifact_paths[DocKind.SECURITY_TARGET] = links.target_path

    return CertRecord(
        record_key=key,
        scheme=primary.scheme,
        category=primary.category,
        title=primary.title,
        vendor=primary.vendor,
        cert_date=cert_date,
        expiry_date=expiry,
        status=(csv_entry.status if csv_entry else primary.status) or "active",
        declared_eal=primary.eal,
        artifact_paths=artifact_paths,
        maintenance_updates=tuple(
            MaintenanceUpdate(d, p) for d, p in sorted(links.maintenance)
        ),
    )


def ingest_snapshot(csv_path: str, html_records_path: str) -> list[CertRecord]:
    """Join both snapshot files into one CertRecord per certified product.

    Duplicate rows collapse onto one record (the portal exports are known to
    contain them); the first occurrence wins and differing duplicates warn.
    """
    csv_entries = _read_csv(csv_path)
    html_entries = _read_html_snapshot(html_records_path)

    csv_by_key: dict[tuple[str, str, str], _RawEntry] = {}
    order: list[tuple[str, str, str]] = []
    for entry in csv_entries:
        if entry.join_key in csv_by_key:
            if csv_by_key[entry.join_key] != entry:
                warnings.warn(
                    f"duplicate CSV rows for {entry.join_key} differ; keeping the first",
                    IngestWarning,
                )
            continue
        csv_by_key[entry.join_key] = entry
        order.append(entry.join_key)

    html_by_key: dict[tuple[str, str, str], _RawEntry] = {}
    for entry in html_entries:
        if entry.join_key in html_by_key:
            warnings.warn(f"duplicate HTML blocks for {entry.join_key}; keeping the first", IngestWarning)
            continue
        html_by_key[entry.join_key] = entry
        if entry.join_key not in csv_by_key:
            order.append(entry.join_key)

    records = []
    seen_keys: set[str] = set()
    for join_key in order:
        rec = _merge(csv_by_key.get(join_key), html_by_key.get(join_key))
        if rec.record_key in seen_keys:
            warnings.warn(f"records collide on key {rec.record_key}; keeping the first", IngestWarning)
            continue
        seen_keys.add(rec.record_key)
        records.append(rec)
    return records


def register_artifacts(records: list[CertRecord], artifacts_dir: str) -> list[CertRecord]:
    """Resolve artifact paths against artifacts_dir, dropping entries whose
    files do not exist so that every registered path is readable."""
    registered = []
    for rec in records:
        paths: dict[DocKind, str] = {}
        for kind, rel in rec.artifact_paths.items():
            full = rel if os.path.isabs(rel) else os.path.join(artifacts_dir, rel)
            if os.path.isfile(full):
                paths[kind] = full
            else:
                warnings.warn(f"record {rec.record_key}: missing artifact {full}", IngestWarning)
        updates = []
        for upd in rec.maintenance_updates:
            full = upd.path if os.path.isabs(upd.path) else os.path.join(artifacts_dir, upd.path)
            if os.path.isfile(full):
                updates.append(MaintenanceUpdate(upd.update_date, full))
            else:
                warnings.warn(f"record {rec.record_key}: missing maintenance artifact {full}", IngestWarning)
        registered.append(replace(rec, artifact_paths=paths, maintenance_updates=tuple(updates)))
    return registered


# --- conversion-quality checks -------------------------------------------

CHECK_THRESHOLDS = {
    1: 30,      # number of lines
    2: 1000,    # byte size
    3: 20,      # average line length
    4: 15,      # lines whose even-indexed characters are not all identical
    5: 0.5,     # alphanumeric character ratio
}


@dataclass(frozen=True)
class ConversionQuality:
    line_count: int
    byte_size: int
    avg_line_length: float
    even_char_nonidentical_lines: int
    alnum_ratio: float
    failed_checks: frozenset[int]

    @property
    def malformed(self) -> bool:
        return bool(self.failed_checks)


def check_conversion(text: str, byte_size: int) -> ConversionQuality:
    """Apply the five quality checks; a metric strictly below its threshold
    fails that check (values equal to the threshold pass)."""
    lines = text.splitlines()
    line_count = len(lines)
    avg_line_length = (sum(len(l) for l in lines) / line_count) if lines else 0.0
    varied = sum(1 for l in lines if len(set(l[0::2])) > 1)
    alnum_ratio = (sum(c.isalnum() for c in text) / len(text)) if text else 0.0

    metrics = {
        1: line_count,
        2: byte_size,
        3: avg_line_length,
        4: varied,
        5: alnum_ratio,
    }
    failed = frozenset(i for i, value in metrics.items() if value < CHECK_THRESHOLDS[i])
    return ConversionQuality(
        line_count=line_count,
        byte_size=byte_size,
        avg_line_length=avg_line_length,
        even_char_nonidentical_lines=varied,
        alnum_ratio=alnum_ratio,
        failed_checks=failed,
    )


def run_converter(pdf_path: str, converter_cmd: str | None = None, *, timeout: float = 300.0) -> str:
    """Run the external PDF-to-text command and return the produced text.

    The command template must contain "{in}" and "{out}" placeholders; the
    CERTLAB_CONVERTER environment variable overrides the given template.
    """
    template = os.environ.get(CONVERTER_ENV_VAR) or converter_cmd
    if not template:
        raise ConverterFailed("no converter command configured")
    if "{in}" not in template or "{out}" not in template:
        raise ConverterFailed(f"converter template needs {{in}} and {{out}}: {template!r}")
    out_path = pdf_path + ".txt"
    argv = [
        part.replace("{in}", pdf_path).replace("{out}", out_path)
        for part in shlex.split(template)
    ]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise ConverterFailed(f"converter {argv[0]!r} failed to run: {exc}") from exc
    if proc.returncode != 0:
        raise ConverterFailed(f"converter exited {proc.returncode}: {proc.stderr.strip()}")
    if not os.path.isfile(out_path):
        raise ConverterFailed(f"converter produced no output file {out_path}")
    with open(out_path, encoding="utf-8", errors="replace") as fh:
        return fh.read()


def convert_document(
    pdf_path: str,
    converter_cmd: str | None = None,
    fallback_cmd: str | None = None,
) -> tuple[str, ConversionQuality]:
    """Convert a document, retrying with the fallback command (the OCR slot)
    when the primary result fails the quality checks."""
    text = run_converter(pdf_path, converter_cmd)
    quality = check_conversion(text, len(text.encode("utf-8")))
    if quality.malformed and fallback_cmd:
        text = run_converter(pdf_path, fallback_cmd)
        quality = check_conversion(text, len(text.encode("utf-8")))
    return text, quality
