"""Map certified products to NVD vulnerabilities through fuzzy CPE matching.

A CPE record becomes a match candidate for a certificate only when three
conditions hold: the CPE product name is at least four characters long, the
vendors match exactly (modulo normalization and an editable alias table),
and some version extracted from the certificate title agrees with the CPE
version on its major and minor components (the certificate version may be
more specific). Candidates are then scored with the combined indel-based
similarity between the lemmatized certificate title and the lemmatized
vendor/product/version text of the CPE; scores at or above the threshold
are matches, and their CVEs come from the NVD's CPE-to-CVE mapping, which
is treated as ground truth.

Certificates without an extractable version produce no candidates at all,
keeping the mapping a conservative lower bound.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from importlib import resources
from typing import Iterable, Mapping

from .errors import SchemaError
from .fuzzymatch import combined_similarity, lemmatize_title
from .ingest import CertRecord

DEFAULT_THRESHOLD = 92.0

_CPE_SPLIT = re.compile(r"(?<!\\):")
_CVE_ID = re.compile(r"CVE-[0-9]{4}-[0-9]{4,}")
_CWE_ID = re.compile(r"CWE-[0-9]+")
_VERSION = re.compile(r"\bv?(\d+(?:\.\d+)+)\b", re.IGNORECASE)
_VENDOR_JUNK = re.compile(r"[^a-z0-9]+")


@dataclass(frozen=True)
class CpeEntry:
    """One CPE 2.3 record; segments keep their raw (escaped) spelling so the
    entry re-serializes to exactly the URI it was parsed from."""

    segments: tuple[str, ...]

    @property
    def uri(self) -> str:
        return ":".join(self.segments)

    @property
    def vendor(self) -> str:
        return self.segments[3]

    @property
    def product(self) -> str:
        return self.segments[4]

    @property
    def version(self) -> str:
        return self.segments[5]

    @classmethod
    def parse(cls, uri: str) -> "CpeEntry":
        segments = tuple(_CPE_SPLIT.split(uri.strip()))
        if len(segments) != 13 or segments[0] != "cpe" or segments[1] != "2.3":
            raise SchemaError(f"not a cpe:2.3 uri: {uri!r}")
        entry = cls(segments)
        if not entry.vendor or not entry.product:
            raise SchemaError(f"cpe uri with empty vendor/product: {uri!r}")
        return entry


@dataclass(frozen=True)
class CveEntry:
    id: str
    published: date
    base_score: float
    cwe_ids: frozenset[str]
    vulnerable_cpes: frozenset[str]

    def __post_init__(self):
        if not _CVE_ID.fullmatch(self.id):
            raise SchemaError(f"bad CVE id {self.id!r}")
        if not 0.0 <= self.base_score <= 10.0:
            raise SchemaError(f"{self.id}: base score {self.base_score} outside [0, 10]")


@dataclass(frozen=True)
class NvdDataset:
    """Parsed NVD fixture data plus the indices the matcher needs."""

    cpes: tuple[CpeEntry, ...]
    cves: tuple[CveEntry, ...]
    by_vendor: dict[str, tuple[CpeEntry, ...]] = field(init=False, repr=False, compare=False)
    cves_by_cpe: dict[str, frozenset[str]] = field(init=False, repr=False, compare=False)
    cve_by_id: dict[str, CveEntry] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_vendor: dict[str, list[CpeEntry]] = {}
        for cpe in self.cpes:
            by_vendor.setdefault(normalize_vendor(cpe.vendor), []).append(cpe)
        inverse: dict[str, set[str]] = {}
        for cve in self.cves:
            for uri in cve.vulnerable_cpes:
                inverse.setdefault(uri, set()).add(cve.id)
        object.__setattr__(self, "by_vendor", {v: tuple(c) for v, c in by_vendor.items()})
        object.__setattr__(self, "cves_by_cpe", {u: frozenset(ids) for u, ids in inverse.items()})
        object.__setattr__(self, "cve_by_id", {c.id: c for c in self.cves})

    def __iter__(self):
        yield list(self.cpes)
        yield list(self.cves)


def load_nvd(cpe_dict_path: str, cve_feed_path: str) -> NvdDataset:
    """Parse the line-oriented CPE dictionary and CVE feed fixtures.

    CPE dictionary: one cpe:2.3 URI per line. CVE feed: one record per line,
    "CVE-id|published|base_score|CWE-list|cpe-uri-list" with comma-separated
    lists. The CPE-to-CVE mapping is taken as error-free ground truth.
    """
    cpes: list[CpeEntry] = []
    seen: set[str] = set()
    with open(cpe_dict_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                entry = CpeEntry.parse(line)
            except SchemaError as exc:
                raise SchemaError(f"{cpe_dict_path}:{lineno}: {exc}") from exc
            if entry.uri not in seen:
                seen.add(entry.uri)
                cpes.append(entry)

    cves: list[CveEntry] = []
    with open(cve_feed_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("|")
            if len(parts) != 5:
                raise SchemaError(f"{cve_feed_path}:{lineno}: expected 5 fields, got {len(parts)}")
            cve_id, published, score, cwes, uris = (p.strip() for p in parts)
            try:
                cves.append(
                    CveEntry(
                        id=cve_id,
                        published=date.fromisoformat(published),
                        base_score=float(score),
                        cwe_ids=frozenset(c.strip() for c in cwes.split(",") if c.strip()),
                        vulnerable_cpes=frozenset(u.strip() for u in uris.split(",") if u.strip()),
                    )
                )
            except (ValueError, SchemaError) as exc:
                raise SchemaError(f"{cve_feed_path}:{lineno}: {exc}") from exc
            for cwe in cves[-1].cwe_ids:
                if not _CWE_ID.fullmatch(cwe):
                    raise SchemaError(f"{cve_feed_path}:{lineno}: bad CWE id {cwe!r}")
    return NvdDataset(cpes=tuple(cpes), cves=tuple(cves))


def extract_versions(title: str) -> set[str]:
    """All version-shaped tokens (dotted digit runs, optional leading v)."""
    return set(_VERSION.findall(title))


def normalize_vendor(vendor: str) -> str:
    """Lowercase and collapse punctuation/underscores to single spaces."""
    return _VENDOR_JUNK.sub(" ", vendor.lower()).strip()


def load_vendor_aliases(path: str | None = None) -> dict[str, frozenset[str]]:
    """Alias table mapping a normalized certificate vendor to the normalized
    CPE vendors it should also match. None loads the bundled table."""
    if path is None:
        data = resources.files("certlab.data").joinpath("vendor_aliases.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            data = fh.read()
    table: dict[str, set[str]] = {}
    for line in data.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        form, _, target = line.partition(" ")
        table.setdefault(normalize_vendor(form), set()).add(normalize_vendor(target))
    return {k: frozenset(v) for k, v in table.items()}


def _split_version(version: str) -> list[str]:
    return [p for p in version.split(".") if p != ""]


def _component_equal(a: str, b: str) -> bool:
    if a.isdigit() and b.isdigit():
        return int(a) == int(b)
    return a == b


def versions_compatible(
    cert_version: str, cpe_version: str, *, allow_wildcard_version: bool = False
) -> bool:
    """Major and minor components must agree; the certificate version may
    carry extra trailing components beyond what the CPE specifies. The CPE
    wildcard versions "-" and "*" match only when explicitly allowed."""
    if cpe_version in ("-", "*"):
        return allow_wildcard_version
    cert_parts = _split_version(cert_version)
    cpe_parts = _split_version(cpe_version)
    for i in range(2):
        if i >= len(cpe_parts):
            return True
        if i >= len(cert_parts):
            return False
        if not _component_equal(cert_parts[i], cpe_parts[i]):
            return False
    return True


def candidate_cpes(
    record: CertRecord,
    versions: set[str],
    nvd: NvdDataset,
    *,
    aliases: Mapping[str, frozenset[str]] | None = None,
    allow_wildcard_version: bool = False,
) -> list[CpeEntry]:
    """CPEs passing all three candidate conditions for the given certificate."""
    if not versions:
        return []
    vendor_norm = normalize_vendor(record.vendor)
    accepted_vendors = {vendor_norm} | set((aliases or {}).get(vendor_norm, ()))
    out: list[CpeEntry] = []
    for accepted in sorted(accepted_vendors):
        for cpe in nvd.by_vendor.get(accepted, ()):
            if len(cpe.product) < 4:
                continue
            if not any(
                versions_compatible(v, cpe.version, allow_wildcard_version=allow_wildcard_version)
                for v in versions
            ):
                continue
            out.append(cpe)
    return out


def _cpe_match_text(cpe: CpeEntry) -> str:
    parts = [cpe.vendor.replace("_", " "), cpe.product.replace("_", " ")]
    if cpe.version not in ("-", "*"):
        parts.append(cpe.version)
    return " ".join(parts)


@dataclass(frozen=True)
class MatchResult:
    record_key: str
    matched_cpes: tuple[tuple[str, float], ...]
    cves: frozenset[str]
    threshold_used: float

    def to_dict(self) -> dict:
        return {
            "matched_cpes": [[uri, score] for uri, score in self.matched_cpes],
            "cves": sorted(self.cves),
            "threshold_used": self.threshold_used,
        }


def score_pair(title: str, cpe: CpeEntry) -> float:
    """Similarity between a certificate title and one CPE, both lemmatized."""
    return combined_similarity(
        lemmatize_title(title).joined,
        lemmatize_title(_cpe_match_text(cpe)).joined,
    )


def match_certificate(
    record: CertRecord,
    candidates: Iterable[CpeEntry],
    nvd: NvdDataset,
    threshold: float = DEFAULT_THRESHOLD,
) -> MatchResult:
    """Score each candidate and keep those at or above the threshold,
    resolving the union of their CVEs from the NVD inverse index."""
    if not 0 <= threshold <= 100:
        raise ValueError(f"threshold {threshold} outside [0, 100]")
    matched: list[tuple[str, float]] = []
    for cpe in candidates:
        score = score_pair(record.title, cpe)
        if score >= threshold:
            matched.append((cpe.uri, score))
    matched.sort(key=lambda pair: (-pair[1], pair[0]))
    cve_ids: set[str] = set()
    for uri, _ in matched:
        cve_ids |= nvd.cves_by_cpe.get(uri, frozenset())
    return MatchResult(
        record_key=record.record_key,
        matched_cpes=tuple(matched),
        cves=frozenset(cve_ids),
        threshold_used=float(threshold),
    )
