"""Certificate-ID extraction, canonicalization, and selection.

Every national scheme formats its certificate IDs differently; the only
universal component is some counter. Each scheme gets a family of regular
expressions with named groups plus a canonicalizer that rebuilds a single
normalized spelling from the parsed components, so that all raw variants of
one ID map to one canonical string.

Selection works over four candidate sources (report filename, PDF metadata,
frontpage, full contents). Candidate weights are occurrence counts
normalized within their source; sources are then weighted 1.0 (filename),
1.2 (pdf_metadata), 1.5 (frontpage) and 1.0 (contents), weights of identical
canonical candidates summed, and the heaviest candidate wins. Ties go to the
longest canonical string, then the lexicographically smallest.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .errors import NotAnId


class Source(str, enum.Enum):
    FILENAME = "filename"
    PDF_METADATA = "pdf_metadata"
    FRONTPAGE = "frontpage"
    CONTENTS = "contents"


SOURCE_WEIGHTS: dict[Source, Fraction] = {
    Source.FILENAME: Fraction(10, 10),
    Source.PDF_METADATA: Fraction(12, 10),
    Source.FRONTPAGE: Fraction(15, 10),
    Source.CONTENTS: Fraction(10, 10),
}


@dataclass(frozen=True)
class CertId:
    scheme: str
    canonical: str
    components: dict[str, object]

    def __str__(self) -> str:
        return self.canonical


@dataclass(frozen=True)
class IdCandidate:
    raw: str
    canonical: str
    scheme: str
    source: Source
    weight: Fraction


def _expand_year(raw: str) -> int:
    value = int(raw)
    if len(raw) == 2:
        return 1900 + value if value >= 90 else 2000 + value
    return value


def _int_or_str(raw: str):
    return int(raw) if raw.isdigit() else raw


# --- per-scheme canonicalizers ---------------------------------------------
#
# Each entry pairs a compiled pattern with a builder mapping the match to
# (canonical string, components). Patterns are listed most-specific first;
# scanning masks out earlier matches so an ID never double-counts under a
# less specific pattern of the same scheme.

Builder = Callable[[re.Match], tuple[str, dict[str, object]]]


def _au(m: re.Match):
    year = _expand_year(m["year"])
    counter = int(m["counter"])
    return f"Certificate Number: {year}/{counter}", {"year": year, "counter": counter}


def _ca_383(m: re.Match):
    counter = int(m["number2"])
    return f"383-{m['digit']}-{counter}", {"counter": counter, "digit": int(m["digit"])}


def _ca_lab(m: re.Match):
    counter = int(m["number"])
    comps: dict[str, object] = {"counter": counter, "lab": m["lab"]}
    canonical = f"{counter} {m['lab']}"
    if m["year"]:
        comps["year"] = _expand_year(m["year"])
        canonical += f" {comps['year']}"
    return canonical, comps


def _de(m: re.Match):
    counter = int(m["counter"])
    comps: dict[str, object] = {"counter": counter}
    parts = ["BSI-DSZ-CC"]
    if m["s"]:
        parts.append("S")
        comps["site"] = True
    parts.append(f"{counter:04d}")
    if m["version"]:
        version = m["version"].upper()
        comps["version"] = version
        parts.append(version)
    if m["year"]:
        comps["year"] = int(m["year"])
        parts.append(m["year"])
    if m["doc"]:
        comps["doc"] = m["doc"]
    return "-".join(parts), comps


def _es(m: re.Match):
    year, project, counter = int(m["year"]), int(m["project"]), int(m["counter"])
    version = f"v{m['version']}"
    return (
        f"{year}-{project}-INF-{counter}-{version}",
        {"year": year, "counter": counter, "project": project, "version": version},
    )


def _fr(m: re.Match):
    year = _expand_year(m["year"])
    counter = int(m["counter"])
    comps: dict[str, object] = {"year": year, "counter": counter}
    canonical = f"ANSSI-CC-{year}/{counter}"
    version = m.groupdict().get("version")
    if version:
        comps["version"] = f"v{version}"
        canonical += f"v{version}"
    doc = m.groupdict().get("doc")
    if doc:
        comps["doc"] = doc
    return canonical, comps


def _in(m: re.Match):
    counter = f"{m['number1']}/{m['number2']}"
    return (
        f"IC3S/{m['lab']}/{m['vendor']}/{m['level']}/{counter}",
        {"counter": counter, "lab": m["lab"], "vendor": m["vendor"], "level": m["level"]},
    )


def _it(m: re.Match):
    counter = int(m["counter"])
    comps: dict[str, object] = {"counter": counter, "year": int(m["year"])}
    middle = f"{m['lab']}/" if m["lab"] else ""
    if m["lab"]:
        comps["lab"] = m["lab"]
    return f"OCSI/CERT/{middle}{counter:02d}/{m['year']}/RC", comps


def _jp_full(m: re.Match):
    counter = int(m["counter"])
    digit = int(m["digit"])
    year = int(m["year"])
    return (
        f"JISEC-CC-CRP-C{counter:04d}-{digit:02d}-{year}",
        {"counter": counter, "digit": digit, "year": year},
    )


def _jp_crp(m: re.Match):
    counter = int(m["counter"])
    digit = int(m["digit"])
    return f"CRP-C{counter:04d}-{digit:02d}", {"counter": counter, "digit": digit}


def _jp_counter(m: re.Match):
    counter = int(m["counter"])
    return f"Certification No. C{counter:04d}", {"counter": counter}


def _kr(m: re.Match):
    counter = int(m["counter"])
    year = int(m["year"])
    return (
        f"KECS-{m['word']}-{counter:04d}-{year}",
        {"counter": counter, "year": year, "word": m["word"]},
    )


def _my(m: re.Match):
    counter = int(m["counter"])
    version = "V" + m["version"][1:]
    return (
        f"ISCB-{m['digit']}-RPT-C{counter:03d}-CR-{version}",
        {"counter": counter, "digit": int(m["digit"]), "version": version},
    )


def _nl(m: re.Match):
    core = m["core"]
    comps: dict[str, object] = {"counter": int(core.split("-")[-1])}
    if m["year"]:
        comps["year"] = _expand_year(m["year"])
    canonical = f"NSCIB-CC-{core}"
    if m["doc"]:
        comps["doc"] = m["doc"]
        canonical += f"-{m['doc']}"
    return canonical, comps


def _no(m: re.Match):
    counter = int(m["counter"])
    return f"SERTIT-{counter:03d}", {"counter": counter}


def _se(m: re.Match):
    counter = int(m["counter"])
    year = int(m["year"])
    return f"CSEC{year}{counter:03d}", {"counter": counter, "year": year}


def _sg(m: re.Match):
    counter = int(m["counter"])
    return (
        f"CSA_CC_{m['year']}{counter:03d}",
        {"counter": counter, "year": _expand_year(m["year"])},
    )


def _tr(m: re.Match):
    counter = int(m["number"])
    return f"{m['prefix']}/TSE-CCCS-{counter}", {"counter": counter, "prefix": m["prefix"]}


def _uk(m: re.Match):
    counter = _int_or_str(m["counter"])
    return f"CRP{m['counter']}", {"counter": counter}


def _us_year_first(m: re.Match):
    counter = int(m["counter"])
    comps: dict[str, object] = {"counter": counter, "year": _expand_year(m["year"])}
    prefix = "CCEVS-VR"
    if m["cc"]:
        prefix += "-CC"
    if m["VID"]:
        prefix += "-VID"
        comps["vid"] = True
    return f"{prefix}-{m['year']}-{counter:04d}", comps


def _us_counter_first(m: re.Match):
    counter = int(m["counter"])
    comps: dict[str, object] = {"counter": counter}
    prefix = "CCEVS-VR"
    if m["cc"]:
        prefix += "-CC"
    if m["VID"]:
        prefix += "-VID"
        comps["vid"] = True
    canonical = f"{prefix}-{m['counter']}"
    if m["year"]:
        comps["year"] = int(m["year"])
        canonical += f"-{m['year']}"
    return canonical, comps


def _rules(scheme: str, *pairs: tuple[str, Builder]) -> tuple[str, tuple[tuple[re.Pattern, Builder], ...]]:
    return scheme, tuple((re.compile(src), builder) for src, builder in pairs)


SCHEME_RULES: dict[str, tuple[tuple[re.Pattern, Builder], ...]] = dict(
    [
        _rules(
            "AU",
            (r"(Certificate Number:|Certification Report) (?P<year>[0-9]{2,4})/(?P<counter>[0-9]+)", _au),
        ),
        _rules(
            "CA",
            (r"(?P<number1>383)[ -](?P<digit>[0-9])[ -](?P<number2>[0-9]+)(-CR|P)?", _ca_383),
            (r"(?P<number>[0-9]+)[ -](?P<lab>EWA|LSS|CCS)([ -](?P<year>[0-9]+))?", _ca_lab),
        ),
        _rules(
            "DE",
            (
                r"BSI-DSZ-CC-((?P<s>S)-)?(?P<counter>[0-9]{3,5})-?"
                r"((?P<version>[vV][0-9])-)?(?P<year>[0-9]{4})?(-(?P<doc>(RA|MA)(-[0-9]+)?))?",
                _de,
            ),
        ),
        _rules(
            "ES",
            (
                r"(?P<year>[0-9]{4})[-‐](?P<project>[0-9]+)[-‐]INF[-‐](?P<counter>[0-9]+)"
                r"[ -‐]{1,2}[vV](?P<version>[0-9])",
                _es,
            ),
        ),
        _rules(
            "FR",
            (r"ANSS[Ii](-CC)?[ -](?P<year>[0-9]{2,4})[/_-](?P<counter>[0-9]+)(-(?P<doc>([MSR][0-9]+)))?([vV](?P<version>[0-9]))?", _fr),
            (r"DCSS[Ii]-(?P<year>[0-9]{2,4})/(?P<counter>[0-9]+)([vV](?P<version>[0-9]))?", _fr),
            (r"Rapport de certification (?P<year>[0-9]{2,4})/(?P<counter>[0-9]+)([vV](?P<version>[0-9]))?", _fr),
            (r"Certification Report (?P<year>[0-9]{2,4})/(?P<counter>[0-9]+)([vV](?P<version>[0-9]))?", _fr),
        ),
        _rules(
            "IN",
            (
                r"IC3S/(?P<lab>[A-Z]+[0-9]+)/(?P<vendor>[a-zA-Z_]+)/(?P<level>[a-zA-Z0-9]+)"
                r"/(?P<number1>[0-9]+)/(?P<number2>[0-9]+) ?(/CR)?",
                _in,
            ),
        ),
        _rules(
            "IT",
            (r"OCSI/CERT/((?P<lab>[A-Z]{3})/)?(?P<counter>[0-9]{2,3})/(?P<year>[0-9]{4})/RC", _it),
        ),
        _rules(
            "JP",
            (r"JISEC-CC-CRP-C(?P<counter>[0-9]+)-(?P<digit>[0-9]+)-(?P<year>[0-9]{4})", _jp_full),
            (r"(CRP|ACR)-C(?P<counter>[0-9]+)-(?P<digit>[0-9]+)", _jp_crp),
            (r"Certification No\. [cC](?P<counter>[0-9]+)", _jp_counter),
        ),
        _rules(
            "KR",
            (r"KECS[-‐](?P<word>ISIS|NISS|CISS)[-‐](?P<counter>[0-9]{2,4})[-‐](?P<year>[0-9]{4})", _kr),
        ),
        _rules(
            "MY",
            (r"ISCB-(?P<digit>[0-9])-RPT-C(?P<counter>[0-9]{3})-CR(-[0-9])?-(?P<version>[vV][0-9][a-z]?)", _my),
        ),
        _rules(
            "NL",
            (
                r"(NSCIB-|CC-|NSCIB-CC-)(?P<core>((?P<year>[0-9]{2})-)?(-?[0-9]+)+)"
                r"(-?(?P<doc>(CR|MA|MR)[0-9]*))?",
                _nl,
            ),
        ),
        _rules("NO", (r"SERTIT-(?P<counter>[0-9]+)", _no)),
        _rules("SE", (r"CSEC ?(?P<year>[0-9]{4})(?P<counter>[0-9]{2,3})", _se)),
        _rules("SG", (r"CSA_CC_(?P<year>[0-9]{2})(?P<counter>[0-9]{3})", _sg)),
        _rules("TR", (r"(?P<prefix>[0-9.]+)/TSE-CCCS-(?P<number>[0-9]+)", _tr)),
        _rules(
            "UK",
            (r"CRP(?P<counter>[0-9]+[A-Z]?)", _uk),
            (r"CERTIFICATION REPORT No\. P(?P<counter>[0-9]+[A-Z]?)", _uk),
        ),
        _rules(
            "US",
            (r"CCEVS-VR-((?P<cc>CC)-)?((?P<VID>VID)-?)?(?P<year>[0-9]{2})-(?P<counter>[0-9]+)", _us_year_first),
            (r"CCEVS-VR-((?P<cc>CC)-)?((?P<VID>VID)-?)?(?P<counter>[0-9]{4,5})(-(?P<year>[0-9]{4}))?", _us_counter_first),
        ),
    ]
)

SCHEMES = frozenset(SCHEME_RULES)


def canonicalize(raw: str, scheme: str) -> CertId:
    """Parse a raw ID string under the given scheme and rebuild its one
    canonical spelling. Canonicalization is idempotent."""
    for pattern, builder in SCHEME_RULES.get(scheme, ()):
        m = pattern.search(raw)
        if m:
            canonical, components = builder(m)
            return CertId(scheme=scheme, canonical=canonical, components=components)
    raise NotAnId(f"{raw!r} matches no {scheme} ID pattern")


def _scan(text: str, scheme: str) -> list[tuple[str, str]]:
    """All (raw, canonical) occurrences of one scheme's IDs in a text.

    Patterns run in declaration order; spans claimed by an earlier pattern
    are masked so a less specific pattern of the same scheme cannot re-match
    inside them (e.g. the bare CRP-form inside a full JISEC ID).
    """
    found: list[tuple[str, str]] = []
    masked = text
    for pattern, builder in SCHEME_RULES.get(scheme, ()):
        spans: list[tuple[int, int]] = []
        for m in pattern.finditer(masked):
            canonical, _ = builder(m)
            found.append((m.group(0), canonical))
            spans.append(m.span())
        if spans:
            chars = list(masked)
            for start, end in spans:
                chars[start:end] = "\x00" * (end - start)
            masked = "".join(chars)
    return found


def find_all_ids(text: str) -> dict[str, int]:
    """Canonical-ID occurrence counts for every scheme, used when scanning
    artifacts for references to other certificates."""
    counts: dict[str, int] = {}
    for scheme in SCHEME_RULES:
        for _, canonical in _scan(text, scheme):
            counts[canonical] = counts.get(canonical, 0) + 1
    return counts


def candidates_from_counts(
    counts: Mapping[str, int], source: Source, scheme: str
) -> list[IdCandidate]:
    """Turn raw-string occurrence counts from one source into normalized
    candidates: weight = count / total occurrences within the source."""
    canonical_counts: dict[str, tuple[str, int]] = {}
    total = 0
    for raw, count in counts.items():
        try:
            cert_id = canonicalize(raw, scheme)
        except NotAnId:
            continue
        prev = canonical_counts.get(cert_id.canonical)
        canonical_counts[cert_id.canonical] = (prev[0] if prev else raw, (prev[1] if prev else 0) + count)
        total += count
    if total == 0:
        return []
    return [
        IdCandidate(raw=raw, canonical=canonical, scheme=scheme, source=source, weight=Fraction(count, total))
        for canonical, (raw, count) in canonical_counts.items()
    ]


def find_candidates(text_by_source: Mapping[Source, str], scheme: str) -> list[IdCandidate]:
    """Extract scheme-filtered ID candidates from each source text, weighting
    each candidate by its occurrence share within that source."""
    candidates: list[IdCandidate] = []
    for source, text in text_by_source.items():
        if not text:
            continue
        raw_counts: dict[str, int] = {}
        for raw, _ in _scan(text, scheme):
            raw_counts[raw] = raw_counts.get(raw, 0) + 1
        candidates.extend(candidates_from_counts(raw_counts, Source(source), scheme))
    return candidates


def assign_id(candidates: Iterable[IdCandidate]) -> CertId | None:
    """Merge candidates by canonical string (summing source-weighted weights)
    and pick the winner; ties break to the longest canonical string, then the
    lexicographically smallest. Returns None when there are no candidates."""
    totals: dict[str, Fraction] = {}
    schemes: dict[str, str] = {}
    for cand in candidates:
        totals[cand.canonical] = totals.get(cand.canonical, Fraction(0)) + cand.weight * SOURCE_WEIGHTS[cand.source]
        schemes[cand.canonical] = cand.scheme
    if not totals:
        return None
    best = min(totals, key=lambda c: (-totals[c], -len(c), c))
    return canonicalize(best, schemes[best])


def detect_collisions(assigned: Mapping[str, CertId | None]) -> dict[str, list[str]]:
    """Record keys sharing one canonical ID (duplicate portal entries)."""
    by_canonical: dict[str, list[str]] = {}
    for key, cert_id in assigned.items():
        if cert_id is not None:
            by_canonical.setdefault(cert_id.canonical, []).append(key)
    return {c: sorted(keys) for c, keys in by_canonical.items() if len(keys) > 1}
