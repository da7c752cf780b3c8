"""Vulnerability analytics over the processed dataset.

Covers the measurement suite: assurance-requirement reconstruction from the
declared assurance field plus document keywords, rank correlations between
assurance levels and vulnerability outcomes (one-sided, testing for negative
association), disclosure-timeline statistics, weakness aggregation, the
maintenance-update cross-check, and the short-validity screen.

Correlation internals use exact rational arithmetic for the coefficient, so
perfectly monotone data yields exactly +/-1.0; p-values for n <= 8 come from
full permutation enumeration and from the t approximation (n - 2 degrees of
freedom) otherwise.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from datetime import date
from fractions import Fraction
from importlib import resources
from typing import Iterable, Mapping, Sequence

from scipy.stats import t as _student_t

from .errors import DegenerateInput
from .ingest import CertRecord
from .vulnmap import CveEntry

SAR_TOKEN = re.compile(
    r"\b(?P<family>(?:ACO|ADV|AGD|ALC|AMA|APE|ASE|ATE|AVA)_[A-Z]{3})(?:\.(?P<level>[1-9]))?\b"
)
EAL_TOKEN = re.compile(r"\bEAL ?(?P<base>[1-7])(?P<plus>\+|\s+augmented)?", re.IGNORECASE)
SAR_RULE_GROUP = "security_assurance_requirement"

DEFAULT_MIN_SUPPORT = 100
DEFAULT_MIN_LEVEL_COUNT = 40
DEFAULT_EXCLUDED_CATEGORIES = ("smartcard",)


@dataclass(frozen=True, order=True)
class SarLevel:
    family: str
    level: int

    def __post_init__(self):
        if not re.fullmatch(r"[A-Z]{3}_[A-Z]{3}", self.family):
            raise ValueError(f"bad SAR family {self.family!r}")
        if self.level < 1:
            raise ValueError(f"bad SAR level {self.level}")


@dataclass(frozen=True)
class EalRank:
    base: int
    augmented: bool

    @property
    def rank(self) -> int:
        # Ordinal over the up-to-14 observed levels: EAL1 < EAL1+ < EAL2 < ...
        return self.base * 2 + (1 if self.augmented else 0)

    def __str__(self) -> str:
        return f"EAL{self.base}{'+' if self.augmented else ''}"


@dataclass(frozen=True)
class SarProfile:
    """Reconstructed assurance requirements of one certificate."""

    sars: dict[str, int]
    conflicts: frozenset[str]
    eal: EalRank | None

    def sar_set(self) -> set[SarLevel]:
        return {SarLevel(f, l) for f, l in self.sars.items()}


def _parse_eal(text: str) -> EalRank | None:
    best: EalRank | None = None
    for m in EAL_TOKEN.finditer(text):
        rank = EalRank(base=int(m["base"]), augmented=bool(m["plus"]))
        if best is None or rank.rank > best.rank:
            best = rank
    return best


def _sar_tokens(strings: Iterable[str]) -> dict[str, set[int]]:
    levels: dict[str, set[int]] = {}
    for s in strings:
        for m in SAR_TOKEN.finditer(s):
            if m["level"]:
                levels.setdefault(m["family"], set()).add(int(m["level"]))
    return levels


def reconstruct_sars(
    record: CertRecord,
    st_features: Mapping[str, Mapping[str, int]] | None,
    cr_features: Mapping[str, Mapping[str, int]] | None,
) -> SarProfile:
    """Merge SAR levels from the declared assurance field, Security Target
    keywords, and Certification Report keywords. Disagreeing levels keep the
    maximum and flag the family as conflicted."""
    sources: list[dict[str, set[int]]] = []
    declared = record.declared_eal or ""
    sources.append(_sar_tokens([declared]))
    for features in (st_features, cr_features):
        if features:
            sources.append(_sar_tokens((features.get(SAR_RULE_GROUP) or {}).keys()))

    merged: dict[str, int] = {}
    conflicts: set[str] = set()
    for source in sources:
        for family, levels in source.items():
            seen = set(levels)
            if family in merged:
                seen.add(merged[family])
            if len(seen) > 1:
                conflicts.add(family)
            merged[family] = max(seen)

    eal = _parse_eal(declared)
    if eal is None:
        for features in (st_features, cr_features):
            if features:
                for matched in (features.get("evaluation_level") or {}):
                    candidate = _parse_eal(matched)
                    if candidate and (eal is None or candidate.rank > eal.rank):
                        eal = candidate
    return SarProfile(sars=merged, conflicts=frozenset(conflicts), eal=eal)


# --- Spearman rank correlation ---------------------------------------------


def _average_ranks(values: Sequence[float]) -> list[Fraction]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [Fraction(0)] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = Fraction(i + j + 2, 2)  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _centered(ranks: Sequence[Fraction]) -> list[Fraction]:
    mean = sum(ranks) / len(ranks)
    return [r - mean for r in ranks]


def _rho_exact(cx: Sequence[Fraction], cy: Sequence[Fraction]) -> tuple[float, Fraction, int]:
    """Returns (rho, rho_squared, sign); exact +/-1.0 on perfectly monotone data."""
    cov = sum(a * b for a, b in zip(cx, cy))
    vx = sum(a * a for a in cx)
    vy = sum(b * b for b in cy)
    if vx == 0 or vy == 0:
        raise DegenerateInput("constant input vector: correlation undefined")
    rho2 = cov * cov / (vx * vy)
    sign = 1 if cov > 0 else (-1 if cov < 0 else 0)
    if rho2 == 1:
        return float(sign), rho2, sign
    return sign * math.sqrt(float(rho2)), rho2, sign


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman's rho alone (average-tied ranks), without a p-value."""
    n = len(x)
    if n != len(y) or n < 3:
        raise ValueError("need two equal-length vectors with at least 3 entries")
    cx = _centered(_average_ranks(x))
    cy = _centered(_average_ranks(y))
    return _rho_exact(cx, cy)[0]


def spearman(
    x: Sequence[float], y: Sequence[float], alternative: str = "less"
) -> tuple[float, float]:
    """Spearman's rho over average-tied ranks with a one-sided p-value for
    the alternative "the variables are negatively correlated".

    For n <= 8 the p-value is exact, from full enumeration of rank
    permutations; for larger n it uses the t approximation with n - 2
    degrees of freedom.
    """
    if alternative != "less":
        raise ValueError(f"unsupported alternative {alternative!r}")
    n = len(x)
    if n != len(y) or n < 3:
        raise ValueError("need two equal-length vectors with at least 3 entries")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    cx = _centered(rx)
    cy = _centered(ry)
    rho, rho2, sign = _rho_exact(cx, cy)

    if n <= 8:
        # The rank variance is permutation-invariant, so comparing rho values
        # reduces to comparing covariances, which stays exact in rationals.
        cov_obs = sum(a * b for a, b in zip(cx, cy))
        at_most = 0
        total = 0
        for perm in itertools.permutations(cy):
            total += 1
            if sum(a * b for a, b in zip(cx, perm)) <= cov_obs:
                at_most += 1
        return rho, float(Fraction(at_most, total))

    if rho2 == 1:
        return rho, (0.0 if sign < 0 else 1.0)
    t_stat = rho * math.sqrt((n - 2) / (1 - rho * rho))
    return rho, float(_student_t.cdf(t_stat, n - 2))


# --- dataset view -----------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    """Immutable analysis view: records joined with their matched CVEs and
    reconstructed assurance profiles, pinned to one snapshot date."""

    records: tuple[CertRecord, ...]
    matches: dict[str, frozenset[str]]
    cve_by_id: dict[str, CveEntry]
    profiles: dict[str, SarProfile]
    snapshot_date: date

    def record_cves(self, record: CertRecord) -> list[CveEntry]:
        ids = self.matches.get(record.record_key, frozenset())
        return [self.cve_by_id[i] for i in sorted(ids) if i in self.cve_by_id]

    def validity_end(self, record: CertRecord) -> date:
        return record.expiry_date or self.snapshot_date

    def cves_during_validity(self, record: CertRecord) -> list[CveEntry]:
        end = self.validity_end(record)
        return [
            cve
            for cve in self.record_cves(record)
            if record.cert_date <= cve.published < end
        ]


def build_dataset(
    records: Iterable[CertRecord],
    matches: Mapping[str, Iterable[str]],
    cves: Iterable[CveEntry],
    profiles: Mapping[str, SarProfile],
    snapshot_date: date,
    exclude_categories: tuple[str, ...] = DEFAULT_EXCLUDED_CATEGORIES,
) -> Dataset:
    """Assemble the analysis view, dropping excluded categories (by default
    the smartcard category, whose CVE coverage in the NVD is known-sparse)."""

    def excluded(record: CertRecord) -> bool:
        squashed = re.sub(r"[^a-z0-9]", "", record.category.lower())
        return any(token in squashed for token in exclude_categories)

    kept = tuple(r for r in records if not excluded(r))
    return Dataset(
        records=kept,
        matches={k: frozenset(v) for k, v in matches.items()},
        cve_by_id={c.id: c for c in cves},
        profiles=dict(profiles),
        snapshot_date=snapshot_date,
    )


# --- measurements -----------------------------------------------------------


@dataclass(frozen=True)
class TimelineStats:
    frac_before_cert: float
    frac_after_cert: float
    frac_during_validity: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.frac_before_cert, self.frac_after_cert, self.frac_during_validity)


def timeline_stats(dataset: Dataset) -> TimelineStats:
    """Fractions of (certificate, CVE) pairs disclosed before/after the
    certification date, and within the validity period (open-ended validity
    is closed at the snapshot date). Zero pairs yields all-zero stats."""
    before = after = during = 0
    for record in dataset.records:
        end = dataset.validity_end(record)
        for cve in dataset.record_cves(record):
            if cve.published < record.cert_date:
                before += 1
            else:
                after += 1
            if record.cert_date <= cve.published < end:
                during += 1
    total = before + after
    if total == 0:
        return TimelineStats(0.0, 0.0, 0.0)
    frac_before = float(Fraction(before, total))
    return TimelineStats(
        frac_before_cert=frac_before,
        frac_after_cert=1.0 - frac_before,
        frac_during_validity=float(Fraction(during, total)),
    )


def day_offsets(dataset: Dataset) -> list[int]:
    """Raw per-pair day offsets of CVE disclosure relative to certification,
    so any timeline binning can be applied downstream."""
    offsets = []
    for record in dataset.records:
        for cve in dataset.record_cves(record):
            offsets.append((cve.published - record.cert_date).days)
    return sorted(offsets)


def _load_cwe_names() -> dict[str, str]:
    table = {}
    data = resources.files("certlab.data").joinpath("cwe_names.txt").read_text("utf-8")
    for line in data.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cwe_id, _, name = line.partition("|")
        table[cwe_id] = name
    return table


CWE_NAMES = _load_cwe_names()


def cwe_table(dataset: Dataset) -> list[tuple[str, str, int]]:
    """Distinct CVEs per weakness over all matched certificates, descending."""
    cve_ids: set[str] = set()
    for record in dataset.records:
        cve_ids.update(c.id for c in dataset.record_cves(record))
    counts: dict[str, set[str]] = {}
    for cve_id in cve_ids:
        for cwe in dataset.cve_by_id[cve_id].cwe_ids:
            counts.setdefault(cwe, set()).add(cve_id)
    rows = [
        (cwe, CWE_NAMES.get(cwe, "Unknown"), len(ids))
        for cwe, ids in counts.items()
    ]
    rows.sort(key=lambda r: (-r[2], int(r[0].split("-")[1])))
    return rows


@dataclass(frozen=True)
class CorrelationResult:
    variable: str
    rho_cve_count: float
    p_cve_count: float
    rho_base_score: float
    p_base_score: float
    support: int
    domain_range: int

    @property
    def significant_cve_count(self) -> bool:
        return self.p_cve_count < 0.01

    @property
    def significant_base_score(self) -> bool:
        return self.p_base_score < 0.01

    def to_dict(self) -> dict:
        return {
            "variable": self.variable,
            "rho_cve_count": self.rho_cve_count,
            "p_cve_count": self.p_cve_count,
            "significant_cve_count": self.significant_cve_count,
            "rho_base_score": self.rho_base_score,
            "p_base_score": self.p_base_score,
            "significant_base_score": self.significant_base_score,
            "support": self.support,
            "domain_range": self.domain_range,
        }


def _variable_levels(dataset: Dataset) -> dict[str, list[tuple[CertRecord, int]]]:
    """(record, level) pairs per variable: every SAR family plus EAL."""
    out: dict[str, list[tuple[CertRecord, int]]] = {}
    for record in dataset.records:
        profile = dataset.profiles.get(record.record_key)
        if profile is None:
            continue
        for family, level in profile.sars.items():
            out.setdefault(family, []).append((record, level))
        if profile.eal is not None:
            out.setdefault("EAL", []).append((record, profile.eal.rank))
    return out


def correlate_all(
    dataset: Dataset,
    min_support: int = DEFAULT_MIN_SUPPORT,
    min_level_count: int = DEFAULT_MIN_LEVEL_COUNT,
) -> list[CorrelationResult]:
    """Correlate every sufficiently supported, sufficiently diverse variable
    (SAR family or EAL) against the per-certificate CVE count during validity
    and the average CVE base score.

    Support/diversity filters count vulnerable certificates: a variable needs
    more than min_support of them, spread over at least two levels each held
    by more than min_level_count. The CVE-count association uses every
    certificate carrying the variable (zero counts included; its sample size
    is reported as the support); the base-score association uses the subset
    with at least one CVE during validity.
    """
    results: list[CorrelationResult] = []
    for variable, pairs in sorted(_variable_levels(dataset).items()):
        vulnerable = [
            (record, level)
            for record, level in pairs
            if dataset.cves_during_validity(record)
        ]
        if len(vulnerable) <= min_support:
            continue
        level_counts: dict[int, int] = {}
        for _, level in vulnerable:
            level_counts[level] = level_counts.get(level, 0) + 1
        diverse_levels = [l for l, c in level_counts.items() if c > min_level_count]
        if len(diverse_levels) < 2:
            continue

        levels = [float(level) for _, level in pairs]
        counts = [float(len(dataset.cves_during_validity(record))) for record, _ in pairs]
        score_pairs = [
            (float(level), _mean(c.base_score for c in dataset.cves_during_validity(record)))
            for record, level in vulnerable
        ]
        try:
            rho_count, p_count = spearman(levels, counts)
            rho_score, p_score = spearman(
                [l for l, _ in score_pairs], [s for _, s in score_pairs]
            )
        except (DegenerateInput, ValueError):
            continue
        results.append(
            CorrelationResult(
                variable=variable,
                rho_cve_count=rho_count,
                p_cve_count=p_count,
                rho_base_score=rho_score,
                p_base_score=p_score,
                support=len(pairs),
                domain_range=len({l for _, l in pairs}),
            )
        )
    return results


def _mean(values: Iterable[float]) -> float:
    seq = list(values)
    return sum(seq) / len(seq)


@dataclass(frozen=True)
class MaintenanceFlag:
    record_key: str
    update_date: date
    cve_ids: tuple[str, ...]
    pre_certification_cve_ids: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "record_key": self.record_key,
            "update_date": self.update_date.isoformat(),
            "cve_ids": list(self.cve_ids),
            "pre_certification_cve_ids": list(self.pre_certification_cve_ids),
        }


def maintenance_cve_screen(dataset: Dataset) -> list[MaintenanceFlag]:
    """Maintenance updates preceded by CVE disclosures: for each update, the
    CVEs published between certification and the update, plus those already
    public before certification. Emitted for manual review."""
    flags: list[MaintenanceFlag] = []
    for record in dataset.records:
        cves = dataset.record_cves(record)
        if not cves:
            continue
        for update in record.maintenance_updates:
            in_window = tuple(
                c.id for c in cves if record.cert_date <= c.published < update.update_date
            )
            pre_cert = tuple(
                c.id for c in cves if c.published < min(record.cert_date, update.update_date)
            )
            if in_window or pre_cert:
                flags.append(
                    MaintenanceFlag(
                        record_key=record.record_key,
                        update_date=update.update_date,
                        cve_ids=in_window,
                        pre_certification_cve_ids=pre_cert,
                    )
                )
    flags.sort(key=lambda f: (f.record_key, f.update_date))
    return flags


def short_validity_screen(
    dataset: Dataset, max_days: int = 365
) -> list[tuple[str, int, bool]]:
    """Certificates valid strictly less than max_days, annotated with whether
    any CVE maps to them at all."""
    rows = []
    for record in dataset.records:
        if record.expiry_date is None:
            continue
        validity_days = (record.expiry_date - record.cert_date).days
        if validity_days < max_days:
            rows.append((record.record_key, validity_days, bool(dataset.record_cves(record))))
    rows.sort()
    return rows


def build_report(
    dataset: Dataset,
    min_support: int = DEFAULT_MIN_SUPPORT,
    min_level_count: int = DEFAULT_MIN_LEVEL_COUNT,
    short_validity_max_days: int = 365,
) -> dict:
    """Assemble the full JSON-ready analytics report."""
    stats = timeline_stats(dataset)
    return {
        "header": {
            "snapshot_date": dataset.snapshot_date.isoformat(),
            "records_analyzed": len(dataset.records),
            "min_support": min_support,
            "min_level_count": min_level_count,
            "support_semantics": (
                "support counts certificates carrying the variable (zero CVE counts "
                "included); the base-score association uses the vulnerable subset"
            ),
        },
        "timeline": {
            "frac_before_cert": stats.frac_before_cert,
            "frac_after_cert": stats.frac_after_cert,
            "frac_during_validity": stats.frac_during_validity,
            "day_offsets": day_offsets(dataset),
        },
        "cwe_table": [
            {"cwe_id": cwe, "name": name, "cve_count": count}
            for cwe, name, count in cwe_table(dataset)
        ],
        "correlations": [r.to_dict() for r in correlate_all(dataset, min_support, min_level_count)],
        "maintenance_screen": [f.to_dict() for f in maintenance_cve_screen(dataset)],
        "short_validity": [
            {"record_key": key, "validity_days": days, "has_cve": has_cve}
            for key, days, has_cve in short_validity_screen(dataset, short_validity_max_days)
        ],
    }
