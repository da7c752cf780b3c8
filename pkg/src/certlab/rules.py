"""Regex rule engine for keyword extraction from artifact texts.

A rules file declares named groups of regular expressions; running them over
a document yields per-group counts of every matched string. The bundled
default file covers the full category taxonomy (certificate IDs, assurance
levels, crypto algorithms, device identifiers, attacks, standards, ...).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from .errors import RulesParseError

_WHITESPACE_RUN = re.compile(r"\s+")

KNOWN_FLAGS = {"case_insensitive"}


@dataclass(frozen=True)
class RuleGroup:
    name: str
    patterns: tuple[re.Pattern, ...]
    case_insensitive: bool = False

    @property
    def sources(self) -> tuple[str, ...]:
        return tuple(p.pattern for p in self.patterns)


@dataclass(frozen=True)
class RuleSet:
    """Immutable, compiled set of rule groups; safe to share across threads."""

    groups: tuple[RuleGroup, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.groups)

    def group_names(self) -> list[str]:
        return [g.name for g in self.groups]

    def __getitem__(self, name: str) -> RuleGroup:
        for g in self.groups:
            if g.name == name:
                return g
        raise KeyError(name)


def _parse_header(line: str, lineno: int) -> tuple[str, bool]:
    name, _, flag_part = line.partition(":")
    name = name.strip()
    if not name or not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", name):
        raise RulesParseError(f"line {lineno}: invalid group name {name!r}")
    flags = flag_part.split()
    unknown = set(flags) - KNOWN_FLAGS
    if unknown:
        raise RulesParseError(f"line {lineno}: unknown flags {sorted(unknown)}", group=name)
    return name, "case_insensitive" in flags


def parse_rules(text: str) -> RuleSet:
    """Parse rules-file content into a compiled RuleSet."""
    groups: list[RuleGroup] = []
    seen: set[str] = set()
    current_name: str | None = None
    current_flag = False
    current_patterns: list[re.Pattern] = []

    def flush() -> None:
        nonlocal current_name, current_patterns
        if current_name is not None:
            groups.append(
                RuleGroup(current_name, tuple(current_patterns), current_flag)
            )
        current_name = None
        current_patterns = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        if raw[0] not in " \t":
            flush()
            current_name, current_flag = _parse_header(raw, lineno)
            if current_name in seen:
                raise RulesParseError(f"line {lineno}: duplicate group {current_name!r}", group=current_name)
            seen.add(current_name)
        else:
            if current_name is None:
                raise RulesParseError(f"line {lineno}: pattern before any group header")
            source = raw.strip()
            try:
                compiled = re.compile(source, re.IGNORECASE if current_flag else 0)
            except re.error as exc:
                raise RulesParseError(
                    f"group {current_name!r} pattern #{len(current_patterns)}: {exc}",
                    group=current_name,
                    pattern_index=len(current_patterns),
                ) from exc
            current_patterns.append(compiled)
    flush()
    return RuleSet(tuple(groups))


def load_rules(path: str) -> RuleSet:
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read())


def default_rules() -> RuleSet:
    """The bundled rule set covering every category of the taxonomy."""
    data = resources.files("certlab.data").joinpath("rules.txt").read_text("utf-8")
    return parse_rules(data)


def normalize_match(matched: str) -> str:
    """Trim and collapse whitespace runs, merging hyphenation artifacts
    introduced by PDF-to-text conversion."""
    return _WHITESPACE_RUN.sub(" ", matched).strip()


def extract(text: str, rules: RuleSet) -> dict[str, dict[str, int]]:
    """Count every non-overlapping match of every rule, grouped by rule group.

    Returns {group name: {normalized matched string: count}}; groups and
    strings with zero matches are absent.
    """
    out: dict[str, dict[str, int]] = {}
    for group in rules.groups:
        counts: dict[str, int] = {}
        for pattern in group.patterns:
            for m in pattern.finditer(text):
                key = normalize_match(m.group(0))
                if key:
                    counts[key] = counts.get(key, 0) + 1
        if counts:
            out[group.name] = counts
    return out
