"""String-similarity metrics for CPE matching.

Distances count character insertions and deletions only (no substitutions),
so the distance between two strings equals ``len(a) + len(b) - 2 * LCS(a, b)``.
Similarities are scaled to [0, 100]. The "partial" variants align the shorter
string against every same-length character window of the longer one and keep
the best window score.

All scores are computed as exact rationals internally and reported rounded
to 2 decimal places. Every function here is pure and thread-safe.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

_ALNUM_TOKEN = re.compile(r"[0-9A-Za-z]+")
# Version-ish tokens keep their internal dots; everything else drops punctuation.
_DIGIT = re.compile(r"\d")
_NON_WORD_DOT = re.compile(r"[^0-9A-Za-z.]+")
_NON_WORD = re.compile(r"[^0-9A-Za-z]+")


def indel_distance(a: str, b: str) -> int:
    """Minimal number of character insertions plus deletions turning a into b."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    # Two-row LCS table; distance = len(a) + len(b) - 2 * LCS.
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0]
        for j, cb in enumerate(b, start=1):
            if ca == cb:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return len(a) + len(b) - 2 * prev[-1]


def _similarity_fraction(a: str, b: str) -> Fraction:
    """Normalized indel similarity in [0, 100] as an exact rational."""
    total = len(a) + len(b)
    if total == 0:
        return Fraction(100)
    return 100 * (1 - Fraction(indel_distance(a, b), total))


def indel_similarity(a: str, b: str) -> float:
    """Normalized indel similarity, 100 for two empty strings."""
    return _round_score(_similarity_fraction(a, b))


def _round_score(score: Fraction) -> float:
    return float(round(score, 2))


def _best_alignment_fraction(a: str, b: str) -> Fraction:
    """Best window score of the shorter string slid over the longer one.

    An empty shorter string against a nonempty longer one scores 0: aligning
    nothing is meaningless. Two empty strings score 100.
    """
    shorter, longer = (a, b) if len(a) <= len(b) else (b, a)
    if not longer:
        return Fraction(100)
    if not shorter:
        return Fraction(0)
    best = Fraction(0)
    for start in range(len(longer) - len(shorter) + 1):
        window = longer[start : start + len(shorter)]
        best = max(best, _similarity_fraction(shorter, window))
        if best == 100:
            break
    return best


def partial_ratio(a: str, b: str) -> float:
    """Best-alignment normalized indel similarity of the raw strings."""
    return _round_score(_best_alignment_fraction(a, b))


def _sort_tokens(s: str) -> str:
    return " ".join(sorted(s.split()))


def partial_token_sort_ratio(a: str, b: str) -> float:
    """Best-alignment similarity after sorting each string's words.

    Word order never matters: both strings are split on whitespace, their
    tokens sorted, and the rejoined strings compared by the sliding-window
    alignment.
    """
    return _round_score(_best_alignment_fraction(_sort_tokens(a), _sort_tokens(b)))


def _rebuild_from_sets(tokens_a: set[str], tokens_b: set[str]) -> tuple[str, str]:
    common = sorted(tokens_a & tokens_b)
    rebuilt_a = " ".join(common + sorted(tokens_a - tokens_b))
    rebuilt_b = " ".join(common + sorted(tokens_b - tokens_a))
    return rebuilt_a.strip(), rebuilt_b.strip()


def partial_token_set_ratio(a: str, b: str) -> float:
    """Best-alignment similarity of the set-rebuilt strings.

    Alphanumeric tokens of each string are treated as sets; each string is
    rebuilt as the sorted intersection followed by its sorted remainder, and
    the rebuilt pair is compared by the sliding-window alignment. Duplicate
    tokens therefore collapse, and any shared vocabulary aligns perfectly.
    """
    tokens_a = set(_ALNUM_TOKEN.findall(a))
    tokens_b = set(_ALNUM_TOKEN.findall(b))
    rebuilt_a, rebuilt_b = _rebuild_from_sets(tokens_a, tokens_b)
    return _round_score(_best_alignment_fraction(rebuilt_a, rebuilt_b))


def combined_similarity(a: str, b: str) -> float:
    """Maximum of the token-sort and token-set partial ratios."""
    return max(partial_token_sort_ratio(a, b), partial_token_set_ratio(a, b))


@dataclass(frozen=True)
class NormalizedTitle:
    """Lowercased, punctuation-stripped, lemmatized form of a product title."""

    tokens: tuple[str, ...]

    @property
    def joined(self) -> str:
        return " ".join(self.tokens)


def _load_exceptions() -> dict[str, str]:
    table = {}
    data = resources.files("certlab.data").joinpath("lemma_exceptions.txt").read_text("utf-8")
    for line in data.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        form, base = line.split()
        table[form] = base
    return table


_LEMMA_EXCEPTIONS = _load_exceptions()


def _singularize(word: str) -> str:
    """Plural suffix rules plus the bundled exception table."""
    if word in _LEMMA_EXCEPTIONS:
        return _LEMMA_EXCEPTIONS[word]
    if len(word) > 3 and word.endswith("ies") and not word.endswith(("eies", "aies")):
        return word[:-3] + "y"
    if len(word) > 3 and word.endswith("es") and not word.endswith(("aes", "ees", "oes", "ses")):
        return word[:-1]
    if len(word) > 3 and word.endswith("sses"):
        return word[:-2]
    if len(word) > 2 and word.endswith("s") and not word.endswith(("ss", "us", "is")):
        return word[:-1]
    return word


def lemmatize_title(title: str) -> NormalizedTitle:
    """Lowercase, strip punctuation (keeping dots inside version tokens),
    and reduce plural word forms to their base form."""
    tokens: list[str] = []
    for raw in title.lower().split():
        if _DIGIT.search(raw):
            parts = _NON_WORD_DOT.split(raw)
            tokens.extend(p.strip(".") for p in parts if p.strip("."))
        else:
            parts = _NON_WORD.split(raw)
            tokens.extend(_singularize(p) for p in parts if p)
    return NormalizedTitle(tokens=tuple(tokens))
