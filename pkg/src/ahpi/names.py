"""Canonicalization of noisy entity-name strings.

Raw firm names arrive with OCR damage, hyphenation quirks, and spelled-out
ampersands, so the same firm shows up under several spellings.  We merge
variants with average-linkage agglomerative clustering under Levenshtein
distance: every string starts as its own cluster, and the globally closest
pair of clusters merges while their average pairwise distance stays below
the threshold.  Each raw string is then replaced by its cluster's most
frequent member.

The module also parses "attorney substrings" (the per-party counsel lines
of a case record) into a (role, firm names) tuple, which is where raw firm
names come from in the first place.

Cost note: clustering builds pairwise string distances on demand; worst
case is O(n^2) distance computations, each O(len*len).  Pairs whose length
difference already exceeds the threshold are skipped at the singleton
stage (the length gap is a lower bound on the distance), which keeps the
common case far below the worst case without changing any result.
"""

import heapq
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import InvalidArgumentError

__all__ = [
    "PartyRole",
    "AttorneyTuple",
    "ClusterAssignment",
    "ParseConfig",
    "levenshtein",
    "cluster_distance",
    "agglomerate",
    "parse_attorney_substring",
    "apply_replacements",
]


def levenshtein(a: str, b: str) -> int:
    """Edit distance: minimum single-character insertions/deletions/substitutions."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,  # delete from a
                    current[j - 1] + 1,  # insert into a
                    previous[j - 1] + (ca != cb),  # substitute
                )
            )
        previous = current
    return previous[-1]


def cluster_distance(a: Iterable[str], b: Iterable[str]) -> float:
    """Average pairwise Levenshtein distance between two string sets."""
    a, b = list(a), list(b)
    if not a or not b:
        raise InvalidArgumentError("cluster distance is undefined for empty clusters")
    total = sum(levenshtein(x, y) for x in a for y in b)
    return total / (len(a) * len(b))


@dataclass(frozen=True)
class ClusterAssignment:
    """Raw string -> representative mapping plus the clusters behind it."""

    canonical: dict[str, str]
    clusters: tuple[tuple[tuple[str, ...], tuple[int, ...]], ...]  # (members, frequencies)

    def apply(self, raw: str) -> str:
        return self.canonical.get(raw, raw)


class _Heap:
    """Merge candidates keyed by (distance, pair label), lazily invalidated."""

    def __init__(self):
        self._items: list[tuple[float, tuple[str, str], int, int, int, int]] = []

    def push(self, dist: float, label: tuple[str, str], i: int, vi: int, j: int, vj: int):
        heapq.heappush(self._items, (dist, label, i, vi, j, vj))

    def pop_valid(self, version: dict[int, int]):
        while self._items:
            dist, _label, i, vi, j, vj = heapq.heappop(self._items)
            if version.get(i) == vi and version.get(j) == vj:
                return dist, i, j
        return None


def agglomerate(strings: Mapping[str, int] | Iterable[str], threshold: float) -> ClusterAssignment:
    """Cluster strings whose average-linkage distance stays below ``threshold``.

    Deterministic: at each step the candidate pair with the smallest
    distance merges, ties going to the pair whose (lexicographically
    smallest member of each side, sorted) label is smallest.  The
    representative of a finished cluster is its most frequent member,
    lexicographic order breaking frequency ties.
    """
    if threshold <= 0:
        raise InvalidArgumentError("threshold must be positive")
    freq = Counter(strings) if not isinstance(strings, Mapping) else Counter(dict(strings))
    if any(count <= 0 for count in freq.values()):
        raise InvalidArgumentError("string counts must be positive")
    words = sorted(freq)
    n = len(words)

    lev_cache: dict[tuple[int, int], int] = {}

    def lev(i: int, j: int) -> int:
        key = (i, j) if i < j else (j, i)
        d = lev_cache.get(key)
        if d is None:
            d = levenshtein(words[key[0]], words[key[1]])
            lev_cache[key] = d
        return d

    members: dict[int, tuple[int, ...]] = {i: (i,) for i in range(n)}
    version: dict[int, int] = {i: 0 for i in range(n)}
    next_id = n

    def pair_label(ci: int, cj: int) -> tuple[str, str]:
        a = words[members[ci][0]]
        b = words[members[cj][0]]
        return (a, b) if a <= b else (b, a)

    def distance(ci: int, cj: int) -> float:
        total = sum(lev(x, y) for x in members[ci] for y in members[cj])
        return total / (len(members[ci]) * len(members[cj]))

    heap = _Heap()
    for i in range(n):
        for j in range(i + 1, n):
            # |len gap| lower-bounds the distance; skip hopeless singleton pairs
            if abs(len(words[i]) - len(words[j])) >= threshold:
                continue
            d = lev(i, j)
            if d < threshold:
                heap.push(d, pair_label(i, j), i, 0, j, 0)

    while True:
        popped = heap.pop_valid(version)
        if popped is None:
            break
        _d, ci, cj = popped
        merged = tuple(sorted(members[ci] + members[cj]))
        del members[ci], version[ci]
        del members[cj], version[cj]
        cid = next_id
        next_id += 1
        members[cid] = merged
        version[cid] = 0
        for other in members:
            if other == cid:
                continue
            d = distance(cid, other)
            if d < threshold:
                heap.push(d, pair_label(cid, other), cid, 0, other, version[other])

    clusters = []
    canonical: dict[str, str] = {}
    for cid in sorted(members, key=lambda c: words[members[c][0]]):
        names = tuple(words[i] for i in members[cid])
        counts = tuple(freq[name] for name in names)
        representative = min(names, key=lambda s: (-freq[s], s))
        for name in names:
            canonical[name] = representative
        clusters.append((names, counts))
    return ClusterAssignment(canonical=canonical, clusters=tuple(clusters))


# --- attorney-substring parsing -------------------------------------------

class PartyRole(Enum):
    PLAINTIFF = "plaintiff"
    DEFENDANT = "defendant"
    OTHER = "other"


@dataclass(frozen=True)
class AttorneyTuple:
    """Parsed counsel line: which side it is for, and the firm names on it."""

    role: PartyRole
    role_text: str
    firms: tuple[str, ...]


@dataclass(frozen=True)
class ParseConfig:
    """Tables driving the attorney-substring parser; all extendable."""

    expansions: tuple[tuple[str, str], ...] = (("U.S.", "United States"),)
    keywords: tuple[str, ...] = ("llp", "l.l.p.", "p.a.", "p.c.", "pllc")
    replacements: tuple[tuple[str, str], ...] = (("<&", "&"), (" and ", " & "))


DEFAULT_PARSE_CONFIG = ParseConfig()

_INITIAL = re.compile(r"\b[A-Za-z]\.")
_DIGIT = re.compile(r"\d")


def apply_replacements(name: str, config: ParseConfig = DEFAULT_PARSE_CONFIG) -> str:
    """Lowercase a firm name and apply the OCR/formatting fix table."""
    out = name.lower()
    for old, new in config.replacements:
        out = out.replace(old, new)
    return re.sub(r"\s+", " ", out).strip(" ,.")


def _extract_role(text: str) -> tuple[PartyRole, str]:
    marker = " for "
    pos = text.rfind(marker)
    if pos < 0:
        return PartyRole.OTHER, ""
    tail = text[pos + len(marker):].strip().strip(".,;: ").lower()
    if tail.startswith("plaintiff"):
        return PartyRole.PLAINTIFF, tail
    if tail.startswith("defendant"):
        return PartyRole.DEFENDANT, tail
    return PartyRole.OTHER, tail


def _looks_like_name_part(segment: str) -> bool:
    """Heuristic: comma segments that extend a firm name backward.

    Person names carry single-letter initials ("Robert M. Hayes") and stop
    the walk; so do segments with digits or role markers.
    """
    seg = segment.strip()
    if not seg:
        return False
    if _INITIAL.search(seg) or _DIGIT.search(seg):
        return False
    low = seg.lower()
    if low.startswith("for ") or " for " in f" {low} ":
        return False
    return True


def _strip_connectives(segment: str) -> str:
    words = segment.strip().split()
    while words and words[0].lower() in ("of", "the"):
        words.pop(0)
    return " ".join(words)


def _keyword_in_segment(segment: str, keywords: Sequence[str]) -> str | None:
    normalized = {kw.strip(".,") for kw in keywords}
    low = segment.strip().lower()
    if low.strip(".,") in normalized:
        return low
    for token in low.split():
        if token.strip(".,") in normalized:
            return token
    return None


def parse_attorney_substring(
    text: str, config: ParseConfig = DEFAULT_PARSE_CONFIG
) -> AttorneyTuple | None:
    """Extract (role, firm names) from one counsel line, or None.

    The role is read from the text after the last " for "; firm names come
    from the comma segment containing " & " or from a run of name segments
    ending in a legal-entity keyword ("llp", "p.a.", ...).  Detection runs
    on replacement-fixed shadows of the segments so OCR damage like "<&"
    cannot hide a firm; output names are lowercased, fixed, and deduped.
    Returns ``None`` when no firm can be found, which is an expected
    outcome for oddly formatted lines, not an error.
    """
    expanded = text
    for old, new in config.expansions:
        expanded = expanded.replace(old, new)
    role, role_text = _extract_role(expanded)

    segments = [seg.strip() for seg in expanded.split(",")]
    fixed = [apply_replacements(seg, config) for seg in segments]
    consumed = [False] * len(segments)
    firms: list[str] = []

    for i, seg_fixed in enumerate(fixed):
        keyword = _keyword_in_segment(seg_fixed, config.keywords)
        if keyword is None or consumed[i]:
            continue
        parts: list[str] = []
        remainder = " ".join(
            tok for tok in seg_fixed.split() if tok.strip(".,") != keyword.strip(".,")
        )
        j = i - 1
        while j >= 0 and not consumed[j] and _looks_like_name_part(segments[j]):
            parts.insert(0, fixed[j])
            consumed[j] = True
            j -= 1
        if remainder:
            parts.append(remainder)
        consumed[i] = True
        if parts:
            firms.append(", ".join(_strip_connectives(p) for p in parts if p.strip()))

    for i, seg_fixed in enumerate(fixed):
        if consumed[i] or " & " not in seg_fixed:
            continue
        name = _strip_connectives(seg_fixed)
        if name:
            firms.append(name)
            consumed[i] = True

    cleaned = []
    for firm in firms:
        out = apply_replacements(firm, config)
        if out and out not in cleaned:
            cleaned.append(out)
    if not cleaned:
        return None
    return AttorneyTuple(role=role, role_text=role_text, firms=tuple(cleaned))
