"""Directed inter-certificate reference graph and reachability queries.

An edge A -> B means certificate A's artifacts mention certificate B's
canonical ID (in any raw spelling that canonicalizes to it). References are
context-free: no attempt is made to distinguish component relationships from
mere mentions. The graph is immutable after build; queries are read-only and
safe to run concurrently.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .certid import find_all_ids
from .errors import UnknownSeed
from .ingest import DocKind


@dataclass(frozen=True)
class ReferenceGraph:
    nodes: frozenset[str]
    edges: dict[tuple[str, str], frozenset[DocKind]]
    _out: dict[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)
    _in: dict[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for (src, dst) in self.edges:
            if src == dst:
                raise ValueError(f"self-loop on {src!r}")
            if src not in self.nodes or dst not in self.nodes:
                raise ValueError(f"edge ({src!r}, {dst!r}) endpoint not in nodes")
        out: dict[str, list[str]] = {}
        inc: dict[str, list[str]] = {}
        for (src, dst) in sorted(self.edges):
            out.setdefault(src, []).append(dst)
            inc.setdefault(dst, []).append(src)
        object.__setattr__(self, "_out", {k: tuple(v) for k, v in out.items()})
        object.__setattr__(self, "_in", {k: tuple(v) for k, v in inc.items()})

    def successors(self, node: str) -> tuple[str, ...]:
        return self._out.get(node, ())

    def predecessors(self, node: str) -> tuple[str, ...]:
        return self._in.get(node, ())

    def in_degree(self, node: str) -> int:
        return len(self.predecessors(node))

    def out_degree(self, node: str) -> int:
        return len(self.successors(node))

    def to_dict(self) -> dict:
        return {
            "nodes": sorted(self.nodes),
            "edges": [
                {"src": src, "dst": dst, "provenance": sorted(k.value for k in kinds)}
                for (src, dst), kinds in sorted(self.edges.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReferenceGraph":
        edges = {
            (e["src"], e["dst"]): frozenset(DocKind(k) for k in e["provenance"])
            for e in data["edges"]
        }
        return cls(nodes=frozenset(data["nodes"]), edges=edges)


def build_graph(
    id_index: Mapping[str, object],
    texts: Mapping[str, Mapping[DocKind, str]],
) -> ReferenceGraph:
    """Scan every certificate's artifacts for other certificates' IDs.

    id_index maps canonical ID -> record_key (or a list of record keys when
    duplicate portal entries share one ID). texts maps record_key -> artifact
    text by document kind. An edge src -> dst appears when any artifact of a
    certificate with canonical ID src contains an ID canonicalizing to dst;
    provenance collects the document kinds that contained it.
    """
    canonical_of: dict[str, str] = {}
    for canonical, keys in id_index.items():
        if isinstance(keys, str):
            keys = [keys]
        for key in keys:
            canonical_of[key] = canonical

    edge_kinds: dict[tuple[str, str], set[DocKind]] = {}
    for record_key, by_kind in texts.items():
        own = canonical_of.get(record_key)
        if own is None:
            continue
        for kind, text in by_kind.items():
            if not text:
                continue
            for found in find_all_ids(text):
                if found != own and found in id_index:
                    edge_kinds.setdefault((own, found), set()).add(DocKind(kind))

    return ReferenceGraph(
        nodes=frozenset(id_index),
        edges={pair: frozenset(kinds) for pair, kinds in edge_kinds.items()},
    )


def _check_seeds(graph: ReferenceGraph, seeds: Iterable[str]) -> set[str]:
    seed_set = set(seeds)
    unknown = seed_set - graph.nodes
    if unknown:
        raise UnknownSeed(f"not in graph: {sorted(unknown)}")
    return seed_set


def impacted_by(
    graph: ReferenceGraph, seeds: set[str], depth: int | None = None
) -> set[str]:
    """All certificates reaching any seed through reference edges within the
    given depth (unbounded when None), excluding the seeds themselves.

    These are the transitive referencers: everything potentially impacted by
    a vulnerability in the seed certificates.
    """
    seed_set = _check_seeds(graph, seeds)
    found: set[str] = set()
    frontier = deque((s, 0) for s in seed_set)
    visited = set(seed_set)
    while frontier:
        node, dist = frontier.popleft()
        if depth is not None and dist >= depth:
            continue
        for pred in graph.predecessors(node):
            if pred not in visited:
                visited.add(pred)
                found.add(pred)
                frontier.append((pred, dist + 1))
    return found - seed_set


def neighborhood(
    graph: ReferenceGraph, node: str, direction: str = "both", depth: int = 1
) -> ReferenceGraph:
    """Induced subgraph of nodes within depth of the given node along the
    chosen direction ("in", "out" or "both")."""
    if direction not in ("in", "out", "both"):
        raise ValueError(f"bad direction {direction!r}")
    _check_seeds(graph, [node])
    keep = {node}
    frontier = deque([(node, 0)])
    while frontier:
        current, dist = frontier.popleft()
        if dist >= depth:
            continue
        neighbors: tuple[str, ...] = ()
        if direction in ("out", "both"):
            neighbors += graph.successors(current)
        if direction in ("in", "both"):
            neighbors += graph.predecessors(current)
        for nxt in neighbors:
            if nxt not in keep:
                keep.add(nxt)
                frontier.append((nxt, dist + 1))
    edges = {
        (src, dst): kinds
        for (src, dst), kinds in graph.edges.items()
        if src in keep and dst in keep
    }
    return ReferenceGraph(nodes=frozenset(keep), edges=edges)
