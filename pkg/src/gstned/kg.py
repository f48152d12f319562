"""In-memory knowledge graph: TSV loading, validation and adjacency lookup."""

from __future__ import annotations

import hashlib
import logging
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import IntegrityError, LookupFailure, ParseError

log = logging.getLogger(__name__)

NODES_HEADER = ("id", "label", "aliases")
EDGES_HEADER = ("src", "dst")


def normalize_surface(s: str) -> str:
    """Lowercase, NFC-compose and collapse whitespace."""
    return " ".join(unicodedata.normalize("NFC", s).lower().split())


@dataclass(frozen=True)
class EntityNode:
    id: str
    label: str
    aliases: tuple[str, ...] = ()

    def surfaces(self) -> tuple[str, ...]:
        return (self.label, *self.aliases)


def _clean_aliases(label: str, aliases: Iterable[str]) -> tuple[str, ...]:
    seen = {normalize_surface(label)}
    out = []
    for a in aliases:
        key = normalize_surface(a)
        if not key or key in seen:
            continue
        seen.add(key)
        out.append(a)
    return tuple(out)


@dataclass
class KnowledgeGraph:
    """Undirected, unweighted entity graph.

    ``edges`` holds each edge once as a sorted ``(a, b)`` tuple. Treat the
    object as immutable once built.
    """

    nodes: dict[str, EntityNode]
    edges: frozenset[tuple[str, str]]
    dropped_edges: int = 0
    _adj: dict[str, tuple[str, ...]] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        adj: dict[str, list[str]] = {v: [] for v in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        self._adj = {v: tuple(sorted(ns)) for v, ns in adj.items()}

    @classmethod
    def from_records(
        cls,
        nodes: Iterable[EntityNode | tuple],
        edges: Iterable[tuple[str, str]],
    ) -> "KnowledgeGraph":
        table: dict[str, EntityNode] = {}
        for rec in nodes:
            if not isinstance(rec, EntityNode):
                nid, label, *rest = rec
                rec = EntityNode(nid, label, tuple(rest[0]) if rest else ())
            if not rec.id:
                raise IntegrityError("empty entity id")
            if not rec.label.strip():
                raise IntegrityError(f"entity {rec.id!r} has an empty label")
            if rec.id in table:
                raise IntegrityError(f"duplicate entity id {rec.id!r}")
            table[rec.id] = EntityNode(rec.id, rec.label, _clean_aliases(rec.label, rec.aliases))
        kept: set[tuple[str, str]] = set()
        dropped = 0
        for a, b in edges:
            for end in (a, b):
                if end not in table:
                    raise IntegrityError(f"edge ({a}, {b}) references unknown entity {end!r}")
            pair = (a, b) if a < b else (b, a)
            if a == b or pair in kept:
                dropped += 1
                continue
            kept.add(pair)
        if dropped:
            log.warning("dropped %d self-loop or duplicate edge(s)", dropped)
        return cls(table, frozenset(kept), dropped)

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, v: str) -> bool:
        return v in self.nodes

    def neighbors(self, v: str) -> list[str]:
        try:
            return list(self._adj[v])
        except KeyError:
            raise LookupFailure(f"unknown entity {v!r}") from None

    def adjacency(self) -> Mapping[str, tuple[str, ...]]:
        return self._adj

    def label(self, v: str) -> str:
        try:
            return self.nodes[v].label
        except KeyError:
            raise LookupFailure(f"unknown entity {v!r}") from None

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for nid in sorted(self.nodes):
            n = self.nodes[nid]
            h.update("\t".join((n.id, n.label, "|".join(n.aliases))).encode())
            h.update(b"\n")
        h.update(b"--\n")
        for a, b in sorted(self.edges):
            h.update(f"{a}\t{b}\n".encode())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges


def neighbors(kg: KnowledgeGraph, v: str) -> list[str]:
    return kg.neighbors(v)


def _read_tsv(path: Path, header: tuple[str, ...]):
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline().rstrip("\r\n")
        if tuple(first.split("\t")) != header:
            raise ParseError(path, 1, f"expected header {'<TAB>'.join(header)!r}, got {first!r}")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != len(header):
                raise ParseError(path, lineno, f"expected {len(header)} fields, got {len(parts)}")
            yield lineno, parts


def load_kg(nodes_path: str | Path, edges_path: str | Path) -> KnowledgeGraph:
    """Load the node/edge TSV pair.

    Self-loops and repeated edges are dropped (and counted); an edge naming
    an unknown entity raises :class:`IntegrityError`.
    """
    nodes_path, edges_path = Path(nodes_path), Path(edges_path)
    for p in (nodes_path, edges_path):
        if not p.is_file():
            raise FileNotFoundError(f"no such file: {p}")
    records = []
    seen = set()
    for lineno, (nid, label, aliases) in _read_tsv(nodes_path, NODES_HEADER):
        if not nid:
            raise ParseError(nodes_path, lineno, "empty id")
        if not label.strip():
            raise ParseError(nodes_path, lineno, f"empty label for {nid!r}")
        if nid in seen:
            raise ParseError(nodes_path, lineno, f"duplicate id {nid!r}")
        seen.add(nid)
        records.append(EntityNode(nid, label, tuple(a for a in aliases.split("|") if a)))
    edges = []
    for lineno, (a, b) in _read_tsv(edges_path, EDGES_HEADER):
        for end in (a, b):
            if end not in seen:
                raise IntegrityError(f"{edges_path}:{lineno}: unknown entity {end!r}")
        edges.append((a, b))
    return KnowledgeGraph.from_records(records, edges)


def write_kg(kg: KnowledgeGraph, nodes_path: str | Path, edges_path: str | Path) -> None:
    with open(nodes_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(NODES_HEADER) + "\n")
        for nid in sorted(kg.nodes):
            n = kg.nodes[nid]
            fh.write(f"{n.id}\t{n.label}\t{'|'.join(n.aliases)}\n")
    with open(edges_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(EDGES_HEADER) + "\n")
        for a, b in sorted(kg.edges):
            fh.write(f"{a}\t{b}\n")
