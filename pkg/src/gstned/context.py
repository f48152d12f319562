"""Per-document context graph: hop-limited induced subgraph over the
candidates of every mention, with string-similarity node weights and
embedding-derived edge costs."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .candidates import CandidateSet
from .embeddings import EmbeddingTable, cosine
from .errors import LookupFailure
from .kg import KnowledgeGraph, normalize_surface
from .similarity import jaro_winkler

DEFAULT_MAX_HOPS = 3


@dataclass(frozen=True)
class TerminalGroup:
    mention_id: str
    terminals: frozenset[str]
    singleton_exact: bool = False
    match_scores: Mapping[str, float] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class ContextGraph:
    nodes: frozenset[str]
    edge_cost: Mapping[tuple[str, str], float]
    node_weight: Mapping[str, float]
    groups: tuple[TerminalGroup, ...]

    @property
    def edges(self) -> list[tuple[str, str]]:
        return sorted(self.edge_cost)

    def adjacency(self) -> dict[str, list[tuple[str, float]]]:
        adj: dict[str, list[tuple[str, float]]] = {v: [] for v in self.nodes}
        for (a, b), c in self.edge_cost.items():
            adj[a].append((b, c))
            adj[b].append((a, c))
        for v in adj:
            adj[v].sort()
        return adj

    def group_index(self, mention_id: str) -> int:
        for i, g in enumerate(self.groups):
            if g.mention_id == mention_id:
                return i
        raise LookupFailure(f"no terminal group for mention {mention_id!r}")

    def dump(self) -> str:
        """Plain-text description, stable under re-runs."""
        lines = []
        for v in sorted(self.nodes):
            lines.append(f"node\t{v}\t{self.node_weight.get(v, 0.0):.6f}")
        for (a, b) in sorted(self.edge_cost):
            lines.append(f"edge\t{a}\t{b}\t{self.edge_cost[(a, b)]:.6f}")
        for i, g in enumerate(self.groups):
            flag = "exact" if g.singleton_exact else "fuzzy"
            lines.append(f"group\t{i}\t{g.mention_id}\t{flag}\t{','.join(sorted(g.terminals))}")
        return "\n".join(lines) + "\n"


def make_groups(candidate_sets: Sequence[CandidateSet]) -> tuple[TerminalGroup, ...]:
    return tuple(
        TerminalGroup(
            cs.mention.mention_id,
            frozenset(cs.entities),
            cs.exact_match is not None,
            {c.entity: c.match_score for c in cs.candidates},
        )
        for cs in candidate_sets
        if cs.candidates
    )


def _bfs(kg: KnowledgeGraph, sources, depth: int) -> dict[str, int]:
    dist = {s: 0 for s in sources}
    queue = deque(dist)
    while queue:
        v = queue.popleft()
        d = dist[v]
        if d == depth:
            continue
        for u in kg.neighbors(v):
            if u not in dist:
                dist[u] = d + 1
                queue.append(u)
    return dist


def _two_best(per_group: dict[int, int]) -> list[tuple[int, int]]:
    return sorted((d, g) for g, d in per_group.items())[:2]


def _cross_min(a: list[tuple[int, int]], b: list[tuple[int, int]]) -> float:
    best = float("inf")
    for da, ga in a:
        for db, gb in b:
            if ga != gb:
                best = min(best, da + db)
    return best


def induce_subgraph(
    kg: KnowledgeGraph,
    candidate_sets: Sequence[CandidateSet],
    max_hops: int = DEFAULT_MAX_HOPS,
) -> ContextGraph:
    """Unweighted skeleton (unit edge costs, zero node weights).

    Keeps every terminal, plus each node ``u`` with
    ``dist(a, u) + dist(u, b) <= max_hops`` for terminals ``a``, ``b`` of
    different groups, plus every KG edge ``(u, v)`` that sits on such a walk.
    """
    groups = make_groups(candidate_sets)
    if not groups:
        raise ValueError("need at least one candidate set with candidates")
    per_node: dict[str, dict[int, int]] = {}
    for gi, g in enumerate(groups):
        for v, d in _bfs(kg, sorted(g.terminals), max_hops).items():
            per_node.setdefault(v, {})[gi] = d
    best = {v: _two_best(pg) for v, pg in per_node.items()}
    terminals = set().union(*(g.terminals for g in groups))
    nodes = set(terminals)
    for v, b in best.items():
        if len(b) == 2 and b[0][0] + b[1][0] <= max_hops:
            nodes.add(v)
    edges = {}
    for u in nodes:
        for v in kg.neighbors(u):
            if v <= u or v not in nodes:
                continue
            bu, bv = best.get(u, []), best.get(v, [])
            if min(_cross_min(bu, bv), _cross_min(bv, bu)) + 1 <= max_hops:
                edges[(u, v)] = 1.0
    return ContextGraph(frozenset(nodes), edges, {v: 0.0 for v in nodes}, groups)


def weight_graph(
    skeleton: ContextGraph,
    emb: EmbeddingTable,
    candidate_sets: Sequence[CandidateSet],
    kg: KnowledgeGraph,
    use_matched_alias: bool = False,
) -> ContextGraph:
    """Edge cost ``1 - max(0, cos)``; node weight = best Jaro-Winkler score of
    the entity label against any mention it is a candidate for (0 for
    connector nodes)."""
    for v in sorted(skeleton.nodes):
        if v not in emb:
            raise LookupFailure(f"no embedding for entity {v!r}")
    costs = {
        (a, b): 1.0 - max(0.0, cosine(emb[a], emb[b])) for (a, b) in skeleton.edge_cost
    }
    weights = {v: 0.0 for v in skeleton.nodes}
    for cs in candidate_sets:
        surface = normalize_surface(cs.mention.surface)
        for c in cs.candidates:
            if c.entity not in weights:
                continue
            name = c.matched_string if use_matched_alias else kg.label(c.entity)
            w = jaro_winkler(normalize_surface(name), surface)
            weights[c.entity] = max(weights[c.entity], w)
    return replace(skeleton, edge_cost=costs, node_weight=weights)


def build_context_graph(
    kg: KnowledgeGraph,
    emb: EmbeddingTable,
    candidate_sets: Sequence[CandidateSet],
    max_hops: int = DEFAULT_MAX_HOPS,
    use_matched_alias: bool = False,
) -> ContextGraph:
    skeleton = induce_subgraph(kg, candidate_sets, max_hops)
    return weight_graph(skeleton, emb, candidate_sets, kg, use_matched_alias)
