"""Top-k Group Steiner Trees by dynamic programming over (root, covered-groups)
states.

A partial tree is grown along an edge (the far endpoint becomes the new
root) or merged with another partial tree at the same root. Partial trees
leave the frontier in ascending ``cost + bound``, where ``bound`` is the
exact group Steiner lower bound for connecting the root to the still
uncovered groups (computed once per graph by the classic 1-best DP). The
bound is consistent, so complete trees come out in ascending cost.

An answer is a node set that induces a connected subgraph, touches every
group, and has no proper subset with the same two properties. Its tree is
the cheapest spanning tree of that set. Every spanning tree of such a set
has each leaf as the only representative of some group, so partial trees
violating that are dropped early.
"""

from __future__ import annotations

import heapq
import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .context import ContextGraph, TerminalGroup
from .errors import SolverError

DEFAULT_K = 10
MAX_GROUPS = 14
BRUTE_FORCE_LIMIT = 16


@dataclass(frozen=True)
class SteinerTree:
    nodes: frozenset[str]
    edges: tuple[tuple[str, str], ...]
    cost: float
    chosen: Mapping[int, str]

    @property
    def groups(self) -> frozenset[int]:
        return frozenset(self.chosen)

    def sort_key(self):
        return (self.cost, tuple(sorted(self.nodes)))


@dataclass
class GstSolution:
    trees: list[SteinerTree]
    groups_solved: list[int]
    unsolvable: list[int] = field(default_factory=list)
    complete: bool = True
    stats: dict = field(default_factory=dict)

    @property
    def costs(self) -> list[float]:
        return [t.cost for t in self.trees]


def _check_input(g: ContextGraph, k: int) -> None:
    if k < 1:
        raise SolverError(f"k must be >= 1, got {k}")
    for (a, b), c in g.edge_cost.items():
        if not c >= 0.0:
            raise SolverError(f"negative or NaN edge cost {c} on ({a}, {b})")
    for i, grp in enumerate(g.groups):
        if not grp.terminals:
            raise SolverError(f"group {i} ({grp.mention_id}) is empty")
        missing = grp.terminals - g.nodes
        if missing:
            raise SolverError(f"group {i} terminals not in graph: {sorted(missing)}")


def tree_cost(edges, edge_cost: Mapping[tuple[str, str], float]) -> float:
    return math.fsum(edge_cost[e] for e in edges)


def _components(g: ContextGraph) -> list[frozenset[str]]:
    adj = g.adjacency()
    seen: set[str] = set()
    comps = []
    for s in sorted(g.nodes):
        if s in seen:
            continue
        comp = {s}
        stack = [s]
        while stack:
            v = stack.pop()
            for u, _ in adj[v]:
                if u not in comp:
                    comp.add(u)
                    stack.append(u)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


class _Problem:
    """Integer-indexed view of one connected component."""

    def __init__(self, g: ContextGraph, nodes: frozenset[str], group_ids: Sequence[int]):
        self.ids = sorted(nodes)
        self.index = {v: i for i, v in enumerate(self.ids)}
        self.n = len(self.ids)
        self.group_ids = list(group_ids)
        self.L = len(group_ids)
        self.full = (1 << self.L) - 1
        self.gmask = [0] * self.n
        for bit, gi in enumerate(group_ids):
            for t in g.groups[gi].terminals:
                if t in self.index:
                    self.gmask[self.index[t]] |= 1 << bit
        self.adj: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        self.cost: dict[tuple[int, int], float] = {}
        for (a, b), c in g.edge_cost.items():
            if a in self.index and b in self.index:
                i, j = self.index[a], self.index[b]
                self.adj[i].append((j, c))
                self.adj[j].append((i, c))
                self.cost[(i, j) if i < j else (j, i)] = c
        for lst in self.adj:
            lst.sort()
        self.nbrs = [frozenset(u for u, _ in lst) for lst in self.adj]

    def _dijkstra(self, dist: np.ndarray) -> np.ndarray:
        dist = dist.copy()
        heap = [(float(d), v) for v, d in enumerate(dist) if d < math.inf]
        heapq.heapify(heap)
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist[v]:
                continue
            for u, c in self.adj[v]:
                nd = d + c
                if nd < dist[u]:
                    dist[u] = nd
                    heapq.heappush(heap, (nd, u))
        return dist

    def lower_bounds(self) -> np.ndarray:
        """``D[mask][v]``: cheapest connected structure containing ``v`` and
        touching every group in ``mask`` (tree validity ignored)."""
        D = np.full((1 << self.L, self.n), math.inf)
        D[0] = 0.0
        for bit in range(self.L):
            init = np.where([(m >> bit) & 1 for m in self.gmask], 0.0, math.inf)
            D[1 << bit] = self._dijkstra(init)
        for mask in sorted(range(1, 1 << self.L), key=lambda m: (bin(m).count("1"), m)):
            if mask & (mask - 1) == 0:
                continue
            best = np.full(self.n, math.inf)
            sub = (mask - 1) & mask
            while sub:
                if sub < mask ^ sub:
                    best = np.minimum(best, D[sub] + D[mask ^ sub])
                sub = (sub - 1) & mask
            D[mask] = self._dijkstra(best)
        return D

    # -- tree predicates -------------------------------------------------

    def leaves_ok(self, nodes: frozenset[int], edges: frozenset[tuple[int, int]], root: int) -> bool:
        """Every non-root leaf must be the only node in the tree for some group."""
        if len(nodes) == 1:
            return True
        deg = Counter(itertools.chain.from_iterable(edges))
        leaves = [v for v, d in deg.items() if d == 1 and v != root]
        if not leaves:
            return True
        once = twice = 0
        for v in nodes:
            m = self.gmask[v]
            if m:
                twice |= once & m
                once |= m
        sole = once & ~twice
        return all(self.gmask[v] & sole for v in leaves)

    def cover(self, nodes) -> int:
        m = 0
        for v in nodes:
            m |= self.gmask[v]
        return m

    def connected(self, nodes: set[int]) -> bool:
        if not nodes:
            return False
        start = next(iter(nodes))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for u in self.nbrs[v]:
                if u in nodes and u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == len(nodes)

    def node_minimal(self, nodes: frozenset[int]) -> bool:
        # a smaller connected cover exists iff dropping one node leaves one
        for v in nodes:
            rest = set(nodes)
            rest.discard(v)
            if rest and self.cover(rest) == self.full and self.connected(rest):
                return False
        return True


def _search(p: _Problem, k: int, state_cap: Optional[int], stats: dict, max_pops: Optional[int] = None):
    D = p.lower_bounds()
    stats["lower_bound"] = float(D[p.full].min()) if p.n else math.inf
    shrink = 1.0 - 1e-12

    def bound(v: int, cover: int) -> float:
        h = D[p.full ^ cover][v]
        return max(0.0, h * shrink - 1e-12) if h < math.inf else math.inf

    heap: list = []
    items: dict[int, tuple] = {}
    best_cost: dict[tuple[int, frozenset[int]], float] = {}
    closed: set[tuple[int, frozenset[int]]] = set()
    by_root: dict[int, dict[int, list]] = {}
    state_count: dict[tuple[int, int], int] = {}
    seq = itertools.count()
    found: list[tuple[float, tuple[int, ...], frozenset[int], frozenset[tuple[int, int]]]] = []
    seen_answers: set[frozenset[int]] = set()
    stats.update(pops=0, pushes=0, frontier_peak=0, discarded=0, budget_hit=False)

    def push(nodes, edges, root, cover, bits):
        key = (root, nodes)
        if key in closed:
            return
        cost = math.fsum(p.cost[e] for e in edges)
        if best_cost.get(key, math.inf) <= cost:
            return
        f = cost + bound(root, cover)
        if f == math.inf:
            return
        best_cost[key] = cost
        i = next(seq)
        items[i] = (nodes, edges, root, cover, bits)
        heapq.heappush(heap, (f, cost, tuple(sorted(nodes)), root, i))
        stats["pushes"] += 1
        if len(heap) > stats["frontier_peak"]:
            stats["frontier_peak"] = len(heap)

    for v in range(p.n):
        if p.gmask[v]:
            push(frozenset((v,)), frozenset(), v, p.gmask[v], 1 << v)

    while heap:
        if len(found) >= k:
            found.sort(key=lambda t: (t[0], t[1]))
            if found[k - 1][0] < heap[0][0]:
                break
        if max_pops is not None and stats["pops"] >= max_pops:
            # answers popped so far are still the cheapest ones, in order
            stats["budget_hit"] = True
            break
        f, cost, _, root, i = heapq.heappop(heap)
        nodes, edges, _, cover, bits = items.pop(i)
        key = (root, nodes)
        if key in closed or cost > best_cost[key]:
            continue
        if state_cap is not None:
            st = (root, cover)
            if state_count.get(st, 0) >= state_cap:
                stats["discarded"] += 1
                continue
            state_count[st] = state_count.get(st, 0) + 1
        closed.add(key)
        stats["pops"] += 1
        if cover == p.full:
            if nodes not in seen_answers:
                seen_answers.add(nodes)
                if p.node_minimal(nodes):
                    found.append((cost, tuple(p.ids[v] for v in sorted(nodes)), nodes, edges))
            continue
        for u, _ in p.adj[root]:
            if bits >> u & 1:
                continue
            e = (root, u) if root < u else (u, root)
            n2, e2 = nodes | {u}, edges | {e}
            if p.leaves_ok(n2, e2, u):
                push(n2, e2, u, cover | p.gmask[u], bits | 1 << u)
        if len(nodes) > 1:
            buckets = by_root.setdefault(root, {})
            for o_cover, closed_here in buckets.items():
                # if either side's groups are a subset of the other's, that
                # side's leaves are not sole representatives after merging
                if not (o_cover & ~cover and cover & ~o_cover):
                    continue
                only_root = 1 << root
                for o_nodes, o_edges, o_bits in closed_here:
                    if bits & o_bits != only_root:
                        continue
                    n2, e2 = nodes | o_nodes, edges | o_edges
                    if p.leaves_ok(n2, e2, root):
                        push(n2, e2, root, cover | o_cover, bits | o_bits)
            buckets.setdefault(cover, []).append((nodes, edges, bits))
    found.sort(key=lambda t: (t[0], t[1]))
    return found[:k]


def _to_tree(p: _Problem, g: ContextGraph, nodes: frozenset[int], edges) -> SteinerTree:
    names = frozenset(p.ids[v] for v in nodes)
    e = tuple(sorted((p.ids[a], p.ids[b]) for a, b in edges))
    e = tuple((a, b) if a < b else (b, a) for a, b in e)
    chosen = {}
    for gi, grp in enumerate(g.groups):
        hit = sorted(grp.terminals & names)
        if hit:
            chosen[gi] = hit[0]
    return SteinerTree(names, tuple(sorted(e)), tree_cost(e, g.edge_cost), chosen)


def _solve_on(g, comp, group_ids, k, state_cap, stats, max_pops=None):
    p = _Problem(g, comp, group_ids)
    found = _search(p, k, state_cap, stats, max_pops)
    return [_to_tree(p, g, nodes, edges) for _, _, nodes, edges in found]


def solve_topk(
    g: ContextGraph,
    k: int = DEFAULT_K,
    state_cap: Optional[int] = None,
    trace: Optional[list] = None,
    max_pops: Optional[int] = None,
) -> GstSolution:
    """The ``k`` cheapest group Steiner trees of ``g``, ascending by
    ``(cost, sorted node ids)``.

    When no connected component touches every group, each component touching
    at least two groups is solved for the groups it touches and the tree
    lists are merged (up to ``k`` trees per component); groups left without a
    partner are reported in ``unsolvable``.

    ``state_cap`` bounds the partial trees kept per (root, covered) state.
    It speeds up large instances but forfeits the exactness guarantee.
    ``max_pops`` stops the search after that many expansions per component;
    the trees returned are then the cheapest ones, but possibly fewer than
    ``k`` (``stats["budget_hit"]`` records this).
    """
    _check_input(g, k)
    L = len(g.groups)
    if L == 0:
        return GstSolution([], [], [], complete=False)
    comps = _components(g)
    touched = [
        [gi for gi, grp in enumerate(g.groups) if grp.terminals & comp] for comp in comps
    ]
    stats_all = []
    full = [c for c, t in zip(comps, touched) if len(t) == L]
    if full:
        trees = []
        for comp in full:
            st = {"component_size": len(comp), "groups": L}
            trees += _solve_on(g, comp, range(L), k, state_cap, st, max_pops)
            stats_all.append(st)
        trees.sort(key=SteinerTree.sort_key)
        sol = GstSolution(trees[:k], list(range(L)), [], complete=True)
    else:
        trees = []
        solved: set[int] = set()
        for comp, t in zip(comps, touched):
            if len(t) < 2:
                continue
            st = {"component_size": len(comp), "groups": len(t)}
            part = _solve_on(g, comp, t, k, state_cap, st, max_pops)
            stats_all.append(st)
            trees += part
            if part:
                solved.update(t)
        trees.sort(key=SteinerTree.sort_key)
        unsolved = sorted(set(range(L)) - solved)
        sol = GstSolution(trees, sorted(solved), unsolved, complete=False)
    sol.stats = {
        "pops": sum(s["pops"] for s in stats_all),
        "pushes": sum(s["pushes"] for s in stats_all),
        "frontier_peak": max((s["frontier_peak"] for s in stats_all), default=0),
        "discarded": sum(s["discarded"] for s in stats_all),
        "budget_hit": any(s["budget_hit"] for s in stats_all),
        "components": len(stats_all),
    }
    if trace is not None:
        trace.append(
            {
                **sol.stats,
                "nodes": len(g.nodes),
                "edges": len(g.edge_cost),
                "groups": L,
                "trees": [round(t.cost, 12) for t in sol.trees],
            }
        )
    return sol


def solve_windows(
    g: ContextGraph,
    k: int = DEFAULT_K,
    max_groups: int = MAX_GROUPS,
    state_cap: Optional[int] = None,
    trace: Optional[list] = None,
    max_pops: Optional[int] = None,
) -> dict[int, GstSolution]:
    """Solve in windows of at most ``max_groups`` consecutive groups.

    Returns the solution responsible for each group index; tree ``chosen``
    maps use indices local to the window's graph.
    """
    L = len(g.groups)
    if L <= max_groups:
        sol = solve_topk(g, k, state_cap, trace, max_pops)
        return {gi: sol for gi in range(L)}
    out = {}
    for start in range(0, L, max_groups):
        idx = list(range(start, min(L, start + max_groups)))
        sub = ContextGraph(g.nodes, g.edge_cost, g.node_weight, tuple(g.groups[i] for i in idx))
        sol = solve_topk(sub, k, state_cap, trace, max_pops)
        for i in idx:
            out[i] = sol
    return out


def brute_force_gst(g: ContextGraph, k: int = DEFAULT_K) -> GstSolution:
    """Reference enumeration over node subsets (test oracle, tiny graphs only).

    Keeps subsets that touch every group, induce a connected subgraph and
    lose one of those properties when any single node is removed; each is
    scored by its minimum spanning tree (Kruskal).
    """
    if k < 1:
        raise SolverError("k must be >= 1")
    ids = sorted(g.nodes)
    if len(ids) > BRUTE_FORCE_LIMIT:
        raise SolverError(f"brute force limited to {BRUTE_FORCE_LIMIT} nodes, got {len(ids)}")
    pos = {v: i for i, v in enumerate(ids)}
    group_bits = [sum(1 << pos[t] for t in grp.terminals) for grp in g.groups]
    nbr = [0] * len(ids)
    for a, b in g.edge_cost:
        nbr[pos[a]] |= 1 << pos[b]
        nbr[pos[b]] |= 1 << pos[a]

    def covers(mask):
        return all(mask & gb for gb in group_bits)

    def connected(mask):
        if mask == 0:
            return False
        reach = mask & -mask
        while True:
            grow = reach
            m = reach
            while m:
                low = m & -m
                grow |= nbr[low.bit_length() - 1] & mask
                m ^= low
            if grow == reach:
                return reach == mask
            reach = grow

    answers = []
    if not group_bits:
        return GstSolution([], [], [], complete=False)
    for mask in range(1, 1 << len(ids)):
        if not covers(mask) or not connected(mask):
            continue
        minimal = True
        m = mask
        while m:
            low = m & -m
            rest = mask ^ low
            if rest and covers(rest) and connected(rest):
                minimal = False
                break
            m ^= low
        if not minimal:
            continue
        members = [ids[i] for i in range(len(ids)) if mask >> i & 1]
        answers.append(_kruskal(g, members))
    answers.sort(key=SteinerTree.sort_key)
    return GstSolution(answers[:k], list(range(len(g.groups))), [], complete=bool(answers))


def _kruskal(g: ContextGraph, members: list[str]) -> SteinerTree:
    inside = set(members)
    parent = {v: v for v in members}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    chosen_edges = []
    for (a, b), c in sorted(g.edge_cost.items(), key=lambda kv: (kv[1], kv[0])):
        if a in inside and b in inside:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
                chosen_edges.append((a, b))
    chosen = {}
    for gi, grp in enumerate(g.groups):
        hit = sorted(grp.terminals & inside)
        if hit:
            chosen[gi] = hit[0]
    edges = tuple(sorted(chosen_edges))
    return SteinerTree(frozenset(members), edges, tree_cost(edges, g.edge_cost), chosen)


def validate_tree(tree: SteinerTree, g: ContextGraph, groups: Sequence[int] | None = None) -> None:
    """Raise ``AssertionError`` unless ``tree`` is a connected acyclic cover
    of ``groups`` (default: all) whose cost matches its edges."""
    nodes = set(tree.nodes)
    assert len(tree.edges) == len(nodes) - 1, "edge count must be |V| - 1"
    parent = {v: v for v in nodes}

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    for a, b in tree.edges:
        assert a in nodes and b in nodes, "edge endpoint outside tree"
        assert (a, b) in g.edge_cost, f"edge ({a}, {b}) not in graph"
        ra, rb = find(a), find(b)
        assert ra != rb, "cycle"
        parent[ra] = rb
    assert len({find(v) for v in nodes}) == 1, "not connected"
    for gi in groups if groups is not None else range(len(g.groups)):
        assert g.groups[gi].terminals & nodes, f"group {gi} not covered"
    assert abs(tree.cost - tree_cost(tree.edges, g.edge_cost)) <= 1e-9


def write_trace(records: list, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
