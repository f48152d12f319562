"""Per-mention candidate ranking from a set of top-k Steiner trees."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .context import ContextGraph, TerminalGroup
from .solver import GstSolution


class Scheme(str, Enum):
    GST_COUNT = "GstCount"
    GST_COST = "GstCost"
    NODE_WEIGHT = "NodeWeight"
    FALLBACK_NODE_WEIGHT = "FallbackNodeWeight"


DEFAULT_SCHEME = Scheme.GST_COUNT


@dataclass(frozen=True)
class RankedCandidates:
    mention_id: str
    ranking: tuple[tuple[str, float], ...]
    scheme: Scheme

    @property
    def entities(self) -> list[str]:
        return [e for e, _ in self.ranking]

    @property
    def top(self) -> str | None:
        return self.ranking[0][0] if self.ranking else None


def _containing(sol: GstSolution, e: str):
    return [t for t in sol.trees if e in t.nodes]


def score_gst_count(sol: GstSolution, group: TerminalGroup) -> dict[str, int]:
    return {e: len(_containing(sol, e)) for e in group.terminals}


def score_gst_cost(sol: GstSolution, group: TerminalGroup) -> dict[str, float]:
    """Summed cost of the trees holding each candidate; ``inf`` when absent."""
    out = {}
    for e in group.terminals:
        trees = _containing(sol, e)
        out[e] = math.fsum(t.cost for t in trees) if trees else math.inf
    return out


def score_node_weight(
    sol: GstSolution,
    group: TerminalGroup,
    g: ContextGraph,
    candidate_only: bool = False,
) -> dict[str, float]:
    """Sum over containing trees of the tree's total node weight.

    ``candidate_only`` switches to the candidate's own weight times the
    number of containing trees.
    """
    out = {}
    for e in group.terminals:
        trees = _containing(sol, e)
        if candidate_only:
            out[e] = g.node_weight.get(e, 0.0) * len(trees)
        else:
            out[e] = math.fsum(g.node_weight.get(v, 0.0) for t in trees for v in t.nodes)
    return out


def rank(
    sol: GstSolution | None,
    group: TerminalGroup,
    g: ContextGraph,
    scheme: Scheme = DEFAULT_SCHEME,
    candidate_only: bool = False,
    group_index: int | None = None,
) -> RankedCandidates:
    """Order the group's candidates by ``scheme``.

    Ties fall back to node weight, then fuzzy match score, then entity id.
    Groups the solution does not cover (or an empty solution) are ranked by
    node weight alone and tagged ``FallbackNodeWeight``.
    """
    scheme = Scheme(scheme)
    if group_index is None:
        group_index = g.group_index(group.mention_id)
    covered = (
        sol is not None
        and sol.trees
        and group_index in sol.groups_solved
        and scheme is not Scheme.FALLBACK_NODE_WEIGHT
    )
    weight = {e: g.node_weight.get(e, 0.0) for e in group.terminals}
    match = group.match_scores

    def chain(e):
        return (-weight[e], -match.get(e, 0.0), e)

    if not covered:
        order = sorted(group.terminals, key=chain)
        return RankedCandidates(
            group.mention_id, tuple((e, weight[e]) for e in order), Scheme.FALLBACK_NODE_WEIGHT
        )
    if scheme is Scheme.GST_COUNT:
        scores = score_gst_count(sol, group)
        key = lambda e: (-scores[e], *chain(e))  # noqa: E731
    elif scheme is Scheme.GST_COST:
        scores = score_gst_cost(sol, group)
        key = lambda e: (scores[e], *chain(e))  # noqa: E731
    else:
        scores = score_node_weight(sol, group, g, candidate_only)
        key = lambda e: (-scores[e], *chain(e))  # noqa: E731
    order = sorted(group.terminals, key=key)
    return RankedCandidates(group.mention_id, tuple((e, float(scores[e])) for e in order), scheme)
