"""Precision@1 / Hit@5 / candidate recall, the four-way error breakdown, and
the sweep and ranking-scheme harnesses built on them."""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, replace
from typing import Iterable, Mapping, Sequence

from .candidates import Document
from .errors import EvaluationError
from .pipeline import Linker, PipelineConfig
from .ranker import RankedCandidates, Scheme
from .solver import GstSolution

CATEGORIES = ("gold_not_in_candidates", "gold_not_in_topk_gsts", "gold_in_gsts_not_top1", "correct")


@dataclass(frozen=True)
class EvalReport:
    precision_at_1: float
    hit_at_5: float
    candidate_recall: float
    error_breakdown: dict
    n_mentions: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def table(self) -> str:
        rows = [
            ("mentions", f"{self.n_mentions}"),
            ("P@1", f"{self.precision_at_1:.4f}"),
            ("Hit@5", f"{self.hit_at_5:.4f}"),
            ("candidate recall", f"{self.candidate_recall:.4f}"),
        ]
        rows += [(f"  {c}", f"{self.error_breakdown[c]:.4f}") for c in CATEGORIES]
        width = max(len(r[0]) for r in rows)
        return "\n".join(f"{a:<{width}}  {b}" for a, b in rows)


def classify(r: RankedCandidates, gold: str, sol: GstSolution | None) -> str:
    if r.top == gold:
        return "correct"
    if gold not in r.entities:
        return "gold_not_in_candidates"
    if sol is None or not any(gold in t.nodes for t in sol.trees):
        return "gold_not_in_topk_gsts"
    return "gold_in_gsts_not_top1"


def evaluate(
    rankings: Iterable[RankedCandidates],
    gold: Mapping[str, str],
    solutions: Mapping[str, GstSolution],
    exclude: Iterable[str] = (),
) -> EvalReport:
    """Micro-averaged over every gold-annotated mention not in ``exclude``."""
    by_id = {r.mention_id: r for r in rankings}
    skip = set(exclude)
    counts = dict.fromkeys(CATEGORIES, 0)
    hits5 = recall = n = 0
    for mid in sorted(gold):
        if mid in skip:
            continue
        if mid not in by_id:
            raise EvaluationError(f"mention {mid!r} has gold but no ranking record")
        r, g = by_id[mid], gold[mid]
        n += 1
        counts[classify(r, g, solutions.get(mid))] += 1
        hits5 += g in r.entities[:5]
        recall += g in r.entities
    if n == 0:
        return EvalReport(0.0, 0.0, 0.0, {c: (1.0 if c == "gold_not_in_candidates" else 0.0) for c in CATEGORIES}, 0)
    return EvalReport(
        counts["correct"] / n,
        hits5 / n,
        recall / n,
        {c: counts[c] / n for c in CATEGORIES},
        n,
    )


def gold_map(docs: Iterable[Document]) -> dict[str, str]:
    return {m.mention_id: m.gold for d in docs for m in d.mentions if m.gold is not None}


def evaluate_results(results, docs: Sequence[Document], exclude_exact: bool = False) -> EvalReport:
    rankings = [r for res in results for r in res.rankings]
    sols = {mid: s for res in results for mid, s in res.solutions.items()}
    exclude = ()
    if exclude_exact:
        exclude = [
            cs.mention.mention_id for res in results for cs in res.candidate_sets if cs.exact_match
        ]
    return evaluate(rankings, gold_map(docs), sols, exclude)


def held_out_split(docs: Sequence[Document], fraction: float, seed: int) -> list[Document]:
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"held_out_fraction must be in (0, 1), got {fraction}")
    order = sorted(docs, key=lambda d: d.doc_id)
    random.Random(seed).shuffle(order)
    n = max(1, math.ceil(fraction * len(order)))
    return sorted(order[:n], key=lambda d: d.doc_id)


@dataclass(frozen=True)
class SweepRow:
    threshold: float
    k: int
    scheme: str
    report: EvalReport


def sweep(
    grid: Sequence[tuple[float, int, str]],
    linker: Linker,
    docs: Sequence[Document],
    held_out_fraction: float = 0.1,
    seed: int | None = None,
) -> list[SweepRow]:
    """One pipeline run per grid point on a seeded held-out document split.

    Candidates are scored once at the loosest threshold and re-filtered per
    point, which gives the same sets as scoring at each threshold.
    """
    if not grid:
        raise ValueError("empty sweep grid")
    cfg = linker.config
    split = held_out_split(docs, held_out_fraction, cfg.seed if seed is None else seed)
    loosest = min(t for t, _, _ in grid)
    scored = {d.doc_id: linker.candidates(d, loosest) for d in split}
    cache: dict = {}
    rows = []
    for threshold, k, scheme in grid:
        results = []
        for d in split:
            key = (d.doc_id, threshold, k)
            if key not in cache:
                sets = [cs.filtered(threshold, cfg.max_candidates) for cs in scored[d.doc_id]]
                cache[key] = linker.link(
                    d, sets, k, schemes=[(s, False) for s in Scheme if s is not Scheme.FALLBACK_NODE_WEIGHT]
                )
            results.append(cache[key][(Scheme(scheme), False)])
        rows.append(SweepRow(threshold, k, Scheme(scheme).value, evaluate_results(results, split, cfg.exclude_exact)))
    return rows


def sweep_tsv(rows: Sequence[SweepRow]) -> str:
    lines = ["threshold\tk\tscheme\tp_at_1\thit_at_5\trecall\tn_mentions"]
    for r in rows:
        rep = r.report
        lines.append(
            f"{r.threshold:.2f}\t{r.k}\t{r.scheme}\t{rep.precision_at_1:.4f}\t"
            f"{rep.hit_at_5:.4f}\t{rep.candidate_recall:.4f}\t{rep.n_mentions}"
        )
    return "\n".join(lines) + "\n"


SCHEME_VARIANTS = (
    ("GST count", Scheme.GST_COUNT, False),
    ("GST cost", Scheme.GST_COST, False),
    ("Node weight", Scheme.NODE_WEIGHT, False),
    ("Node weight (candidate only)", Scheme.NODE_WEIGHT, True),
)


def compare_schemes(linker: Linker, docs: Sequence[Document]):
    """Every ranking scheme on one corpus from a single solve per document.

    Returns ``(rows, per_variant_results)`` where rows are
    ``(name, EvalReport)``.
    """
    variants = [(s, c) for _, s, c in SCHEME_VARIANTS]
    per_doc = [linker.link(d, schemes=variants) for d in docs]
    rows, results = [], {}
    for name, s, c in SCHEME_VARIANTS:
        res = [pd[(s, c)] for pd in per_doc]
        results[name] = res
        rows.append((name, evaluate_results(res, docs, linker.config.exclude_exact)))
    return rows, results


def scheme_table(rows) -> str:
    width = max(len(name) for name, _ in rows)
    lines = [f"{'scheme':<{width}}  P@1     Hit@5"]
    for name, rep in rows:
        lines.append(f"{name:<{width}}  {rep.precision_at_1:.4f}  {rep.hit_at_5:.4f}")
    return "\n".join(lines) + "\n"


def unanimity_cases(results) -> list[tuple[str, str]]:
    """(mention_id, entity) pairs where the entity sits in every tree of the
    mention's solution and no other candidate sits in any."""
    out = []
    for res in results:
        by_id = {cs.mention.mention_id: cs for cs in res.candidate_sets}
        for r in res.rankings:
            sol = res.solutions.get(r.mention_id)
            if sol is None or not sol.trees or r.scheme is Scheme.FALLBACK_NODE_WEIGHT:
                continue
            cands = by_id[r.mention_id].entities
            inside = [e for e in cands if any(e in t.nodes for t in sol.trees)]
            if len(inside) == 1 and all(inside[0] in t.nodes for t in sol.trees):
                out.append((r.mention_id, inside[0]))
    return out


def with_config(linker: Linker, **changes) -> Linker:
    """Cheap copy of ``linker`` sharing KG, embeddings and candidate index."""
    clone = Linker.__new__(Linker)
    clone.kg, clone.emb, clone.index = linker.kg, linker.emb, linker.index
    clone.config = replace(linker.config, **changes)
    return clone

