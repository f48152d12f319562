"""Fuzzy candidate retrieval over entity labels and aliases."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import ParseError
from .kg import KnowledgeGraph, normalize_surface
from .similarity import _match_masks, lcs_length

DEFAULT_THRESHOLD = 0.75
DEFAULT_MAX_CANDIDATES = 10


@dataclass(frozen=True)
class Mention:
    mention_id: str
    surface: str
    doc_id: str
    gold: Optional[str] = None

    def __post_init__(self):
        if not self.surface.strip():
            raise ValueError(f"mention {self.mention_id!r} has an empty surface")


@dataclass
class Document:
    doc_id: str
    mentions: list[Mention] = field(default_factory=list)


@dataclass(frozen=True)
class Candidate:
    entity: str
    match_score: float
    matched_string: str


@dataclass(frozen=True)
class CandidateSet:
    mention: Mention
    candidates: tuple[Candidate, ...]
    exact_match: Optional[str] = None

    @property
    def entities(self) -> list[str]:
        return [c.entity for c in self.candidates]

    def score_of(self, entity: str) -> float:
        for c in self.candidates:
            if c.entity == entity:
                return c.match_score
        return 0.0

    def filtered(self, threshold: float, max_candidates: int) -> "CandidateSet":
        """Re-apply a stricter threshold / smaller cap to an already scored set."""
        if self.exact_match is not None:
            return self
        kept = tuple(c for c in self.candidates if c.match_score > threshold)[:max_candidates]
        return CandidateSet(self.mention, kept, None)


class CandidateIndex:
    """Normalized label/alias table for brute-force scanning.

    Each surface is scored with the indel ratio; a length bound skips pairs
    that cannot pass the threshold, which never changes the result.
    """

    def __init__(self, kg: KnowledgeGraph):
        self.kg = kg
        rows = []
        exact: dict[str, list[str]] = {}
        for nid in sorted(kg.nodes):
            for s in kg.nodes[nid].surfaces():
                norm = normalize_surface(s)
                rows.append((nid, s, norm, len(norm)))
                exact.setdefault(norm, []).append(nid)
        self._rows = rows
        self._exact = {k: sorted(set(v)) for k, v in exact.items()}
        self._bags = [Counter(r[2]) for r in rows]

    def exact(self, surface: str) -> Optional[str]:
        hits = self._exact.get(normalize_surface(surface))
        return hits[0] if hits else None

    def scan(self, surface: str, threshold: float) -> dict[str, tuple[float, str]]:
        """Best score per entity among surfaces scoring strictly above ``threshold``."""
        q = normalize_surface(surface)
        lq = len(q)
        masks = _match_masks(q)
        qbag = Counter(q)
        best: dict[str, tuple[float, str]] = {}
        for (nid, raw, norm, ln), bag in zip(self._rows, self._bags):
            total = lq + ln
            if total == 0:
                score = 1.0
            else:
                if 2.0 * min(lq, ln) / total <= threshold:
                    continue
                if 2.0 * sum((bag & qbag).values()) / total <= threshold:
                    continue
                score = 2.0 * lcs_length(q, norm, masks) / total
            if score <= threshold:
                continue
            prev = best.get(nid)
            if prev is None or score > prev[0]:
                best[nid] = (score, raw)
        return best


def generate_candidates(
    kg_or_index: KnowledgeGraph | CandidateIndex,
    mention: Mention,
    threshold: float = DEFAULT_THRESHOLD,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
) -> CandidateSet:
    """Score ``mention`` against every label and alias.

    An exact (normalized) hit short-circuits to a one-entity set.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    if max_candidates < 1:
        raise ValueError("max_candidates must be >= 1")
    index = kg_or_index if isinstance(kg_or_index, CandidateIndex) else CandidateIndex(kg_or_index)
    hit = index.exact(mention.surface)
    if hit is not None:
        return CandidateSet(mention, (Candidate(hit, 1.0, index.kg.label(hit)),), hit)
    best = index.scan(mention.surface, threshold)
    ordered = sorted(best.items(), key=lambda kv: (-kv[1][0], kv[0]))[:max_candidates]
    return CandidateSet(
        mention, tuple(Candidate(nid, score, raw) for nid, (score, raw) in ordered), None
    )


def load_documents(path: str | Path) -> list[Document]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                doc_id = str(rec["doc_id"])
                mentions = [
                    Mention(str(m["mention_id"]), m["surface"], doc_id, m.get("gold"))
                    for m in rec["mentions"]
                ]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(path, lineno, f"bad document record: {exc}") from None
            docs.append(Document(doc_id, mentions))
    return docs


def write_documents(docs: Iterable[Document], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            rec = {
                "doc_id": d.doc_id,
                "mentions": [
                    {"mention_id": m.mention_id, "surface": m.surface, "gold": m.gold}
                    for m in d.mentions
                ],
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
