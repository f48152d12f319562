"""Seeded synthetic corpora standing in for the unavailable benchmark sets.

Every mention gets ``candidates_per_mention`` near-duplicate entity labels
(one character substituted); one of them is gold. Per document one
candidate of each mention joins a clique: the gold one, except that with
probability ``noise`` a distractor takes its place. The remaining
candidates are isolated at noise 0 and pick up random edges (to other
mentions' candidates and to the background graph) as noise grows.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass
from pathlib import Path

from .candidates import Document, Mention, write_documents
from .kg import EntityNode, KnowledgeGraph, write_kg


@dataclass(frozen=True)
class SyntheticParams:
    n_docs: int = 50
    mentions_per_doc: int = 4
    candidates_per_mention: int = 4
    n_background: int = 400
    background_degree: float = 2.0
    gold_links: int = 2
    cross_link_rate: float = 0.3
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("n_docs", "mentions_per_doc", "candidates_per_mention"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n_background < 0 or not 0.0 <= self.noise <= 1.0:
            raise ValueError("n_background must be >= 0 and noise in [0, 1]")


def _word(rng: random.Random, lo: int = 8, hi: int = 14) -> str:
    return "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(lo, hi)))


def _variants(rng: random.Random, base: str, count: int) -> list[str]:
    out: list[str] = []
    while len(out) < count:
        i = rng.randrange(len(base))
        ch = rng.choice([c for c in string.ascii_lowercase if c != base[i]])
        v = base[:i] + ch + base[i + 1 :]
        if v not in out:
            out.append(v)
    return out


def generate_synthetic(params: SyntheticParams = SyntheticParams()) -> tuple[KnowledgeGraph, list[Document]]:
    rng = random.Random(params.seed)
    n_cand = params.n_docs * params.mentions_per_doc * params.candidates_per_mention
    total = n_cand + params.n_background
    # shuffled ids so id order carries no hint about which candidate is gold
    id_pool = [f"e{i:06d}" for i in range(total)]
    rng.shuffle(id_pool)
    ids = iter(id_pool)
    used_words: set[str] = set()

    def fresh_word():
        while True:
            w = _word(rng)
            if w not in used_words:
                used_words.add(w)
                return w

    nodes: list[EntityNode] = []
    edges: set[tuple[str, str]] = set()

    def link(a, b):
        if a != b:
            edges.add((a, b) if a < b else (b, a))

    docs = []
    per_doc_cands: list[list[list[str]]] = []
    per_doc_gold: list[list[str]] = []
    for d in range(params.n_docs):
        doc_id = f"doc{d:04d}"
        mentions, cand_lists, golds = [], [], []
        for j in range(params.mentions_per_doc):
            base = fresh_word()
            labels = _variants(rng, base, params.candidates_per_mention)
            used_words.update(labels)
            cands = []
            for lab in labels:
                nid = next(ids)
                nodes.append(EntityNode(nid, lab))
                cands.append(nid)
            gold = rng.choice(cands)
            mentions.append(Mention(f"{doc_id}-m{j}", base, doc_id, gold))
            cand_lists.append(cands)
            golds.append(gold)
        docs.append(Document(doc_id, mentions))
        per_doc_cands.append(cand_lists)
        per_doc_gold.append(golds)

    background = []
    for _ in range(params.n_background):
        nid = next(ids)
        nodes.append(EntityNode(nid, fresh_word()))
        background.append(nid)
    if len(background) > 1:
        for i in range(1, len(background)):
            link(background[i], background[rng.randrange(i)])
        extra = int(len(background) * max(0.0, params.background_degree - 2.0) / 2)
        for _ in range(extra):
            link(*rng.sample(background, 2))

    noise = params.noise
    for cand_lists, golds in zip(per_doc_cands, per_doc_gold):
        # the cohesive member of each mention is gold unless noise hands the
        # role to a decoy; the clique is built over cohesive members only
        members = [
            g if rng.random() >= noise else rng.choice([c for c in cands if c != g] or [g])
            for cands, g in zip(cand_lists, golds)
        ]
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                link(members[a], members[b])
        for m in members:
            for _ in range(params.gold_links if background else 0):
                link(m, rng.choice(background))
        for j, cands in enumerate(cand_lists):
            others = [o for jj, other in enumerate(cand_lists) if jj != j for o in other]
            for c in cands:
                if c == members[j]:
                    continue
                if others and rng.random() < noise * params.cross_link_rate:
                    link(c, rng.choice(others))
                if background and rng.random() < noise:
                    link(c, rng.choice(background))
    kg = KnowledgeGraph.from_records(nodes, sorted(edges))
    return kg, docs


def write_synthetic(params: SyntheticParams, out_dir: str | Path) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kg, docs = generate_synthetic(params)
    paths = {
        "nodes": out_dir / "nodes.tsv",
        "edges": out_dir / "edges.tsv",
        "documents": out_dir / "documents.jsonl",
    }
    write_kg(kg, paths["nodes"], paths["edges"])
    write_documents(docs, paths["documents"])
    return paths
