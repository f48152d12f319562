"""Structural node embeddings: biased second-order random walks + skip-gram
with negative sampling, trained on the whole knowledge graph."""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from numba import njit

from .errors import ParseError
from .kg import KnowledgeGraph

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WalkConfig:
    dim: int = 64
    walks_per_node: int = 10
    walk_length: int = 20
    return_p: float = 1.0
    inout_q: float = 1.0
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0

    def __post_init__(self):
        for name in ("dim", "walks_per_node", "walk_length", "window", "negatives", "epochs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.return_p <= 0 or self.inout_q <= 0:
            raise ValueError("return_p and inout_q must be > 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")


class EmbeddingTable:
    """Row-per-entity matrix with id lookup."""

    def __init__(self, ids: Sequence[str], matrix: np.ndarray, seed: int):
        if matrix.ndim != 2 or matrix.shape[0] != len(ids):
            raise ValueError("matrix shape does not match ids")
        self.ids = tuple(ids)
        self.matrix = matrix
        self.seed = seed
        self._row = {v: i for i, v in enumerate(self.ids)}

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __contains__(self, v: str) -> bool:
        return v in self._row

    def __getitem__(self, v: str) -> np.ndarray:
        return self.matrix[self._row[v]]

    @property
    def vectors(self) -> dict[str, np.ndarray]:
        return {v: self.matrix[i] for i, v in enumerate(self.ids)}

    def __eq__(self, other):
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        return (
            self.ids == other.ids
            and self.seed == other.seed
            and self.matrix.dtype == other.matrix.dtype
            and np.array_equal(self.matrix, other.matrix)
        )


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = math.sqrt(float(u @ u))
    nv = math.sqrt(float(v @ v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return max(-1.0, min(1.0, float(u @ v) / (nu * nv)))


def sample_walks(kg: KnowledgeGraph, cfg: WalkConfig) -> list[list[str]]:
    """``walks_per_node`` walks from every node, start order shuffled per pass.

    After the first (uniform) step, the unnormalized weight of moving from
    ``cur`` to ``x`` given the previous node ``prev`` is ``1/p`` if ``x`` is
    ``prev``, ``1`` if ``x`` neighbours ``prev`` and ``1/q`` otherwise.
    """
    if len(kg) == 0:
        raise ValueError("cannot sample walks on an empty graph")
    ids = sorted(kg.nodes)
    row = {v: i for i, v in enumerate(ids)}
    adj = [tuple(row[u] for u in kg.neighbors(v)) for v in ids]
    uniform = cfg.return_p == 1.0 and cfg.inout_q == 1.0
    nbr_sets = None if uniform else [frozenset(a) for a in adj]
    inv_p, inv_q = 1.0 / cfg.return_p, 1.0 / cfg.inout_q
    rng = np.random.default_rng(cfg.seed)
    walks = []
    for _ in range(cfg.walks_per_node):
        order = rng.permutation(len(ids))
        draws = iter(rng.random(len(ids) * cfg.walk_length).tolist())
        for start in order.tolist():
            walk = [start]
            while len(walk) < cfg.walk_length:
                cur = walk[-1]
                nbrs = adj[cur]
                if not nbrs:
                    break
                r = next(draws)
                if uniform or len(walk) == 1:
                    walk.append(nbrs[int(r * len(nbrs))])
                    continue
                prev = walk[-2]
                prev_nbrs = nbr_sets[prev]
                weights = [
                    inv_p if x == prev else (1.0 if x in prev_nbrs else inv_q) for x in nbrs
                ]
                target = r * sum(weights)
                acc = 0.0
                nxt = nbrs[-1]
                for x, w in zip(nbrs, weights):
                    acc += w
                    if target < acc:
                        nxt = x
                        break
                walk.append(nxt)
            walks.append([ids[i] for i in walk])
    return walks


@njit(cache=True)
def _next_rand(state):
    # 64-bit LCG as used by the reference word2vec
    return (state * np.uint64(25214903917) + np.uint64(11)) & np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True, fastmath=True)
def _sgns_epochs(syn0, syn1, corpus, offsets, noise_table, window, negatives, epochs, lr0, seed):
    dim = syn0.shape[1]
    n_walks = offsets.shape[0] - 1
    total = corpus.shape[0] * epochs
    processed = 0
    state = np.uint64(seed) + np.uint64(0x9E3779B97F4A7C15)
    grad = np.zeros(dim, dtype=np.float32)
    table_size = np.uint64(noise_table.shape[0])
    for _ in range(epochs):
        for w in range(n_walks):
            lo = offsets[w]
            hi = offsets[w + 1]
            for pos in range(lo, hi):
                lr = lr0 * max(1e-4, 1.0 - processed / total)
                processed += 1
                state = _next_rand(state)
                shrink = np.int64(state >> np.uint64(33)) % window
                span = window - shrink
                center = corpus[pos]
                for ctx_pos in range(max(lo, pos - span), min(hi, pos + span + 1)):
                    if ctx_pos == pos:
                        continue
                    ctx = corpus[ctx_pos]
                    for d in range(dim):
                        grad[d] = 0.0
                    for s in range(negatives + 1):
                        if s == 0:
                            target = center
                            label = 1.0
                        else:
                            state = _next_rand(state)
                            target = noise_table[(state >> np.uint64(16)) % table_size]
                            if target == center:
                                continue
                            label = 0.0
                        src = syn0[ctx]
                        out = syn1[target]
                        dot = np.float32(0.0)
                        for d in range(dim):
                            dot += src[d] * out[d]
                        if dot > 6.0:
                            sig = 1.0
                        elif dot < -6.0:
                            sig = 0.0
                        else:
                            sig = 1.0 / (1.0 + math.exp(-dot))
                        g = np.float32((label - sig) * lr)
                        for d in range(dim):
                            grad[d] += g * out[d]
                            out[d] += g * src[d]
                    for d in range(dim):
                        syn0[ctx, d] += grad[d]


def _noise_table(counts: np.ndarray, size: int = 1 << 20) -> np.ndarray:
    # unigram^0.75 sampling table, one slot per 1/size of probability mass
    p = counts**0.75
    cum = np.cumsum(p / p.sum())
    slots = (np.arange(size, dtype=np.float64) + 0.5) / size
    return np.minimum(np.searchsorted(cum, slots, side="right"), len(counts) - 1).astype(np.int64)


def train_embeddings(
    walks: Sequence[Sequence[str]], cfg: WalkConfig, ids: Sequence[str] | None = None
) -> EmbeddingTable:
    """Skip-gram with negative sampling over windowed walk co-occurrences.

    Single-threaded and seeded, so the result is bit-reproducible. ``ids``
    fixes the row order and vocabulary (defaults to every id seen in walks).
    """
    if not walks:
        raise ValueError("no walks to train on")
    if ids is None:
        ids = sorted({v for w in walks for v in w})
    row = {v: i for i, v in enumerate(ids)}
    n = len(ids)
    rng = np.random.default_rng(cfg.seed)
    syn0 = ((rng.random((n, cfg.dim)) - 0.5) / cfg.dim).astype(np.float32)
    if all(len(w) < 2 for w in walks):
        log.warning("all walks have length 1; returning randomly initialized embeddings")
        return EmbeddingTable(ids, syn0, cfg.seed)
    syn1 = np.zeros((n, cfg.dim), dtype=np.float32)
    corpus = np.fromiter((row[v] for w in walks for v in w), dtype=np.int64)
    offsets = np.zeros(len(walks) + 1, dtype=np.int64)
    np.cumsum([len(w) for w in walks], out=offsets[1:])
    counts = np.bincount(corpus, minlength=n).astype(np.float64)
    _sgns_epochs(
        syn0, syn1, corpus, offsets, _noise_table(counts),
        cfg.window, cfg.negatives, cfg.epochs, cfg.learning_rate, cfg.seed,
    )
    return EmbeddingTable(ids, syn0, cfg.seed)


def embed_graph(kg: KnowledgeGraph, cfg: WalkConfig) -> EmbeddingTable:
    return train_embeddings(sample_walks(kg, cfg), cfg, ids=sorted(kg.nodes))


def cache_key(kg: KnowledgeGraph, cfg: WalkConfig) -> str:
    payload = kg.content_hash() + json.dumps(asdict(cfg), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def save_embeddings(table: EmbeddingTable, path: str | Path, key: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# dim={table.dim}\tseed={table.seed}\tkey={key}\n")
        for v, vec in zip(table.ids, table.matrix):
            fh.write(v + "\t" + ",".join(repr(float(x)) for x in vec) + "\n")


def read_cache_key(path: str | Path) -> str | None:
    try:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline()
    except FileNotFoundError:
        return None
    fields = dict(f.split("=", 1) for f in header.lstrip("# ").strip().split("\t") if "=" in f)
    return fields.get("key")


def load_embeddings(path: str | Path) -> EmbeddingTable:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ParseError(path, 1, "missing embedding header line")
        fields = dict(f.split("=", 1) for f in header.lstrip("# ").strip().split("\t") if "=" in f)
        try:
            dim, seed = int(fields["dim"]), int(fields["seed"])
        except (KeyError, ValueError):
            raise ParseError(path, 1, "header must record dim and seed") from None
        ids, rows = [], []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                v, values = line.split("\t")
                vec = [float(x) for x in values.split(",")]
            except ValueError:
                raise ParseError(path, lineno, "expected id<TAB>comma-separated floats") from None
            if len(vec) != dim:
                raise ParseError(path, lineno, f"expected {dim} values, got {len(vec)}")
            ids.append(v)
            rows.append(vec)
    return EmbeddingTable(ids, np.asarray(rows, dtype=np.float32).reshape(len(ids), dim), seed)
