import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gstned.embeddings import (
    EmbeddingTable,
    WalkConfig,
    cache_key,
    cosine,
    embed_graph,
    load_embeddings,
    read_cache_key,
    sample_walks,
    save_embeddings,
    train_embeddings,
)
from gstned.errors import ParseError
from gstned.kg import KnowledgeGraph

SMALL = dict(dim=16, walks_per_node=20, walk_length=10, epochs=3)


def graph(n_nodes, edges):
    ids = [f"n{i}" for i in range(n_nodes)]
    return KnowledgeGraph.from_records([(v, v) for v in ids], [(ids[a], ids[b]) for a, b in edges])


def transitions(walks, prev, cur):
    c = Counter()
    for w in walks:
        for a, b, x in zip(w, w[1:], w[2:]):
            if a == prev and b == cur:
                c[x] += 1
    return c


def within_3_sigma(count, total, p):
    return abs(count - total * p) <= 3 * math.sqrt(total * p * (1 - p))


def test_isolated_node_walks_are_singletons():
    kg = graph(3, [(0, 1)])
    walks = sample_walks(kg, WalkConfig(walks_per_node=2, walk_length=5))
    assert [w for w in walks if w[0] == "n2"] == [["n2"], ["n2"]]


def test_two_node_path_alternates():
    kg = graph(2, [(0, 1)])
    for w in sample_walks(kg, WalkConfig(walks_per_node=3, walk_length=7)):
        assert all(a != b for a, b in zip(w, w[1:])) and len(w) == 7


def test_triangle_uniform_transitions():
    kg = graph(3, [(0, 1), (1, 2), (0, 2)])
    walks = sample_walks(kg, WalkConfig(walks_per_node=800, walk_length=30, seed=1))
    c = transitions(walks, "n0", "n1")
    total = sum(c.values())
    assert total > 10_000
    assert set(c) == {"n0", "n2"}
    assert within_3_sigma(c["n0"], total, 0.5)


def test_biased_transitions_match_hand_probabilities():
    # t=n0, v=n1, x=n2 (adjacent to t), y=n3 (not adjacent to t)
    kg = graph(4, [(0, 1), (1, 2), (0, 2), (1, 3)])
    cfg = WalkConfig(walks_per_node=2000, walk_length=40, return_p=2.0, inout_q=0.5, seed=3)
    c = transitions(sample_walks(kg, cfg), "n0", "n1")
    total = sum(c.values())
    # weights 1/p, 1, 1/q = 0.5, 1, 2
    for node, p in (("n0", 1 / 7), ("n2", 2 / 7), ("n3", 4 / 7)):
        assert within_3_sigma(c[node], total, p), (node, c[node], total * p)


def test_walks_deterministic():
    kg = graph(6, [(i, (i + 1) % 6) for i in range(6)])
    cfg = WalkConfig(walks_per_node=3, walk_length=6, return_p=0.5, inout_q=2.0, seed=9)
    assert sample_walks(kg, cfg) == sample_walks(kg, cfg)


def two_cliques():
    edges = [(a, b) for a in range(5) for b in range(a + 1, 5)]
    edges += [(a + 5, b + 5) for a, b in edges]
    return graph(10, edges)


def test_cliques_separate():
    kg = two_cliques()
    emb = embed_graph(kg, WalkConfig(**SMALL, seed=4))
    ids = sorted(kg.nodes, key=lambda v: int(v[1:]))
    intra, inter = [], []
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            same = (int(a[1:]) < 5) == (int(b[1:]) < 5)
            (intra if same else inter).append(cosine(emb[a], emb[b]))
    assert np.mean(intra) > np.mean(inter)


def test_training_bit_reproducible_and_finite():
    kg = graph(8, [(i, i + 1) for i in range(7)])
    cfg = WalkConfig(**SMALL, seed=5)
    a, b = embed_graph(kg, cfg), embed_graph(kg, cfg)
    assert a == b
    norms = np.linalg.norm(a.matrix, axis=1)
    assert np.all(np.isfinite(norms)) and np.all(norms > 0)
    assert embed_graph(kg, WalkConfig(**SMALL, seed=6)) != a


def test_edgeless_graph_warns_and_returns_init(caplog):
    kg = graph(3, [])
    emb = embed_graph(kg, WalkConfig(dim=4, walks_per_node=1))
    assert emb.matrix.shape == (3, 4)
    assert "length 1" in caplog.text


def test_cosine_values():
    assert cosine([3.0, 4.0], [3.0, 4.0]) == pytest.approx(1.0)
    assert cosine([1, 0], [0, 1]) == 0.0
    assert cosine([1, 1], [1, 0]) == pytest.approx(0.7071, abs=1e-4)
    assert cosine([0, 0], [1, 0]) == 0.0
    with pytest.raises(ValueError):
        cosine([1, 0], [1, 0, 0])


@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3), st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3))
def test_cosine_bounded_symmetric(u, v):
    c = cosine(u, v)
    assert -1.0 <= c <= 1.0
    assert c == cosine(v, u)


def test_cache_round_trip(tmp_path):
    kg = graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    cfg = WalkConfig(**SMALL, seed=2)
    emb = embed_graph(kg, cfg)
    key = cache_key(kg, cfg)
    save_embeddings(emb, tmp_path / "emb.tsv", key)
    assert read_cache_key(tmp_path / "emb.tsv") == key
    assert load_embeddings(tmp_path / "emb.tsv") == emb
    assert read_cache_key(tmp_path / "missing.tsv") is None
    assert cache_key(kg, WalkConfig(**SMALL, seed=3)) != key


def test_cache_bad_row(tmp_path):
    p = tmp_path / "emb.tsv"
    p.write_text("# dim=2\tseed=0\tkey=x\na\t0.1,0.2\nb\t0.1\n", encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        load_embeddings(p)
    assert exc.value.line == 3


def test_train_respects_explicit_ids():
    cfg = WalkConfig(dim=4, epochs=1)
    emb = train_embeddings([["a", "b", "a"]], cfg, ids=["a", "b", "c"])
    assert emb.ids == ("a", "b", "c") and "c" in emb


def test_walk_config_validation():
    with pytest.raises(ValueError):
        WalkConfig(return_p=0)
    with pytest.raises(ValueError):
        WalkConfig(dim=0)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 9).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=15))))
def test_walks_follow_edges(data):
    n, edges = data
    kg = graph(n, edges)
    cfg = WalkConfig(walks_per_node=2, walk_length=6, return_p=0.7, inout_q=1.5)
    walks = sample_walks(kg, cfg)
    assert len(walks) == 2 * n
    assert Counter(w[0] for w in walks) == Counter({v: 2 for v in kg.nodes})
    for w in walks:
        for a, b in zip(w, w[1:]):
            assert b in kg.neighbors(a)
        assert len(w) == cfg.walk_length or not kg.neighbors(w[-1])
