import random

import pytest

from gstned.context import ContextGraph, TerminalGroup


def make_graph(edges, groups, weights=None):
    """ContextGraph from ``{(a, b): cost}`` and a list of terminal lists."""
    costs = {(a, b) if a < b else (b, a): c for (a, b), c in edges.items()}
    nodes = set().union(*groups) if groups else set()
    for a, b in costs:
        nodes |= {a, b}
    tg = tuple(TerminalGroup(f"m{i}", frozenset(g)) for i, g in enumerate(groups))
    w = {v: 0.0 for v in nodes}
    w.update(weights or {})
    return ContextGraph(frozenset(nodes), costs, w, tg)


def random_instance(rng: random.Random, max_nodes=12, max_groups=4, max_terms=3, density=None):
    n = rng.randint(2, max_nodes)
    ids = [f"v{i:02d}" for i in range(n)]
    p = density if density is not None else rng.uniform(0.15, 0.6)
    edges = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges[(ids[i], ids[j])] = rng.random()
    L = rng.randint(1, max_groups)
    groups = [rng.sample(ids, rng.randint(1, min(max_terms, n))) for _ in range(L)]
    return make_graph(edges, groups)


@pytest.fixture
def five_node():
    """a1-b1 0.25, a1-x 0.1, x-b2 0.1, a2-b2 0.9; groups {a1,a2}, {b1,b2}."""
    return make_graph(
        {("a1", "b1"): 0.25, ("a1", "x"): 0.1, ("x", "b2"): 0.1, ("a2", "b2"): 0.9},
        [["a1", "a2"], ["b1", "b2"]],
        {"a1": 0.9, "a2": 0.6, "b1": 0.8, "b2": 0.7, "x": 0.0},
    )


FAST_WALK = dict(dim=16, walks_per_node=4, walk_length=10, epochs=1)


@pytest.fixture(scope="session")
def small_world():
    """A noise-0 synthetic KG, its documents and a linker with cheap embeddings."""
    from gstned.embeddings import embed_graph
    from gstned.pipeline import Linker, PipelineConfig
    from gstned.synthetic import SyntheticParams, generate_synthetic

    kg, docs = generate_synthetic(SyntheticParams(n_docs=12, n_background=80, seed=1))
    cfg = PipelineConfig(**FAST_WALK)
    return kg, docs, Linker(kg, embed_graph(kg, cfg.walk), cfg)
