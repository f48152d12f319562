from hypothesis import given, settings
from hypothesis import strategies as st
import pytest

from gstned.candidates import generate_candidates, load_documents
from gstned.kg import load_kg
from gstned.synthetic import SyntheticParams, generate_synthetic, write_synthetic


def test_shape():
    kg, docs = generate_synthetic(SyntheticParams(n_docs=5, n_background=30))
    assert len(docs) == 5
    assert all(len(d.mentions) == 4 for d in docs)
    assert len(kg) == 5 * 4 * 4 + 30


def test_noise_zero_gold_clique_and_isolated_distractors():
    kg, docs = generate_synthetic(SyntheticParams(n_docs=6, n_background=40, seed=2))
    for d in docs:
        golds = [m.gold for m in d.mentions]
        for a in golds:
            for b in golds:
                if a != b:
                    assert b in kg.neighbors(a)
        for m in d.mentions:
            cands = generate_candidates(kg, m).entities
            assert m.gold in cands and len(cands) == 4
            for c in cands:
                if c != m.gold:
                    assert kg.neighbors(c) == []


def test_noise_one_moves_clique_off_gold():
    kg, docs = generate_synthetic(SyntheticParams(n_docs=6, n_background=40, noise=1.0, cross_link_rate=0.0, seed=2))
    for d in docs:
        for m in d.mentions:
            others = {x.gold for x in d.mentions if x is not m}
            assert not others & set(kg.neighbors(m.gold))


def test_files_byte_identical(tmp_path):
    p = SyntheticParams(n_docs=4, n_background=20, noise=0.5, seed=7)
    write_synthetic(p, tmp_path / "a")
    write_synthetic(p, tmp_path / "b")
    for name in ("nodes.tsv", "edges.tsv", "documents.jsonl"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    kg = load_kg(tmp_path / "a" / "nodes.tsv", tmp_path / "a" / "edges.tsv")
    assert kg == generate_synthetic(p)[0]
    assert len(load_documents(tmp_path / "a" / "documents.jsonl")) == 4


def test_bad_params():
    with pytest.raises(ValueError):
        SyntheticParams(noise=1.5)
    with pytest.raises(ValueError):
        SyntheticParams(n_docs=0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 1))
def test_gold_always_retrievable(seed, noise):
    kg, docs = generate_synthetic(SyntheticParams(n_docs=3, n_background=10, noise=noise, seed=seed))
    for d in docs:
        for m in d.mentions:
            assert m.gold in kg.nodes
            assert m.gold in generate_candidates(kg, m).entities
