import unicodedata

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gstned.errors import IntegrityError, LookupFailure, ParseError
from gstned.kg import EntityNode, KnowledgeGraph, load_kg, neighbors, normalize_surface, write_kg


def write_pair(tmp_path, nodes, edges):
    n, e = tmp_path / "nodes.tsv", tmp_path / "edges.tsv"
    n.write_text("id\tlabel\taliases\n" + "".join(f"{r}\n" for r in nodes), encoding="utf-8")
    e.write_text("src\tdst\n" + "".join(f"{r}\n" for r in edges), encoding="utf-8")
    return n, e


def test_minimal_graph(tmp_path):
    kg = load_kg(*write_pair(tmp_path, ["e1\taspirin\t", "e2\theadache\t"], ["e1\te2"]))
    assert len(kg) == 2 and len(kg.edges) == 1
    assert kg.label("e1") == "aspirin"


def test_self_loop_dropped_and_counted(tmp_path, caplog):
    kg = load_kg(*write_pair(tmp_path, ["e1\taspirin\t", "e2\theadache\t"], ["e1\te1", "e1\te2"]))
    assert kg.edges == frozenset({("e1", "e2")})
    assert kg.dropped_edges == 1
    assert "dropped 1" in caplog.text


def test_duplicate_edges_in_either_direction_collapse():
    kg = KnowledgeGraph.from_records([("a", "A"), ("b", "B")], [("a", "b"), ("b", "a"), ("a", "b")])
    assert kg.edges == frozenset({("a", "b")})
    assert kg.dropped_edges == 2


def test_unknown_endpoint_rejected():
    with pytest.raises(IntegrityError, match="zz"):
        KnowledgeGraph.from_records([("a", "A")], [("a", "zz")])


def test_duplicate_id_rejected(tmp_path):
    with pytest.raises(ParseError) as exc:
        load_kg(*write_pair(tmp_path, ["e1\tx\t", "e1\ty\t"], []))
    assert exc.value.line == 3


def test_bad_field_count_reports_line(tmp_path):
    n, e = write_pair(tmp_path, ["e1\tx\t"], ["e1"])
    with pytest.raises(ParseError) as exc:
        load_kg(n, e)
    assert exc.value.line == 2 and "edges.tsv" in str(exc.value)


def test_missing_file_named(tmp_path):
    n, _ = write_pair(tmp_path, ["e1\tx\t"], [])
    with pytest.raises(FileNotFoundError, match="nope.tsv"):
        load_kg(n, tmp_path / "nope.tsv")


def test_neighbors_star_path_isolated():
    kg = KnowledgeGraph.from_records(
        [(v, v) for v in ("c", "l1", "l2", "l3", "iso")], [("c", "l3"), ("l1", "c"), ("c", "l2")]
    )
    assert neighbors(kg, "c") == ["l1", "l2", "l3"]
    assert kg.neighbors("iso") == []
    path = KnowledgeGraph.from_records([(v, v) for v in "abc"], [("a", "b"), ("b", "c")])
    assert path.neighbors("b") == ["a", "c"]
    with pytest.raises(LookupFailure):
        path.neighbors("q")


def test_normalize_surface():
    assert normalize_surface("  Liver  Rupture ") == "liver rupture"
    assert normalize_surface("ADENOMA") == "adenoma"
    decomposed = unicodedata.normalize("NFD", "café")
    assert decomposed != "café"
    assert normalize_surface(decomposed) == "café"


def test_aliases_cleaned():
    kg = KnowledgeGraph.from_records([EntityNode("e", "Adenoma", ("adenoma", "  ", "tumour", "Tumour"))], [])
    assert kg.nodes["e"].aliases == ("tumour",)


def test_tsv_round_trip(tmp_path):
    kg = KnowledgeGraph.from_records(
        [EntityNode("a", "Alpha", ("al",)), EntityNode("b", "Beta", ())], [("b", "a")]
    )
    write_kg(kg, tmp_path / "n.tsv", tmp_path / "e.tsv")
    back = load_kg(tmp_path / "n.tsv", tmp_path / "e.tsv")
    assert back == kg and back.content_hash() == kg.content_hash()


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 12).flatmap(
        lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=40))
    )
)
def test_adjacency_symmetric_and_loop_free(data):
    n, pairs = data
    ids = [f"n{i}" for i in range(n)]
    kg = KnowledgeGraph.from_records([(v, v) for v in ids], [(ids[a], ids[b]) for a, b in pairs])
    for v in ids:
        ns = kg.neighbors(v)
        assert v not in ns and ns == sorted(set(ns))
        for u in ns:
            assert v in kg.neighbors(u)
    assert len(kg.edges) + kg.dropped_edges == len(pairs)


@given(st.text(max_size=30))
def test_normalize_idempotent(s):
    assert normalize_surface(normalize_surface(s)) == normalize_surface(s)
