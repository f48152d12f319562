import json
import logging

import pytest

from gstned.cli import main
from gstned.synthetic import SyntheticParams, write_synthetic

FAST = ["--dim", "8", "--walks-per-node", "2", "--walk-length", "6", "--epochs", "1"]


@pytest.fixture
def corpus(tmp_path):
    paths = write_synthetic(SyntheticParams(n_docs=6, n_background=30, seed=3), tmp_path / "data")
    cfg = {
        "nodes": str(paths["nodes"]),
        "edges": str(paths["edges"]),
        "documents": str(paths["documents"]),
        "index_dir": str(tmp_path / "index"),
        "output_dir": str(tmp_path / "out"),
    }
    (tmp_path / "cfg.json").write_text(json.dumps(cfg), encoding="utf-8")
    return tmp_path, ["--config", str(tmp_path / "cfg.json")] + FAST


def test_index_link_eval(corpus, caplog):
    tmp, args = corpus
    caplog.set_level(logging.INFO)
    assert main(["index", *args]) == 0
    assert {p.name for p in (tmp / "index").iterdir()} == {"nodes.tsv", "edges.tsv", "embeddings.tsv", "index.json"}
    caplog.clear()
    assert main(["index", *args]) == 0
    assert "cache hit" in caplog.text
    assert main(["link", *args, "--trace", "--dump-graphs"]) == 0
    out = tmp / "out"
    recs = [json.loads(x) for x in (out / "rankings.jsonl").read_text().splitlines()]
    assert len(recs) == 24
    assert (out / "trace.jsonl").exists() and any((out / "context").iterdir())
    assert main(["eval", *args]) == 0
    report = json.loads((out / "eval.json").read_text())
    assert report["precision_at_1"] == 1.0
    assert "P@1" in (out / "eval.txt").read_text()


def test_index_rebuilds_when_settings_change(corpus, caplog):
    tmp, args = corpus
    caplog.set_level(logging.INFO)
    main(["index", *args])
    caplog.clear()
    main(["index", *args, "--seed", "5"])
    assert "cache hit" not in caplog.text


def test_link_deterministic_and_config_echo(corpus):
    tmp, args = corpus
    main(["index", *args])
    main(["link", *args])
    first = (tmp / "out" / "rankings.jsonl").read_bytes()
    echoed = tmp / "out" / "config.json"
    main(["link", "--config", str(echoed)])
    assert (tmp / "out" / "rankings.jsonl").read_bytes() == first
    cfg = json.loads(echoed.read_text())
    assert cfg["fuzzy_threshold"] == 0.75 and cfg["dim"] == 8


def test_flags_override_file(corpus):
    tmp, args = corpus
    main(["index", *args])
    main(["link", *args, "--k", "3", "--scheme", "GstCost"])
    cfg = json.loads((tmp / "out" / "config.json").read_text())
    assert cfg["k"] == 3 and cfg["scheme"] == "GstCost"


def test_sweep_and_compare(corpus):
    tmp, args = corpus
    main(["index", *args])
    assert main(["sweep", *args, "--thresholds", "0.7,0.8", "--ks", "1,5", "--held-out", "0.5"]) == 0
    rows = (tmp / "out" / "sweep.tsv").read_text().splitlines()
    assert len(rows) == 5 and rows[0].startswith("threshold")
    assert main(["compare", *args]) == 0
    assert "GST count" in (tmp / "out" / "schemes.txt").read_text()


def test_missing_index(corpus, capsys):
    tmp, args = corpus
    assert main(["link", *args]) != 0
    err = capsys.readouterr().err
    assert err.startswith("index error:") and "gstned index" in err


def test_missing_edges_file_named(tmp_path, capsys):
    (tmp_path / "n.tsv").write_text("id\tlabel\taliases\na\tA\t\n")
    code = main(["index", "--nodes", str(tmp_path / "n.tsv"), "--edges", str(tmp_path / "missing.tsv")])
    assert code != 0
    assert "missing.tsv" in capsys.readouterr().err


def test_parse_error_has_line(tmp_path, capsys):
    (tmp_path / "n.tsv").write_text("id\tlabel\taliases\na\tA\t\nb\tB\n")
    (tmp_path / "e.tsv").write_text("src\tdst\n")
    assert main(["index", "--nodes", str(tmp_path / "n.tsv"), "--edges", str(tmp_path / "e.tsv")]) != 0
    err = capsys.readouterr().err
    assert err.startswith("parse error:") and "n.tsv:3" in err


def test_eval_without_gold(corpus, capsys):
    tmp, args = corpus
    main(["index", *args])
    main(["link", *args])
    nogold = tmp / "nogold.jsonl"
    lines = []
    for line in (tmp / "data" / "documents.jsonl").read_text().splitlines():
        rec = json.loads(line)
        for m in rec["mentions"]:
            m.pop("gold")
        lines.append(json.dumps(rec))
    nogold.write_text("\n".join(lines) + "\n")
    assert main(["eval", *args, "--documents", str(nogold)]) != 0
    assert "needs gold" in capsys.readouterr().err


def test_bad_config_value(corpus, capsys):
    _, args = corpus
    assert main(["link", *args, "--fuzzy-threshold", "1.5"]) != 0
    assert capsys.readouterr().err.startswith("config error:")


def test_unknown_config_key(tmp_path, capsys):
    (tmp_path / "c.json").write_text('{"bogus": 1}')
    assert main(["link", "--config", str(tmp_path / "c.json")]) != 0
    assert "bogus" in capsys.readouterr().err


def test_single_mention_document_records_fallback(corpus):
    tmp, args = corpus
    main(["index", *args])
    src = (tmp / "data" / "documents.jsonl").read_text().splitlines()[0]
    rec = json.loads(src)
    rec["mentions"] = rec["mentions"][:1]
    (tmp / "one.jsonl").write_text(json.dumps(rec) + "\n")
    main(["link", *args, "--documents", str(tmp / "one.jsonl")])
    out = json.loads((tmp / "out" / "rankings.jsonl").read_text())
    assert out["scheme"] == "FallbackNodeWeight"
