"""Fuzzy-threshold and k sweeps on a held-out split of a synthetic corpus,
written as two TSV tables (threshold at k=10, k at threshold 0.75) plus the
full grid.

    python scripts/sweep_tables.py --out results/
"""

import argparse
from pathlib import Path

from gstned.embeddings import embed_graph
from gstned.evaluation import sweep, sweep_tsv
from gstned.pipeline import Linker, PipelineConfig
from gstned.synthetic import SyntheticParams, generate_synthetic

THRESHOLDS = (0.70, 0.75, 0.80, 0.85, 0.90)
KS = (1, 5, 10, 20, 50)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--noise", type=float, default=0.25)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n-docs", type=int, default=100)
    ap.add_argument("--held-out", type=float, default=0.1)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    kg, docs = generate_synthetic(SyntheticParams(n_docs=args.n_docs, noise=args.noise, seed=args.seed))
    cfg = PipelineConfig(seed=args.seed)
    linker = Linker(kg, embed_graph(kg, cfg.walk), cfg)
    grid = [(t, k, "GstCount") for t in THRESHOLDS for k in KS]
    rows = sweep(grid, linker, docs, args.held_out)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "sweep_grid.tsv").write_text(sweep_tsv(rows), encoding="utf-8")
    by_threshold = [r for r in rows if r.k == 10]
    by_k = [r for r in rows if r.threshold == 0.75]
    (args.out / "sweep_threshold.tsv").write_text(sweep_tsv(by_threshold), encoding="utf-8")
    (args.out / "sweep_k.tsv").write_text(sweep_tsv(by_k), encoding="utf-8")
    print(sweep_tsv(by_threshold), end="")
    print(sweep_tsv(by_k), end="")


if __name__ == "__main__":
    main()
