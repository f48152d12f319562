"""All ranking schemes on one synthetic corpus from a single solve per document.

    python scripts/scheme_comparison.py --noise 0.5 --seed 0
"""

import argparse

from gstned.embeddings import embed_graph
from gstned.evaluation import compare_schemes, scheme_table, unanimity_cases
from gstned.pipeline import Linker, PipelineConfig
from gstned.synthetic import SyntheticParams, generate_synthetic


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--noise", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n-docs", type=int, default=50)
    args = ap.parse_args()

    kg, docs = generate_synthetic(SyntheticParams(n_docs=args.n_docs, noise=args.noise, seed=args.seed))
    cfg = PipelineConfig(seed=args.seed)
    linker = Linker(kg, embed_graph(kg, cfg.walk), cfg)
    rows, per = compare_schemes(linker, docs)
    print(scheme_table(rows), end="")
    cases = unanimity_cases(per["GST count"])
    print(f"unanimity cases: {len(cases)} of {sum(len(d.mentions) for d in docs)} mentions")


if __name__ == "__main__":
    main()
