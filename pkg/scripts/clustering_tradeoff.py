"""Evaluation budget versus accuracy of the clustered matrix for a range of cluster counts.

    python scripts/clustering_tradeoff.py --graphs 1024 --clusters 1,8,16,32,64
"""
import argparse
import csv

from graphop.datagen import BAParams, generate_dataset
from graphop.evaluation import run_experiment
from graphop.modeling import ModelConfig
from graphop.similarity import MeasureConfig, all_pairs_matrix, clustered_matrix, prepare_measure


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--graphs", type=int, default=1024)
    ap.add_argument("--vertices", type=int, default=500)
    ap.add_argument("--clusters", default="8,16,32,64")
    ap.add_argument("--ops", default="ec,cc,sr")
    ap.add_argument("--p", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=6)
    ap.add_argument("--out", default="clustering_tradeoff.csv")
    args = ap.parse_args()

    ds = generate_dataset(args.graphs, BAParams(args.vertices, 1, 32), seed=args.seed)
    cfg = MeasureConfig.parse("level0")
    model = ModelConfig(args.p, 3, 0)
    scorer = prepare_measure(ds, cfg)
    dense_pairs = len(ds) * (len(ds) - 1) // 2

    matrices = [("dense", all_pairs_matrix(ds, cfg, scorer=scorer))]
    matrices += [(c, clustered_matrix(ds, cfg, c=int(c), seed=0, scorer=scorer))
                 for c in args.clusters.split(",")]
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["clusters", "operator", "evaluations", "evaluation_share", "mdape", "nrmse"])
        for c, R in matrices:
            for r in run_experiment(ds, args.ops, cfg, model, seed=0, matrix=R):
                share = R.evaluations / dense_pairs
                w.writerow([c, r.operator.value, R.evaluations, share, r.mdape, r.nrmse])
                print(f"c={c:>5}  {r.operator.value:>3}  evals {100 * share:5.1f}%  "
                      f"MdAPE {r.mdape:6.2f}%")


if __name__ == "__main__":
    main()
