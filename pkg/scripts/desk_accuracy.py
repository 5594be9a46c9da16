"""Accuracy and speedup of every operator across sampling ratios on a desk-scale BA dataset.

    python scripts/desk_accuracy.py --out results/desk_accuracy.csv
"""
import argparse
import logging
import time

from graphop.datagen import BAParams, generate_dataset
from graphop.evaluation import report_rows, run_experiment, write_report_csv
from graphop.modeling import ModelConfig
from graphop.similarity import MeasureConfig, all_pairs_matrix


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--graphs", type=int, default=200)
    ap.add_argument("--vertices", type=int, default=500)
    ap.add_argument("--ratios", default="0.05,0.1,0.2")
    ap.add_argument("--ops", default="sr,ec,bc,ebc,cc,pr")
    ap.add_argument("--measure", default="level0")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="desk_accuracy.csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    ds = generate_dataset(args.graphs, BAParams(args.vertices, 1, 32), seed=args.seed)
    cfg = MeasureConfig.parse(args.measure)
    t0 = time.perf_counter()
    R = all_pairs_matrix(ds, cfg, args.workers)
    matrix_seconds = time.perf_counter() - t0
    logging.info("matrix: %d graphs in %.1fs", len(ds), matrix_seconds)

    first = True
    for p in map(float, args.ratios.split(",")):
        model = ModelConfig(p, 3, args.seed)
        reps = run_experiment(ds, args.ops, cfg, model, seed=args.seed, workers=args.workers,
                              matrix=R, matrix_seconds=matrix_seconds)
        write_report_csv(report_rows(reps, ds.name, cfg, model, R), args.out, append=not first)
        first = False
        print(f"p={p:.2f}  " + "  ".join(f"{r.operator.value}={r.mdape:.2f}%" for r in reps))


if __name__ == "__main__":
    main()
