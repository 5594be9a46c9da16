"""Command-line workbench: ``gen``, ``matrix`` and ``run`` subcommands."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .datagen import BAParams, generate_dataset
from .errors import ConfigError, ConvergenceError, GraphOpError, InfeasibleQuotaError, ParseError
from .evaluation import build_matrix, report_rows, run_experiment, write_report_csv
from .graph import load_dataset, save_dataset
from .modeling import ModelConfig, write_model_csv
from .operators import DEFAULT_DAMPING, OperatorKind
from .similarity import MeasureConfig, default_cluster_count, export_csv, load_matrix, save_matrix

log = logging.getLogger("graphop")

OUT_ENV = "GRAPHOP_OUT"

EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, EXIT_QUOTA, EXIT_OTHER = 2, 3, 4, 5, 1


@dataclass
class RunConfig:
    dataset: str = ""
    measure: str = "level0"
    weights: list[float] | None = None
    sample_ratio: float = 0.1
    leaf_capacity: int = 32
    p: float = 0.1
    k: int = 3
    clustered: bool = False
    clusters: str = "auto"
    ops: str = "sr,ec,bc,ebc,cc,pr"
    damping: float = DEFAULT_DAMPING
    eval_fraction: float = 0.2
    seed: int = 0
    workers: int = 1
    matrix: str | None = None
    out: str = ""

    def measure_config(self) -> MeasureConfig:
        return MeasureConfig.parse(self.measure, self.weights, sample_ratio=self.sample_ratio,
                                   leaf_capacity=self.leaf_capacity, seed=self.seed)

    def resolve_clusters(self, n: int) -> int | None:
        if not self.clustered:
            return None
        if self.clusters == "auto":
            return default_cluster_count(n)
        try:
            c = int(self.clusters)
        except ValueError:
            raise ConfigError(f"--clusters must be 'auto' or an integer, got {self.clusters!r}") from None
        if c < 1:
            raise ConfigError("--clusters must be positive")
        return c


def _weights(text):
    try:
        return [float(w) for w in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad weight list {text!r}") from None


def _outdegree_range(text):
    lo, sep, hi = text.partition(":")
    try:
        return int(lo), int(hi if sep else lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def _add_measure_flags(p):
    p.add_argument("--measure", help="level<L>, size, or a '+'-joined composite such as level0+size")
    p.add_argument("--weights", type=_weights, help="composite weights, e.g. 0.5,0.5")
    p.add_argument("--sample-ratio", type=float, help="fraction of vertices used to build the k-d tree")
    p.add_argument("--leaf-capacity", type=int, help="max sampled points per k-d tree leaf")
    p.add_argument("--clustered", action="store_true", default=None, help="use the clustered (block) matrix")
    p.add_argument("--clusters", help="cluster count or 'auto' (= ceil(sqrt(N)))")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="parallel workers (results do not depend on it)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphop", description=__doc__, allow_abbrev=False)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a Barabási–Albert dataset")
    g.add_argument("--n", type=int, required=True, help="number of graphs")
    g.add_argument("--v", type=int, required=True, help="vertices per graph")
    g.add_argument("--m", type=_outdegree_range, default=(1, 32), help="initial outdegree range LO:HI")
    g.add_argument("--per-graph", action="store_true", help="draw one outdegree per graph instead of per vertex")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--name", default="ba")
    g.add_argument("--out", required=True, help="output dataset directory")

    m = sub.add_parser("matrix", help="build and save a similarity matrix")
    m.add_argument("--dataset", required=True)
    _add_measure_flags(m)
    m.add_argument("--out", required=True, help="binary matrix file")
    m.add_argument("--csv", help="also export the stored entries as CSV")

    r = sub.add_parser("run", help="model operators end to end and write reports")
    r.add_argument("--config", help="JSON run config (explicit flags override it)")
    r.add_argument("--dataset")
    _add_measure_flags(r)
    r.add_argument("--ops", help="comma-separated operators: " + ",".join(k.value for k in OperatorKind))
    r.add_argument("--p", type=float, help="sampling ratio")
    r.add_argument("--k", type=int, help="neighbours for kNN")
    r.add_argument("--damping", type=float, help="PageRank damping")
    r.add_argument("--eval-fraction", type=float)
    r.add_argument("--matrix", help="reuse a matrix saved by the 'matrix' command")
    r.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./graphop_out)")
    return parser


def _merge(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        unknown = set(data) - {f.name for f in fields(RunConfig)}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = RunConfig(**data)
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            setattr(cfg, f.name, val)
    if not cfg.out:
        cfg.out = os.environ.get(OUT_ENV, "graphop_out")
    if not cfg.dataset:
        raise ConfigError("no dataset given")
    if cfg.workers < 1:
        raise ConfigError("--workers must be at least 1")
    return cfg


def cmd_gen(args) -> int:
    lo, hi = args.m
    params = BAParams(args.v, lo, hi, args.seed, args.per_graph)
    ds = generate_dataset(args.n, params, seed=args.seed, name=args.name)
    save_dataset(ds, args.out)
    print(f"wrote {len(ds)} graphs to {args.out}")
    return 0


def cmd_matrix(args) -> int:
    cfg = _merge(args)
    ds = load_dataset(cfg.dataset)
    c = cfg.resolve_clusters(len(ds))
    measure = cfg.measure_config()
    t0 = time.perf_counter()
    mat = build_matrix(ds, measure, cfg.clustered, c, cfg.seed, cfg.workers)
    elapsed = time.perf_counter() - t0
    save_matrix(mat, args.out)
    if args.csv:
        export_csv(mat, args.csv)
    print(json.dumps({"dataset": cfg.dataset, "measure": measure.name, "n": len(ds),
                      "structure": mat.structure, "clusters": mat.cluster_count,
                      "evaluations": mat.evaluations, "seconds": round(elapsed, 3)}))
    return 0


def cmd_run(args) -> int:
    cfg = _merge(args)
    ds = load_dataset(cfg.dataset)
    c = cfg.resolve_clusters(len(ds))
    if c is not None:
        cfg.clusters = str(c)
    measure = cfg.measure_config()
    model = ModelConfig(cfg.p, cfg.k, cfg.seed)
    kinds = OperatorKind.parse(cfg.ops)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    resolved = asdict(cfg)
    print(json.dumps(resolved, sort_keys=True))
    (out / "config.json").write_text(json.dumps(resolved, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")

    matrix = None
    if cfg.matrix:
        matrix = load_matrix(cfg.matrix)
        if matrix.n != len(ds):
            raise ConfigError(f"matrix {cfg.matrix} has N={matrix.n}, dataset has {len(ds)} graphs")
    t0 = time.perf_counter()
    if matrix is None:
        matrix = build_matrix(ds, measure, cfg.clustered, c, cfg.seed, cfg.workers)
    matrix_seconds = time.perf_counter() - t0
    save_matrix(matrix, out / "matrix.bin")

    reports = run_experiment(ds, kinds, measure, model, eval_fraction=cfg.eval_fraction,
                             seed=cfg.seed, damping=cfg.damping, workers=cfg.workers,
                             matrix=matrix, matrix_seconds=matrix_seconds)
    for rep in reports:
        write_model_csv(rep.approximation, ds.names, out / f"model_{rep.operator.value}.csv")
    write_report_csv(report_rows(reports, ds.name, measure, model, matrix), out / "report.csv")
    for rep in reports:
        print(f"{rep.operator.value}: mdape={rep.mdape:.3f}% nrmse={rep.nrmse:.4f} "
              f"speedup={rep.speedup:.2f}x amortized={rep.amortized_speedup:.2f}x")
    return 0


COMMANDS = {"gen": cmd_gen, "matrix": cmd_matrix, "run": cmd_run}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        category, code, msg = "config", EXIT_CONFIG, str(exc)
    except InfeasibleQuotaError as exc:
        category, code, msg = "infeasible-quota", EXIT_QUOTA, str(exc)
    except (OSError, ParseError, json.JSONDecodeError) as exc:
        category, code, msg = "io", EXIT_IO, str(exc)
    except (ConvergenceError, FloatingPointError) as exc:
        category, code, msg = "numeric", EXIT_NUMERIC, str(exc)
    except GraphOpError as exc:
        category, code, msg = "error", EXIT_OTHER, str(exc)
    print(f"graphop: {category} error: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
