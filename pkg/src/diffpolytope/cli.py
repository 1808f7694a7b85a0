"""Command-line entry point.

Exit status is 0 on success, 2 on invalid input (bad files, parameters or
configs) and 3 when a solver fails (infeasible LP, iteration cap, stalled
projection).
"""
import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import csvio
from .config import EXPERIMENTS, default_config, load_config
from .errors import GenerationFailed, Infeasible, InvalidInput, NumericalFailure
from .experiments import make_graph, mark_incomplete, polytope_grid, run_experiment, write_result
from .graphs import GEOMETRIES, diffusion_operator
from .selection import (constraints_for, hypothesis_test, normalize_candidate, project_candidate,
                        selected_matrix, solve_simple, solve_sparse)
from .signals import SOURCES, generate_observations

log = logging.getLogger("diffpolytope")

EXIT_INVALID = 2
EXIT_SOLVER = 3


def _common(parser):
    parser.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    parser.add_argument("--out-dir", default=".", help="directory for output files")
    parser.add_argument("--trials", type=int, default=None, help="override the trial count")
    parser.add_argument("--tolerance", type=float, default=None, help="membership tolerance")


def _graph_args(parser):
    parser.add_argument("--model", choices=["rg", "er", "ring", "dense"], default="rg")
    parser.add_argument("--n", type=int, default=10)
    parser.add_argument("--r", type=float, default=0.6, help="random geometric radius")
    parser.add_argument("--p", type=float, default=0.3, help="Erdős–Rényi edge probability")
    parser.add_argument("--geometry", choices=sorted(GEOMETRIES), default="torus")


def _signal_args(parser, k_min=1, k_max=10):
    parser.add_argument("--m", type=int, default=1000, help="number of signals")
    parser.add_argument("--k-min", type=int, default=k_min)
    parser.add_argument("--k-max", type=int, default=k_max)
    parser.add_argument("--source", choices=SOURCES, default="uniform")


def build_parser():
    parser = argparse.ArgumentParser(prog="diffpolytope",
                                     description="Diffusion-matrix polytopes from stationary graph signals.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="draw a random adjacency matrix")
    _common(p)
    _graph_args(p)
    p.add_argument("--operator", action="store_true", help="write the diffusion operator instead of W")
    p.add_argument("--output", default="graph.csv")

    p = sub.add_parser("gen-signals", help="diffuse random signals on a graph")
    _common(p)
    p.add_argument("--graph", required=True, help="adjacency matrix CSV")
    _signal_args(p)
    p.add_argument("--output", default="signals.csv")

    p = sub.add_parser("infer", help="select a diffusion matrix from observed signals")
    _common(p)
    p.add_argument("--signals", required=True, help="observation CSV")
    p.add_argument("--strategy", choices=["simple", "sparse"], default="simple")
    p.add_argument("--output", default="inferred.csv")

    p = sub.add_parser("project", help="closest admissible matrix to a candidate")
    _common(p)
    p.add_argument("--signals", required=True)
    p.add_argument("--candidate", required=True, help="candidate diffusion matrix CSV")
    p.add_argument("--output", default="projection.csv")

    p = sub.add_parser("rank", help="rank candidate matrices by distance to the polytope")
    _common(p)
    p.add_argument("--signals", required=True)
    p.add_argument("--candidates", required=True, help="directory of candidate matrix CSVs")
    p.add_argument("--output", default="ranking.csv")

    p = sub.add_parser("grid", help="membership grid of an order-3 polytope")
    _common(p)
    p.add_argument("--graph", help="3x3 adjacency CSV (default: random dense graph)")
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--repetitions", type=int, default=0, help="sample-covariance repetitions")
    _signal_args(p, k_min=2, k_max=5)
    p.add_argument("--exact", action="store_true", help="use exact eigenvectors for the repetitions")

    p = sub.add_parser("experiment", help="run a Monte-Carlo experiment")
    _common(p)
    p.add_argument("name", choices=[e for e in EXPERIMENTS if e != "grid"])
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--workers", type=int, default=None)
    return parser


def _out(args, name):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def cmd_gen_graph(args):
    rng = np.random.default_rng(args.seed or 0)
    adj = make_graph(args.model, args.n, rng, r=args.r, p=args.p, geometry=args.geometry)
    matrix = diffusion_operator(adj).t if args.operator else adj.w
    path = _out(args, args.output)
    csvio.write_matrix(path, matrix)
    print(f"wrote {path} ({args.model}, n={args.n}, rejected draws={adj.rejected})")


def cmd_gen_signals(args):
    op = diffusion_operator(csvio.read_matrix(args.graph))
    obs = generate_observations(op, args.m, args.k_min, args.k_max, args.source,
                                rng=np.random.default_rng(args.seed or 0))
    path = _out(args, args.output)
    csvio.write_observations(path, obs)
    print(f"wrote {path} ({obs.n} x {obs.m})")


def cmd_infer(args):
    c = constraints_for(csvio.read_observations(args.signals))
    sel = (solve_simple if args.strategy == "simple" else solve_sparse)(c)
    path = _out(args, args.output)
    csvio.write_matrix(path, selected_matrix(c, sel))
    csvio.write_table(path.with_name(path.stem + "_lambda.csv"), ["lambda"], [[v] for v in sel.lam])
    print(f"{args.strategy}: objective {sel.objective:.12g}, {sel.iterations} pivots"
          + (", degenerate optimum" if sel.degenerate else ""))
    print(f"wrote {path}")


def cmd_project(args):
    c = constraints_for(csvio.read_observations(args.signals))
    result = project_candidate(c, normalize_candidate(csvio.read_matrix(args.candidate)))
    path = _out(args, args.output)
    csvio.write_projection(path, result)
    print(f"distance {result.distance:.12g} after {result.iterations} sweeps")


def cmd_rank(args):
    files = sorted(Path(args.candidates).glob("*.csv"))
    if not files:
        raise InvalidInput(f"no candidate CSV files in {args.candidates}")
    ranking = hypothesis_test([csvio.read_matrix(f) for f in files], csvio.read_observations(args.signals))
    path = _out(args, args.output)
    csvio.write_table(path, ["rank", "file", "distance", "error"],
                      [[i + 1, files[e.index].name, e.distance, e.error or ""] for i, e in enumerate(ranking)])
    for i, e in enumerate(ranking[:5]):
        print(f"{i + 1}. {files[e.index].name}  {e.distance:.6g}")


def cmd_grid(args):
    rng = np.random.default_rng(args.seed or 0)
    if args.graph:
        w = csvio.read_matrix(args.graph)
    else:
        w = make_graph("dense", 3, rng).w
    tol = 1e-9 if args.tolerance is None else args.tolerance
    result = polytope_grid(w, step=args.step, repetitions=args.repetitions,
                           m=math.inf if args.exact else args.m, k_min=args.k_min, k_max=args.k_max,
                           source=args.source, tol=tol, rng=rng)
    csvio.write_grid(_out(args, "grid.csv"), result.grid)
    if result.histogram:
        csvio.write_table(_out(args, "grid_histogram.csv"), ["lambda2", "lambda3", "count"], result.histogram)
    csvio.write_table(_out(args, "grid_truth.csv"), ["lambda"], [[v] for v in result.lam_true])
    inside = sum(m for _, _, m in result.grid)
    print(f"{inside} of {len(result.grid)} grid points admissible; wrote {args.out_dir}")


def cmd_experiment(args):
    cfg = load_config(args.config) if args.config else default_config(args.name)
    if args.config and cfg.experiment != args.name:
        raise InvalidInput(f"config is for {cfg.experiment!r}, not {args.name!r}")
    if args.trials is not None:
        cfg.trials = args.trials
    if args.tolerance is not None:
        cfg.tolerance = args.tolerance
    if args.workers is not None:
        cfg.workers = args.workers
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out_dir != ".":
        cfg.out_dir = args.out_dir

    def progress(rec):
        log.info("trial %d done in %.2fs", rec.trial, rec.seconds)

    try:
        result = run_experiment(cfg, progress=progress)
    except Exception as exc:
        mark_incomplete(cfg, exc)
        raise
    path = write_result(result, cfg)
    print(f"wrote {path}")


COMMANDS = {
    "gen-graph": cmd_gen_graph,
    "gen-signals": cmd_gen_signals,
    "infer": cmd_infer,
    "project": cmd_project,
    "rank": cmd_rank,
    "grid": cmd_grid,
    "experiment": cmd_experiment,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (InvalidInput, GenerationFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (Infeasible, NumericalFailure) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return 0


if __name__ == "__main__":
    sys.exit(main())
