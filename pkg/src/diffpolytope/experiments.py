"""Seeded Monte-Carlo experiments and their CSV reports.

Every trial draws from its own generator, seeded from a hash of the master
seed, the experiment name and the trial index, so adding trials never
changes the earlier ones and results do not depend on scheduling. Trials
produce flat records; aggregation groups them by key columns and reports
mean, sample standard deviation, trial count and failure count for every
metric.
"""
import hashlib
import logging
import math
import time
import traceback
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from . import csvio
from .config import ExperimentConfig, dump_config
from .errors import DiffPolytopeError, GenerationFailed, InvalidInput
from .graphs import diffusion_operator, erdos_renyi, random_geometric, ring, uniform_dense
from .metrics import diff_simple, diff_sparse, edge_score, mepre, repre
from .polytope import align_eigenvalues, build_constraints, grid_slice_2d, is_member, reconstruct
from .selection import normalize_candidate, rank_candidates, solve_simple, solve_sparse
from .signals import covariance_estimate, propagate_covariance, source_covariance, stream_covariance

log = logging.getLogger(__name__)

ROC_GRID = np.round(np.linspace(0.0, 1.0, 101), 10)
STRATEGIES = {"simple": solve_simple, "sparse": solve_sparse}


@dataclass
class TrialRecord:
    trial: int
    seed: int
    rows: list
    seconds: float = 0.0


@dataclass
class ExperimentResult:
    name: str
    keys: list
    metrics: list
    summary: list
    trials: list
    extra: dict = field(default_factory=dict)

    def summary_header(self):
        header = list(self.keys)
        for m in self.metrics:
            header += [m, f"{m}_std"]
        return header + ["trials", "failures"]


def trial_seed(master, name, index):
    digest = hashlib.sha256(f"{master}:{name}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _rng(seed, *tags):
    """Child generator for one stage of a trial; ``tags`` name the stage."""
    words = [seed & 0xFFFFFFFF, seed >> 32]
    for tag in tags:
        if isinstance(tag, float):
            tag = -1 if math.isinf(tag) else int(tag)
        words.append(int(tag) & 0xFFFFFFFF)
    return np.random.default_rng(words)


def make_graph(model, n, rng, *, r=0.6, p=0.3, geometry="torus"):
    if model == "rg":
        return random_geometric(n, r, rng, geometry)
    if model == "er":
        return erdos_renyi(n, p, rng)
    if model == "ring":
        return ring(n)
    if model == "dense":
        return uniform_dense(n, rng)
    raise InvalidInput(f"unknown graph model {model!r}")


def scaled_params(cfg, n):
    """Radius shrinking like 1/sqrt(N) from (cfg.n, cfg.r); probability ``p_factor * log N / N``."""
    r = cfg.r * math.sqrt(cfg.n / n)
    p = min(1.0, cfg.p_factor * math.log(n) / n)
    return r, p


def _is_exact(m):
    return isinstance(m, float) and math.isinf(m)


def recovery_metrics(op, c, selection):
    """MEPRE, REPRE, trace/sparsity gaps and edge scores for one recovered matrix."""
    t_hat = reconstruct(c, selection.lam)
    lam_true = align_eigenvalues(op.basis, c)
    score = edge_score(op.t, t_hat)
    return {
        "mepre": mepre(op.t, t_hat),
        "repre": repre(lam_true, selection.lam),
        "diff_simple": diff_simple(op.t, t_hat),
        "diff_sparse": diff_sparse(op.t, t_hat),
        "recall": score.recall,
        "precision": score.precision,
        "f_measure": score.f_measure,
        "trace": float(np.trace(t_hat)),
        "degenerate": float(selection.degenerate),
    }, score.roc


def roc_on_grid(roc):
    """Highest TPR reachable at each false-positive rate of ``ROC_GRID``."""
    pts = np.array([(fpr, tpr) for _, fpr, tpr in roc])
    return np.array([pts[pts[:, 0] <= x + 1e-12, 1].max() for x in ROC_GRID])


# ---------------------------------------------------------------- trials

def _inclusion_trial(cfg, seed):
    graph = make_graph(cfg.model, cfg.n, _rng(seed, 0), r=cfg.r, p=cfg.p, geometry=cfg.geometry)
    op = diffusion_operator(graph)
    tolerances = [cfg.tolerance] + list(cfg.sensitivity_tolerances)
    rows = []
    for m in cfg.m_list:
        cov_y = None if _is_exact(m) else source_covariance(cfg.n, int(m), cfg.source,
                                                            rng=_rng(seed, 1, m), chunk=cfg.chunk)
        for k in cfg.k_list:
            if cov_y is None:
                basis = op.basis
            else:
                basis = covariance_estimate(propagate_covariance(cov_y.sigma, op.t, int(k)), int(m)).basis
            c = build_constraints(basis)
            lam = align_eigenvalues(op.basis, c)
            for tol in tolerances:
                rows.append({"K": int(k), "M": m, "tolerance": tol, "ratio": float(is_member(c, lam, tol))})
    return rows


def _recovery_trial(cfg, seed, *, model=None, n=None, strategies=None):
    model = model or cfg.model
    n = n or cfg.n
    r, p = (cfg.r, cfg.p) if n == cfg.n else scaled_params(cfg, n)
    graph = make_graph(model, n, _rng(seed, 0), r=r, p=p, geometry=cfg.geometry)
    op = diffusion_operator(graph)
    rows = []
    for m in cfg.m_list:
        if _is_exact(m):
            basis = op.basis
        else:
            basis = stream_covariance(op, int(m), cfg.k_min, cfg.k_max, cfg.source,
                                      rng=_rng(seed, 1, m), chunk=cfg.chunk).basis
        c = build_constraints(basis)
        for name in strategies or cfg.strategies:
            row = {"model": model, "N": n, "strategy": name, "M": m}
            try:
                values, roc = recovery_metrics(op, c, STRATEGIES[name](c))
            except DiffPolytopeError as exc:
                log.warning("trial seed %d, M=%s, %s: %s", seed, m, name, exc)
                row["failed"] = 1
                rows.append(row)
                continue
            row.update(values)
            row["_roc"] = roc_on_grid(roc)
            rows.append(row)
    return rows


def _scaling_trial(cfg, seed):
    rows = []
    for model in cfg.models:
        for n in cfg.n_list:
            sub = trial_seed(seed, model, n)
            try:
                rows += _recovery_trial(cfg, sub, model=model, n=int(n))
            except GenerationFailed as exc:
                log.warning("scaling %s N=%s: %s", model, n, exc)
                rows += [{"model": model, "N": int(n), "strategy": s, "M": m, "failed": 1}
                         for s in cfg.strategies for m in cfg.m_list]
    return rows


def _candidate_graph(cfg, index, rng):
    """Half random geometric, half Erdős–Rényi, parameter uniform in [low, high].

    A parameter whose draws never come out connected is redrawn.
    """
    model = "rg" if index < cfg.candidates // 2 else "er"
    while True:
        value = rng.uniform(cfg.param_low, cfg.param_high)
        try:
            return make_graph(model, cfg.n, rng, r=value, p=value, geometry=cfg.geometry)
        except GenerationFailed:
            log.debug("candidate %d: %s=%.3f never connected, redrawing", index, model, value)


def _hypothesis_trial(cfg, seed):
    graph_rng = _rng(seed, 0)
    ops = [diffusion_operator(_candidate_graph(cfg, i, graph_rng)) for i in range(cfg.candidates)]
    candidates = [normalize_candidate(op.t) for op in ops]
    rows = []
    for m in cfg.m_list:
        hits = 0
        failed = 0
        for i, op in enumerate(ops):
            if _is_exact(m):
                basis = op.basis
            else:
                basis = stream_covariance(op, int(m), cfg.k_min, cfg.k_max, cfg.source,
                                          rng=_rng(seed, 1, m, i), chunk=cfg.chunk).basis
            ranking = rank_candidates(build_constraints(basis), candidates, normalized=True)
            failed += sum(1 for e in ranking if e.error)
            hits += ranking[0].index == i
        rows.append({"M": m, "success_ratio": hits / len(ops), "candidate_failures": float(failed)})
    return rows


TRIALS = {
    "inclusion_ratio": (_inclusion_trial, ["K", "M", "tolerance"], ["ratio"]),
    "simple_convergence": (_recovery_trial, ["strategy", "M"],
                           ["mepre", "repre", "diff_simple", "recall", "precision", "f_measure", "trace",
                            "degenerate"]),
    "sparse_study": (_recovery_trial, ["strategy", "M"],
                     ["mepre", "repre", "diff_sparse", "recall", "precision", "f_measure", "degenerate"]),
    "scaling": (_scaling_trial, ["model", "N", "strategy", "M"], ["f_measure", "mepre"]),
    "hypothesis": (_hypothesis_trial, ["M"], ["success_ratio", "candidate_failures"]),
}


def _run_one(cfg, index):
    seed = trial_seed(cfg.seed, cfg.experiment, index)
    fn = TRIALS[cfg.experiment][0]
    start = time.perf_counter()
    try:
        rows = fn(cfg, seed)
    except GenerationFailed as exc:
        log.warning("trial %d skipped: %s", index, exc)
        rows = [{"failed": 1, "_skipped": 1}]
    return TrialRecord(trial=index, seed=seed, rows=rows, seconds=time.perf_counter() - start)


def _key_order(value):
    if isinstance(value, str):
        return (0, value)
    return (1, float(value))


def aggregate(records, keys, metrics):
    groups = defaultdict(list)
    skipped = 0
    for rec in records:
        for row in rec.rows:
            if row.get("_skipped"):
                skipped += 1
                continue
            groups[tuple(row[k] for k in keys)].append(row)
    summary = []
    for key in sorted(groups, key=lambda k: tuple(_key_order(v) for v in k)):
        rows = groups[key]
        ok = [r for r in rows if not r.get("failed")]
        out = list(key)
        for metric in metrics:
            values = np.array([r[metric] for r in ok], dtype=float)
            mean = float(values.mean()) if values.size else math.nan
            std = float(values.std(ddof=1)) if values.size > 1 else math.nan
            out += [mean, std]
        summary.append(out + [len(ok), len(rows) - len(ok) + skipped])
    return summary


def _mean_roc(records, keys):
    curves = defaultdict(list)
    for rec in records:
        for row in rec.rows:
            if "_roc" in row:
                curves[tuple(row[k] for k in keys)].append(row["_roc"])
    table = []
    for key in sorted(curves, key=lambda k: tuple(_key_order(v) for v in k)):
        mean = np.mean(curves[key], axis=0)
        table += [[*key, fpr, tpr] for fpr, tpr in zip(ROC_GRID, mean)]
    return table


def run_experiment(cfg, *, progress=None):
    """Run every trial of ``cfg`` and aggregate them, in trial-index order."""
    if cfg.experiment not in TRIALS:
        raise InvalidInput(f"experiment {cfg.experiment!r} is not a trial experiment")
    if cfg.trials < 1:
        raise InvalidInput("need at least one trial")
    _, keys, metrics = TRIALS[cfg.experiment]
    records = []
    run = partial(_run_one, cfg)
    try:
        if cfg.workers > 1:
            with ProcessPoolExecutor(cfg.workers) as pool:
                for rec in pool.map(run, range(cfg.trials)):
                    records.append(rec)
                    if progress:
                        progress(rec)
        else:
            for index in range(cfg.trials):
                rec = run(index)
                records.append(rec)
                if progress:
                    progress(rec)
    except Exception as exc:
        exc.partial_records = records
        raise
    result = ExperimentResult(name=cfg.experiment, keys=keys, metrics=metrics,
                              summary=aggregate(records, keys, metrics), trials=records)
    if cfg.experiment in ("simple_convergence", "sparse_study", "scaling"):
        roc_keys = [k for k in keys]
        result.extra["roc"] = (roc_keys + ["fpr", "tpr"], _mean_roc(records, roc_keys))
    return result


def _trial_rows(records, keys, metrics):
    for rec in records:
        for row in rec.rows:
            yield [rec.trial, rec.seed, *(row.get(k, "") for k in keys),
                   *(row.get(m, math.nan) for m in metrics), int(bool(row.get("failed")))]


def write_result(result, cfg, out_dir=None):
    """Write summary, per-trial, ROC and timing CSVs plus a column legend.

    Everything except the timing file is a deterministic function of the
    configuration.
    """
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = result.name
    header = result.summary_header()
    csvio.write_table(out / f"{name}.csv", header, result.summary)
    csvio.write_table(out / f"{name}_trials.csv",
                      ["trial", "seed", *result.keys, *result.metrics, "failed"],
                      _trial_rows(result.trials, result.keys, result.metrics))
    for extra, (ext_header, rows) in result.extra.items():
        csvio.write_table(out / f"{name}_{extra}.csv", ext_header, rows)
    csvio.write_table(out / f"{name}_timing.csv", ["trial", "seconds"],
                      [[r.trial, round(r.seconds, 6)] for r in result.trials])
    legend = [f"# {name}: columns of {name}.csv (gnuplot 'using' indices)"]
    legend += [f"{i}: {col}" for i, col in enumerate(header, 1)]
    legend += ["", "# configuration", dump_config(cfg)]
    (out / f"{name}.legend.txt").write_text("\n".join(legend))
    return out / f"{name}.csv"


def mark_incomplete(cfg, exc, out_dir=None):
    """Dump partial trial records and an INCOMPLETE marker after a crash."""
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = getattr(exc, "partial_records", [])
    _, keys, metrics = TRIALS[cfg.experiment]
    csvio.write_table(out / f"{cfg.experiment}_trials.csv", ["trial", "seed", *keys, *metrics, "failed"],
                      _trial_rows(records, keys, metrics))
    (out / f"{cfg.experiment}.INCOMPLETE").write_text(
        "".join(traceback.format_exception(type(exc), exc, exc.__traceback__)))


# ---------------------------------------------------------------- polytope grid

@dataclass
class GridResult:
    grid: list
    histogram: list
    lam_true: np.ndarray
    repetitions: int


def polytope_grid(w, step=0.01, repetitions=0, m=1000, k_min=2, k_max=5, source="uniform",
                  tol=1e-9, *, rng=None):
    """Exact-eigenvector membership grid of an order-3 graph, plus an optional histogram.

    With ``repetitions > 0`` the polytope is rebuilt from the sample covariance
    of ``repetitions`` independent signal sets and every grid point counts how
    many of those polytopes contain it. ``m = inf`` uses exact eigenvectors.
    """
    op = diffusion_operator(w)
    if op.n != 3:
        raise InvalidInput(f"grid needs an order-3 graph, got {op.n}")
    exact = build_constraints(op.basis)
    grid = grid_slice_2d(exact, step, tol)
    counts = np.zeros(len(grid), dtype=int)
    for _ in range(repetitions):
        if _is_exact(m):
            c = exact
        else:
            basis = stream_covariance(op, int(m), k_min, k_max, source, rng=rng).basis
            c = build_constraints(basis)
        counts += np.array([member for _, _, member in grid_slice_2d(c, step, tol)], dtype=int)
    histogram = [(a, b, int(n)) for (a, b, _), n in zip(grid, counts)] if repetitions else []
    return GridResult(grid=grid, histogram=histogram, lam_true=op.basis.values.copy(), repetitions=repetitions)
