"""Plain-text file formats.

Matrix files hold the order ``n`` on the first line and then ``n`` rows of
comma-separated values. Observation files start with an ``N,M`` header
followed by N rows of M values. Floats are written with 17 significant
digits so values survive a round trip bit for bit.
"""
import csv
import math
from pathlib import Path

import numpy as np

from .errors import InvalidInput
from .signals import ObservationSet


def fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    return str(value)


def _read_numbers(lines, width, what):
    rows = []
    for line in lines:
        parts = [p for p in line.strip().split(",")]
        if len(parts) != width:
            raise InvalidInput(f"{what}: expected {width} values per row, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise InvalidInput(f"{what}: {exc}") from None
    return np.array(rows, dtype=float)


def _content_lines(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from None
    return [ln for ln in text.splitlines() if ln.strip()]


def write_matrix(path, a):
    a = np.asarray(a, dtype=float)
    lines = [str(a.shape[0])] + [",".join(fmt(v) for v in row) for row in a]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path):
    lines = _content_lines(path)
    if not lines:
        raise InvalidInput(f"{path}: empty matrix file")
    try:
        n = int(lines[0])
    except ValueError:
        raise InvalidInput(f"{path}: first line must be the matrix order") from None
    if len(lines) - 1 != n:
        raise InvalidInput(f"{path}: expected {n} rows, got {len(lines) - 1}")
    return _read_numbers(lines[1:], n, str(path))


def write_observations(path, obs):
    x = obs.x if isinstance(obs, ObservationSet) else np.asarray(obs, dtype=float)
    lines = [f"{x.shape[0]},{x.shape[1]}"] + [",".join(fmt(v) for v in row) for row in x]
    Path(path).write_text("\n".join(lines) + "\n")


def read_observations(path):
    lines = _content_lines(path)
    try:
        n, m = (int(v) for v in lines[0].split(","))
    except (ValueError, IndexError):
        raise InvalidInput(f"{path}: header must be 'N,M'") from None
    if len(lines) - 1 != n:
        raise InvalidInput(f"{path}: expected {n} rows, got {len(lines) - 1}")
    return ObservationSet(x=_read_numbers(lines[1:], m, str(path)))


def write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def read_table(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def write_grid(path, grid):
    write_table(path, ["lambda2", "lambda3", "member"], grid)


def write_roc(path, roc):
    write_table(path, ["threshold", "fpr", "tpr"], roc)


def write_constraints(path, c):
    """One row per constraint: entry indices followed by the coefficients."""
    header = ["i", "j"] + [f"alpha{k}" for k in range(c.n)]
    rows = [[int(i), int(j), *alpha] for i, j, alpha in zip(c.rows, c.cols, c.alpha)]
    write_table(path, header, rows)


def write_lp(path, lp):
    """Objective row, then one constraint row per line in ``coeffs >= lower`` form."""
    header = ["kind", "rhs"] + [f"x{k}" for k in range(lp.n_vars)]
    rows = [["objective", 0.0, *lp.cost]]
    rows += [["ge", lo, *row] for row, lo in zip(lp.rows, lp.lower)]
    rows += [["fixed", v, *np.eye(lp.n_vars)[k]] for k, v in sorted(lp.fixed.items())]
    write_table(path, header, rows)


def write_projection(path, result):
    """``distance,converged,iterations`` summary plus a sibling eigenvalue file."""
    write_table(path, ["distance", "converged", "iterations"],
                [[result.distance, result.converged, result.iterations]])
    path = Path(path)
    write_table(path.with_name(path.stem + "_lambda.csv"), ["lambda"], [[v] for v in result.lam_hat])
