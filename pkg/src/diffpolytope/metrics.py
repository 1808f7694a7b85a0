"""Errors between a recovered diffusion matrix and the ground truth."""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InvalidInput, Undefined
from .matcore import l11_norm, trace

INT_POWERS = np.arange(1, 41)
REAL_POWERS = np.round(np.arange(0.1, 40.0 + 1e-9, 0.05), 10)


@dataclass(frozen=True)
class EdgeScore:
    precision: float
    recall: float
    f_measure: float
    threshold: float
    roc: list


@dataclass(frozen=True)
class RepreResult:
    value: float
    power: float
    integer_value: float
    integer_power: int
    real_value: float
    real_power: float


def _pair(t, t_hat):
    t = np.asarray(t, dtype=float)
    t_hat = np.asarray(t_hat, dtype=float)
    if t.shape != t_hat.shape or t.ndim != 2:
        raise InvalidInput(f"shape mismatch {t.shape} vs {t_hat.shape}")
    return t, t_hat


def mepre(t, t_hat):
    """Mean error per reconstructed entry of the Frobenius-normalized matrices."""
    t, t_hat = _pair(t, t_hat)
    nt, nh = np.linalg.norm(t), np.linalg.norm(t_hat)
    if nt == 0 or nh == 0:
        raise Undefined("MEPRE is undefined for a zero matrix")
    return float(np.linalg.norm(t / nt - t_hat / nh) / t.shape[0])


def _repre_at(lam, target, power, n):
    powered = np.sign(lam) * np.abs(lam) ** power
    top = np.abs(powered).max()
    if top == 0:
        return math.inf
    return float(np.linalg.norm(powered / top - target) / n)


def repre_search(lam, lam_hat):
    """REPRE with the minimizing power and the best value of each search family.

    Integer powers 1..40 use ordinary powers; the real family scans 0.1..40
    in steps of 0.05 with the signed power ``sign(x) |x|**K`` and refines the
    best cell by bounded golden-section search.
    """
    lam = np.asarray(lam, dtype=float)
    lam_hat = np.asarray(lam_hat, dtype=float)
    if lam.shape != lam_hat.shape or lam.ndim != 1:
        raise InvalidInput("eigenvalue vectors must have the same length")
    top_hat = np.abs(lam_hat).max()
    if top_hat == 0 or np.abs(lam).max() == 0:
        raise Undefined("REPRE is undefined for a zero eigenvalue vector")
    n = lam.size
    target = lam_hat / top_hat

    int_vals = []
    for k in INT_POWERS:
        powered = lam ** int(k)
        top = np.abs(powered).max()
        int_vals.append(math.inf if top == 0 else float(np.linalg.norm(powered / top - target) / n))
    best_int = int(np.argmin(int_vals))

    grid_vals = np.array([_repre_at(lam, target, p, n) for p in REAL_POWERS])
    g = int(np.argmin(grid_vals))
    real_power, real_val = float(REAL_POWERS[g]), float(grid_vals[g])
    lo = REAL_POWERS[max(g - 1, 0)]
    hi = REAL_POWERS[min(g + 1, REAL_POWERS.size - 1)]
    if hi > lo:
        res = minimize_scalar(lambda p: _repre_at(lam, target, p, n), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-6})
        if res.fun < real_val:
            real_power, real_val = float(res.x), float(res.fun)

    int_val, int_pow = int_vals[best_int], int(INT_POWERS[best_int])
    if int_val <= real_val:
        value, power = int_val, float(int_pow)
    else:
        value, power = real_val, real_power
    return RepreResult(value=value, power=power, integer_value=int_val, integer_power=int_pow,
                       real_value=real_val, real_power=real_power)


def repre(lam, lam_hat):
    """Reconstruction error of the powered eigenvalues, minimized over the power."""
    return repre_search(lam, lam_hat).value


def _support_pairs(n):
    return np.triu_indices(n)


def _counts(truth, scores, threshold):
    retrieved = scores > threshold
    tp = int(np.count_nonzero(retrieved & truth))
    fp = int(np.count_nonzero(retrieved & ~truth))
    return tp, fp, int(np.count_nonzero(retrieved))


def _prf(tp, n_retrieved, n_true):
    precision = tp / n_retrieved if n_retrieved else 0.0
    recall = tp / n_true if n_true else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f


def edge_score(t, t_hat):
    """Best F-measure over all thresholds of ``t_hat``, plus the full ROC sweep.

    Entries ``(i, j)`` with ``i <= j`` are compared: ground-truth positives
    are the strictly positive entries of ``t`` and an entry is retrieved when
    ``t_hat`` exceeds the threshold. Thresholds run over ``-inf``, every
    distinct value of ``t_hat`` and ``+inf``; the first maximizer wins.
    """
    t, t_hat = _pair(t, t_hat)
    iu = _support_pairs(t.shape[0])
    truth = t[iu] > 0
    scores = t_hat[iu]
    n_true = int(truth.sum())
    n_false = truth.size - n_true
    thresholds = np.concatenate([[-np.inf], np.unique(scores), [np.inf]])

    # one pass over sorted scores: entries strictly above each threshold
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    cum_true = np.concatenate([[0], np.cumsum(truth[order])])
    best = (-1.0, 0.0, 0.0, 0.0)
    roc = []
    for thr in thresholds:
        above = int(np.searchsorted(-sorted_scores, -thr, side="left"))
        tp = int(cum_true[above])
        fp = above - tp
        precision, recall, f = _prf(tp, above, n_true)
        roc.append((float(thr), fp / n_false if n_false else 0.0, tp / n_true if n_true else 0.0))
        if f > best[0]:
            best = (f, precision, recall, float(thr))
    roc.sort(key=lambda p: p[0], reverse=True)
    f, precision, recall, thr = best
    return EdgeScore(precision=precision, recall=recall, f_measure=f, threshold=thr, roc=roc)


def edge_score_at(t, t_hat, threshold):
    """Precision, recall and F-measure of ``t_hat`` binarized at one threshold."""
    t, t_hat = _pair(t, t_hat)
    iu = _support_pairs(t.shape[0])
    truth = t[iu] > 0
    tp, _, n_ret = _counts(truth, t_hat[iu], threshold)
    return _prf(tp, n_ret, int(truth.sum()))


def diff_simple(t_true, t_hat):
    t_true, t_hat = _pair(t_true, t_hat)
    return (trace(t_hat) - trace(t_true)) / t_true.shape[0]


def diff_sparse(t_true, t_hat):
    t_true, t_hat = _pair(t_true, t_hat)
    return (l11_norm(t_hat) - l11_norm(t_true)) / t_true.shape[0] ** 2
