"""Choosing a point in the polytope.

Two linear programs pick a vertex: *simple* minimizes the trace (sum of
eigenvalues) and *sparse* minimizes the entry sum of the reconstruction.
A third strategy projects an externally supplied matrix onto the polytope
and reports how far it had to move, which ranks candidate matrices by how
well they explain a set of observations.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import qp
from .errors import DiffPolytopeError, InvalidInput, NonConvergence
from .lp import LinearProgram, solve_lp
from .matcore import Eigenbasis, eig_sym, sym_matrix
from .polytope import PolytopeConstraints, build_constraints, reconstruct
from .signals import CovarianceEstimate, ObservationSet, sample_covariance


@dataclass(frozen=True)
class Selection:
    """Eigenvalue vector chosen by one of the LP strategies."""

    lam: np.ndarray
    objective: float
    iterations: int
    degenerate_columns: int

    @property
    def degenerate(self):
        return self.degenerate_columns > 0


@dataclass(frozen=True)
class ProjectionResult:
    lam_hat: np.ndarray
    distance: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class RankEntry:
    index: int
    distance: float
    error: str = None


def polytope_program(c, cost):
    """Linear program over the polytope ``c`` with the given per-eigenvalue cost."""
    n = c.n
    return LinearProgram(cost=np.asarray(cost, dtype=float), rows=c.alpha, lower=np.zeros(c.alpha.shape[0]),
                         lo=-np.ones(n), hi=np.ones(n), fixed={c.pinned_index: 1.0})


def _select(c, cost):
    sol = solve_lp(polytope_program(c, cost))
    return Selection(lam=sol.x, objective=sol.objective, iterations=sol.iterations,
                     degenerate_columns=sol.degenerate_columns)


def solve_simple(c):
    """Minimize the trace of the reconstruction, i.e. the eigenvalue sum."""
    return _select(c, np.ones(c.n))


def sparse_cost(c):
    """Per-eigenvalue weights ``(sum of eigenvector entries)**2`` of the entry-sum objective."""
    return c.vectors.sum(axis=0) ** 2


def solve_sparse(c):
    """Minimize ``1^T X diag(lam) X^T 1``, the entry sum of a nonnegative reconstruction."""
    return _select(c, sparse_cost(c))


def _projection_system(c):
    free = c.free_index
    n_free = free.size
    positivity = -c.alpha[:, free]
    a = np.vstack([positivity, np.eye(n_free), -np.eye(n_free)])
    h = np.concatenate([c.alpha[:, c.pinned_index], np.ones(2 * n_free)])
    return a, h


def project_candidate(c, t_m, *, tol=qp.STEP_TOL, max_sweeps=qp.MAX_SWEEPS, strict=True):
    """Closest admissible eigenvalue vector to the diagonal of ``X^T t_m X``.

    The distance is the Frobenius norm of ``X^T t_m X - diag(lam_hat)``, so
    off-diagonal mass the basis cannot represent always counts against the
    candidate. Raises :class:`NonConvergence` if the dual ascent stalls and
    ``strict`` is set.
    """
    t_m = sym_matrix(t_m)
    if t_m.shape[0] != c.n:
        raise InvalidInput(f"candidate of order {t_m.shape[0]} does not match polytope order {c.n}")
    x = c.vectors
    a_m = x.T @ t_m @ x
    a_m = 0.5 * (a_m + a_m.T)
    target = np.diag(a_m).copy()
    a, h = _projection_system(c)
    free = c.free_index
    sol, _, sweeps, ok = qp.project(a, h, target[free], tol=tol, max_sweeps=max_sweeps)
    lam_hat = np.empty(c.n)
    lam_hat[c.pinned_index] = 1.0
    lam_hat[free] = sol
    residual = a_m.copy()
    residual[np.diag_indices(c.n)] -= lam_hat
    result = ProjectionResult(lam_hat=lam_hat, distance=float(np.linalg.norm(residual)),
                              iterations=sweeps, converged=ok)
    if strict and not ok:
        raise NonConvergence(sweeps, result)
    return result


def normalize_candidate(t):
    """Scale a candidate so that its largest eigenvalue equals one."""
    t = sym_matrix(t)
    top = eig_sym(t).values[0]
    if not top > 0:
        raise InvalidInput("candidate has no positive eigenvalue to normalize by")
    return t / top


def constraints_for(obs):
    """Polytope built from the sample covariance eigenbasis of ``obs``."""
    if isinstance(obs, PolytopeConstraints):
        return obs
    if isinstance(obs, ObservationSet):
        obs = sample_covariance(obs)
    if isinstance(obs, CovarianceEstimate):
        return build_constraints(obs.basis)
    if isinstance(obs, Eigenbasis):
        return build_constraints(obs)
    raise InvalidInput(f"cannot build constraints from {type(obs).__name__}")


def rank_candidates(c, candidates, *, normalized=False, workers=1):
    """Project every candidate onto ``c`` and sort by distance, ties by index.

    A candidate that fails (bad shape, stalled projection) is ranked last
    with infinite distance and its error message kept.
    """

    def score(item):
        i, t = item
        try:
            t = t if normalized else normalize_candidate(t)
            return RankEntry(i, project_candidate(c, t).distance)
        except DiffPolytopeError as exc:
            return RankEntry(i, math.inf, str(exc))

    items = list(enumerate(candidates))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            entries = list(pool.map(score, items))
    else:
        entries = [score(item) for item in items]
    return sorted(entries, key=lambda e: (e.distance, e.index))


def hypothesis_test(candidates, obs, **kwargs):
    """Rank candidate diffusion matrices by their distance to the polytope of ``obs``."""
    if len(candidates) == 0:
        raise InvalidInput("hypothesis testing needs at least one candidate")
    return rank_candidates(constraints_for(obs), candidates, **kwargs)


def selected_matrix(c, selection):
    lam = selection.lam if isinstance(selection, Selection) else selection.lam_hat
    return reconstruct(c, lam)
