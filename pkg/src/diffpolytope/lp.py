"""Dense primal simplex for small linear programs.

Problems are stated as ``min c @ x`` subject to ``G @ x >= lower``,
``lo <= x <= hi`` and optional pinned variables. Each free variable is
rewritten as ``x = hi - u`` with ``0 <= u <= hi - lo``, which turns the
problem into ``max c @ u`` subject to ``A @ u <= b, u >= 0``; when the
all-upper-bounds corner is feasible the slack basis is an immediate
starting point, otherwise an auxiliary phase finds one.

Pivoting follows Bland's smallest-index rule on a compact dictionary
(one column per nonbasic variable), so runs are deterministic and cannot
cycle. The final point is recomputed from the original rows of the optimal
basis to strip accumulated pivoting error.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import Infeasible, InvalidInput, NumericalFailure

PIVOT_TOL = 1e-10
COST_TOL = 1e-10
DEGENERATE_TOL = 1e-9


@dataclass
class LinearProgram:
    """``min cost @ x`` s.t. ``rows @ x >= lower``, ``lo <= x <= hi``, ``x[k] = fixed[k]``."""

    cost: np.ndarray
    rows: np.ndarray
    lower: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    fixed: dict = field(default_factory=dict)

    @property
    def n_vars(self):
        return self.cost.shape[0]

    def violation(self, x):
        """Largest violation of any row, bound or pin at ``x``."""
        worst = max(0.0, float((self.lower - self.rows @ x).max(initial=0.0)))
        worst = max(worst, float((self.lo - x).max()), float((x - self.hi).max()))
        for k, v in self.fixed.items():
            worst = max(worst, abs(x[k] - v))
        return worst


@dataclass(frozen=True)
class LPSolution:
    x: np.ndarray
    objective: float
    iterations: int
    degenerate_columns: int
    reduced_costs: np.ndarray

    @property
    def degenerate(self):
        """True when some nonbasic column has zero reduced cost (possible non-unique optimum)."""
        return self.degenerate_columns > 0


class _Dictionary:
    """``x_B = b - D @ x_N`` and ``z = z0 + c @ x_N``, maximized."""

    def __init__(self, d, b, c, basic, nonbasic):
        self.d, self.b, self.c = d, b, c
        self.z0 = 0.0
        self.basic, self.nonbasic = basic, nonbasic
        self.pivots = 0

    def pivot(self, r, s):
        d = self.d
        p = d[r, s]
        row = d[r] / p
        row[s] = 1.0 / p
        br = self.b[r] / p
        col = d[:, s].copy()
        col[r] = 0.0
        d -= np.outer(col, row)
        d[:, s] = -col / p
        d[r] = row
        self.b -= col * br
        self.b[r] = br
        cs = self.c[s]
        self.c -= cs * row
        self.c[s] = -cs / p
        self.z0 += cs * br
        self.basic[r], self.nonbasic[s] = self.nonbasic[s], self.basic[r]
        self.pivots += 1

    def entering(self):
        candidates = np.flatnonzero(self.c > COST_TOL)
        if candidates.size == 0:
            return None
        return int(candidates[np.argmin(self.nonbasic[candidates])])

    def leaving(self, s):
        col = self.d[:, s]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return None
        ratios = np.maximum(self.b[rows], 0.0) / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, best)]
        return int(ties[np.argmin(self.basic[ties])])

    def run(self, cap):
        while True:
            s = self.entering()
            if s is None:
                return
            r = self.leaving(s)
            if r is None:
                raise NumericalFailure("linear program is unbounded")
            if self.pivots >= cap:
                raise NumericalFailure(f"simplex hit its iteration cap ({cap})")
            self.pivot(r, s)


def _phase_one(dic, n_struct, cap):
    """Auxiliary problem ``max -u0`` with ``A u - u0 <= b``; leaves a feasible dictionary."""
    m, n = dic.d.shape
    art = n_struct + m
    dic.d = np.hstack([dic.d, -np.ones((m, 1))])
    dic.nonbasic = np.append(dic.nonbasic, art)
    real_c = dic.c
    dic.c = np.zeros(n + 1)
    dic.c[-1] = -1.0
    worst = np.flatnonzero(dic.b == dic.b.min())
    dic.pivot(int(worst[np.argmin(dic.basic[worst])]), n)
    dic.run(cap)
    if dic.z0 < -1e-9:
        raise Infeasible("linear program has no feasible point")
    where = np.flatnonzero(dic.basic == art)
    if where.size:
        r = int(where[0])
        nz = np.flatnonzero(np.abs(dic.d[r]) > PIVOT_TOL)
        dic.pivot(r, int(nz[np.argmin(dic.nonbasic[nz])]))
    keep = dic.nonbasic != art
    dic.d = dic.d[:, keep]
    dic.nonbasic = dic.nonbasic[keep]
    # re-express the true objective in terms of the current nonbasic variables
    c = np.zeros(n)
    z0 = 0.0
    pos = {int(label): j for j, label in enumerate(dic.nonbasic)}
    for j in range(n_struct):
        if j in pos:
            c[pos[j]] += real_c[j]
    for r, label in enumerate(dic.basic):
        if label < n_struct:
            z0 += real_c[label] * dic.b[r]
            c -= real_c[label] * dic.d[r]
    dic.c, dic.z0 = c, z0


def _standard_form(lp):
    n = lp.n_vars
    cost = np.asarray(lp.cost, dtype=float)
    g = np.asarray(lp.rows, dtype=float).reshape(-1, n)
    lower = np.asarray(lp.lower, dtype=float)
    lo = np.asarray(lp.lo, dtype=float)
    hi = np.asarray(lp.hi, dtype=float)
    if g.shape[0] != lower.shape[0] or lo.shape != (n,) or hi.shape != (n,):
        raise InvalidInput("inconsistent linear program dimensions")
    if np.any(lo > hi) or not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
        raise InvalidInput("every variable needs finite bounds with lo <= hi")
    pinned = np.zeros(n)
    is_fixed = np.zeros(n, dtype=bool)
    for k, v in lp.fixed.items():
        if not lo[k] - 1e-12 <= v <= hi[k] + 1e-12:
            raise Infeasible(f"pinned value {v} of variable {k} is outside its bounds")
        pinned[k] = v
        is_fixed[k] = True
    free = np.flatnonzero(~is_fixed)
    # G x >= l  with  x_free = hi - u  becomes  G_free u <= G_free hi + G_fixed v - l
    gf = g[:, free]
    b_rows = gf @ hi[free] + g[:, is_fixed] @ pinned[is_fixed] - lower
    width = hi[free] - lo[free]
    a = np.vstack([gf, np.eye(free.size)])
    b = np.concatenate([b_rows, width])
    return a, b, cost[free], free, pinned, hi


def solve_lp(lp, max_iterations=None):
    """Solve ``lp`` and return the optimal vertex found by Bland's rule."""
    a, b, c_free, free, pinned, hi = _standard_form(lp)
    m, n = a.shape
    if max_iterations is None:
        max_iterations = 50 * (n + m)
    dic = _Dictionary(a.copy(), b.copy(), c_free.copy(), np.arange(n, n + m), np.arange(n))
    if n:
        if b.min() < 0.0:
            _phase_one(dic, n, max_iterations)
        dic.run(max_iterations)
    u = _polish(a, b, dic, n)
    x = pinned.copy()
    x[free] = hi[free] - u
    degenerate = int(np.count_nonzero(np.abs(dic.c) <= DEGENERATE_TOL))
    return LPSolution(x=x, objective=float(lp.cost @ x), iterations=dic.pivots,
                      degenerate_columns=degenerate, reduced_costs=-dic.c.copy())


def _polish(a, b, dic, n):
    """Basic structural values re-solved from the original tight rows."""
    u = np.zeros(n)
    if n == 0:
        return u
    basic_struct = dic.basic < n
    values = np.maximum(dic.b[basic_struct], 0.0)
    labels = dic.basic[basic_struct]
    u[labels] = values
    tight = dic.nonbasic[dic.nonbasic >= n] - n
    if labels.size and tight.size == labels.size:
        system = a[np.ix_(tight, labels)]
        try:
            solved = np.linalg.solve(system, b[tight])
        except np.linalg.LinAlgError:
            return u
        if np.all(np.isfinite(solved)) and np.abs(solved - values).max() < 1e-6:
            u[labels] = solved
    return u
