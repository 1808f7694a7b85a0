"""Euclidean projection onto ``{x : A x <= h}`` by Hildreth's method.

Hildreth's algorithm is cyclic coordinate ascent on the dual of
``min 1/2 |x - x0|^2``: each row's multiplier is updated in closed form and
clipped at zero, and the primal iterate is ``x0 - A^T mu``. It needs nothing
but dot products, which suits the many-rows, few-columns systems met here.

Near-degenerate active sets can make the ascent crawl, so sweeps run in
chunks and after each chunk the rows with positive multipliers are taken as
the active set: the equality-constrained projection onto them is solved
directly and accepted once it satisfies the KKT conditions.

When the feasible set has no interior (for instance when it collapses to a
single point) the optimal multipliers form an unbounded set and the ascent
only creeps towards the answer. The rows that are tight on the whole set are then found by linear
programming and the projection is redone inside their affine hull.
"""
import numba
import numpy as np
from scipy.optimize import linprog, lsq_linear, nnls

MAX_SWEEPS = 100_000
STEP_TOL = 1e-10
CHUNK = 500
KKT_TOL = 1e-12
ASCENT_TOL = 1e-9  # KKT slack accepted from the plain ascent and the exact fallback
EXACT_AFTER = 5  # chunks of ascent before trying the exact fallbacks
SLACK_TOL = 1e-9  # rows whose largest attainable slack is below this are treated as equalities
RANK_TOL = 1e-10


@numba.njit(cache=True)
def _hildreth(a, h, x0, mu0, tol, max_sweeps):
    m, n = a.shape
    mu = mu0.copy()
    x = x0 - a.T @ mu
    norms = np.zeros(m)
    for r in range(m):
        s = 0.0
        for j in range(n):
            s += a[r, j] * a[r, j]
        norms[r] = s
    prev = x.copy()
    for sweep in range(1, max_sweeps + 1):
        for r in range(m):
            if norms[r] == 0.0:
                continue
            dot = 0.0
            for j in range(n):
                dot += a[r, j] * x[j]
            new = mu[r] + (dot - h[r]) / norms[r]
            if new < 0.0:
                new = 0.0
            delta = new - mu[r]
            if delta != 0.0:
                for j in range(n):
                    x[j] -= delta * a[r, j]
                mu[r] = new
        change = 0.0
        for j in range(n):
            d = abs(x[j] - prev[j])
            if d > change:
                change = d
            prev[j] = x[j]
        if change < tol:
            return x, mu, sweep, True
    return x, mu, max_sweeps, False


def _is_kkt(a, h, x, mu, scale, tol=KKT_TOL):
    """Primal feasibility and complementary slackness (dual feasibility holds by construction)."""
    slack = a @ x - h
    tol = tol * scale
    return bool(np.all(slack <= tol) and np.all(np.abs(slack[mu > 0]) <= tol))


def _active_set_finish(a, h, x0, mu, scale):
    """Exact projection onto the rows with positive multipliers, if it is KKT-optimal."""
    active = np.flatnonzero(mu > 0)
    if active.size == 0:
        x, nu = x0.copy(), np.zeros(0)
    else:
        aa = a[active]
        gram = aa @ aa.T
        rhs = aa @ x0 - h[active]
        nu, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
        if np.any(nu < 0):
            # a degenerate vertex has many multiplier vectors; look for a nonnegative one
            nu, _ = nnls(gram, rhs)
        x = x0 - aa.T @ nu
    full = np.zeros_like(mu)
    full[active] = np.maximum(nu, 0.0)
    if np.any(nu < -KKT_TOL * scale) or not _is_kkt(a, h, x, full, scale):
        return None
    return x, full


def _least_distance(a, h, x0, scale):
    """Exact projection by least-distance programming, if the result passes the KKT check.

    With ``z = x - x0`` the problem is ``min |z|`` s.t. ``-a z >= a x0 - h``;
    Lawson and Hanson reduce it to one nonnegative least-squares problem,
    solved here with bounded-variable least squares.
    """
    n = a.shape[1]
    e = np.vstack([-a.T, (a @ x0 - h)[None, :]])
    f = np.zeros(n + 1)
    f[-1] = 1.0
    u = lsq_linear(e, f, bounds=(0.0, np.inf), method="bvls", tol=1e-15, max_iter=20 * a.shape[0]).x
    r = e @ u - f
    if not r[n] < 0:
        return None
    mu = u / -r[n]
    x = x0 - a.T @ mu
    if not _is_kkt(a, h, x, mu, scale, ASCENT_TOL):
        return None
    return x, mu


def _implicit_equalities(a, h, scale):
    """Indices of rows that hold with equality on the whole feasible set.

    Maximizes the sum of per-row slacks (each capped at 1); rows that get
    positive slack are loose and dropped, and the LP is repeated on the rest
    until none of them can be loosened. The right-hand side is widened by a
    rounding-level margin, far below the slack threshold, so that sets which
    are feasible only up to rounding are not declared empty. Returns None if
    the LP fails.
    """
    m, n = a.shape
    margin = 1e-12 * scale
    tight = np.arange(m)
    while tight.size:
        k = tight.size
        slack_cols = np.zeros((m, k))
        slack_cols[tight, np.arange(k)] = 1.0
        res = linprog(np.r_[np.zeros(n), -np.ones(k)], A_ub=np.hstack([a, slack_cols]), b_ub=h + margin,
                      bounds=[(None, None)] * n + [(0.0, 1.0)] * k, method="highs")
        if res.status != 0:
            return None
        loose = res.x[n:] > SLACK_TOL * scale
        if not loose.any():
            break
        tight = tight[~loose]
    return tight


def _reduced_projection(a, h, x0, scale, tol, max_sweeps):
    """Projection inside the affine hull of the feasible set, for sets without interior."""
    eq = _implicit_equalities(a, h, scale)
    if eq is None or eq.size == 0:
        return None
    ae = a[eq]
    xp = np.linalg.lstsq(ae, h[eq], rcond=None)[0]
    _, s, vt = np.linalg.svd(ae)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s.size else 0
    basis = vt[rank:].T
    mu = np.zeros(a.shape[0])
    if basis.shape[1] == 0:
        x = xp
    else:
        rest = np.setdiff1d(np.arange(a.shape[0]), eq)
        z, mu_rest, _, ok = project(a[rest] @ basis, h[rest] - a[rest] @ xp, basis.T @ (x0 - xp),
                                   tol=tol, max_sweeps=max_sweeps)
        if not ok:
            return None
        x = xp + basis @ z
        mu[rest] = mu_rest
    if np.any(a @ x - h > ASCENT_TOL * scale):
        return None
    return x, mu


def project(a, h, x0, tol=STEP_TOL, max_sweeps=MAX_SWEEPS):
    """Project ``x0`` onto ``{x : a @ x <= h}``.

    Returns ``(x, multipliers, sweeps, converged)``. After each chunk of
    sweeps the active set guessed from the multipliers is solved exactly and
    accepted if it yields a KKT point. Failing that, the ascent counts as
    converged once the largest coordinate change over a sweep drops below
    ``tol`` *and* the iterate passes the KKT check; a small step alone is
    not enough, since updates of opposing rows can cancel within a sweep.
    At highly degenerate vertices the ascent can crawl for 10^5 sweeps, so
    after a few chunks, or as soon as the step vanishes without reaching a KKT
    point, two exact fallbacks are tried, once each: projection
    within the affine hull of the feasible set (for sets without interior,
    where the optimal multipliers are unbounded; the multipliers of rows tight
    on the whole set are then reported as zero) and a least-distance solve.
    """
    a = np.ascontiguousarray(a, dtype=float)
    h = np.ascontiguousarray(h, dtype=float)
    x0 = np.ascontiguousarray(x0, dtype=float)
    if a.shape[1] == 0:
        return x0.copy(), np.zeros(a.shape[0]), 0, True
    scale = max(1.0, float(np.abs(h).max(initial=0.0)), float(np.abs(x0).max()))
    mu = np.zeros(a.shape[0])
    done = 0
    x = x0.copy()
    tried_exact = False
    while done < max_sweeps:
        chunk = min(CHUNK, max_sweeps - done)
        x, mu, sweeps, ok = _hildreth(a, h, x0, mu, tol, chunk)
        done += int(sweeps)
        finish = _active_set_finish(a, h, x0, mu, scale)
        if finish is not None:
            return finish[0], finish[1], done, True
        if ok and _is_kkt(a, h, x, mu, scale, ASCENT_TOL):
            return x, mu, done, True
        if not tried_exact and (ok or done >= EXACT_AFTER * CHUNK):
            tried_exact = True
            exact = _reduced_projection(a, h, x0, scale, tol, max_sweeps)
            if exact is None:
                exact = _least_distance(a, h, x0, scale)
            if exact is not None:
                return exact[0], exact[1], done, True
    return x, mu, done, False
