"""Linear description of the admissible diffusion matrices for a fixed eigenbasis.

For an orthonormal basis ``X``, every entry of ``X diag(lam) X^T`` is linear
in ``lam``: entry ``(i, j)`` equals ``sum_k X[i, k] X[j, k] lam[k]``. Requiring
every upper-triangle entry to be nonnegative, every eigenvalue to lie in
``[-1, 1]`` and the pinned eigenvalue to equal one carves out a convex
polytope of eigenvalue vectors.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidInput
from .matcore import Eigenbasis

DEFAULT_TOL = 1e-9
TIE_TOL = 1e-12


@dataclass(frozen=True)
class PolytopeConstraints:
    """Coefficient rows ``alpha[(i, j), k] = X[i, k] * X[j, k]`` for ``i <= j``."""

    vectors: np.ndarray
    alpha: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    pinned_index: int

    @property
    def n(self):
        return self.vectors.shape[0]

    @property
    def free_index(self):
        return np.delete(np.arange(self.n), self.pinned_index)


def sign_coherence(vectors):
    """Per column ``|sum(x)| / sum(|x|)``: one exactly for a constant-sign column."""
    vectors = np.asarray(vectors, dtype=float)
    l1 = np.abs(vectors).sum(axis=0)
    return np.abs(vectors.sum(axis=0)) / np.where(l1 > 0, l1, 1.0)


def choose_pinned(basis):
    """Index of the eigenvector whose eigenvalue is pinned to one.

    That is the constant-sign eigenvector; with estimated eigenvectors, the
    column closest to constant sign. Columns whose coherence ties within
    ``1e-12`` are resolved by order, which for an :class:`Eigenbasis` means
    the largest eigenvalue. Ranking by eigenvalue alone is not enough for
    covariance bases: a bipartite graph's eigenvalue -1 produces the same
    covariance eigenvalue as the pinned 1.
    """
    vectors = basis.vectors if isinstance(basis, Eigenbasis) else np.asarray(basis, dtype=float)
    coherence = sign_coherence(vectors)
    return int(np.flatnonzero(coherence >= coherence.max() - TIE_TOL)[0])


def build_constraints(basis, pinned_index=None):
    """Positivity rows for every entry ``(i, j)``, ``i <= j``, of the reconstruction."""
    vectors = basis.vectors if isinstance(basis, Eigenbasis) else np.asarray(basis, dtype=float)
    n = vectors.shape[0]
    if vectors.shape != (n, n):
        raise InvalidInput(f"basis must be square, got {vectors.shape}")
    if pinned_index is None:
        pinned_index = choose_pinned(basis)
    if not 0 <= pinned_index < n:
        raise InvalidInput(f"pinned index {pinned_index} out of range")
    rows, cols = np.triu_indices(n)
    alpha = vectors[rows, :] * vectors[cols, :]
    vectors = np.array(vectors)
    for arr in (vectors, alpha, rows, cols):
        arr.setflags(write=False)
    return PolytopeConstraints(vectors=vectors, alpha=alpha, rows=rows, cols=cols,
                               pinned_index=int(pinned_index))


def _check_dim(c, lam):
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (c.n,):
        raise InvalidInput(f"eigenvalue vector of shape {lam.shape} does not match order {c.n}")
    return lam


def entry_values(c, lam):
    """Upper-triangle entries of the reconstruction, via the constraint rows."""
    return c.alpha @ _check_dim(c, lam)


def is_member(c, lam, tol=DEFAULT_TOL):
    """Whether ``lam`` satisfies positivity, the ``[-1, 1]`` box and the pin, up to ``tol``."""
    lam = _check_dim(c, lam)
    if np.any(np.abs(lam) > 1.0 + tol):
        return False
    if lam[c.pinned_index] < 1.0 - tol:
        return False
    return bool(np.all(c.alpha @ lam >= -tol))


def reconstruct(basis, lam):
    """``X diag(lam) X^T``, explicitly symmetrized."""
    vectors = basis.vectors if isinstance(basis, (Eigenbasis, PolytopeConstraints)) else np.asarray(basis)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (vectors.shape[1],):
        raise InvalidInput("eigenvalue vector does not match basis")
    out = (vectors * lam) @ vectors.T
    return 0.5 * (out + out.T)


def grid_axis(step):
    if not 0 < step <= 2:
        raise InvalidInput(f"grid step must lie in (0, 2], got {step}")
    count = int(round(2.0 / step)) + 1
    return np.round(np.linspace(-1.0, 1.0, count), 12)


def grid_slice_2d(c, step=0.01, tol=DEFAULT_TOL):
    """Membership over a regular grid of the two free eigenvalues of an order-3 polytope.

    Returns ``(lam_a, lam_b, member)`` tuples; ``lam_a`` is the first free
    eigenvalue in basis order and varies slowest.
    """
    if c.n != 3:
        raise InvalidInput(f"2-D slices need order 3, got {c.n}")
    axis = grid_axis(step)
    free = c.free_index
    a, b = np.meshgrid(axis, axis, indexing="ij")
    lam = np.empty((a.size, 3))
    lam[:, c.pinned_index] = 1.0
    lam[:, free[0]] = a.ravel()
    lam[:, free[1]] = b.ravel()
    entries = lam @ c.alpha.T
    member = np.all(entries >= -tol, axis=1)
    return [(float(x), float(y), bool(m)) for x, y, m in zip(a.ravel(), b.ravel(), member)]


def align_eigenvalues(true_basis, basis):
    """Ground-truth eigenvalues reordered to match the columns of ``basis``.

    Each column of ``basis`` (for instance a sample-covariance eigenvector)
    is paired with the true eigenvector it overlaps most, through an optimal
    one-to-one assignment on absolute inner products.
    """
    target = basis.vectors if isinstance(basis, (Eigenbasis, PolytopeConstraints)) else np.asarray(basis)
    overlap = np.abs(target.T @ true_basis.vectors)
    rows, cols = linear_sum_assignment(-overlap)
    out = np.empty(true_basis.n)
    out[rows] = true_basis.values[cols]
    return out
