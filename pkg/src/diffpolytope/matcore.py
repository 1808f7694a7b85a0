"""Dense symmetric linear algebra.

Matrices are plain ``float64`` numpy arrays. :func:`sym_matrix` validates
an input and mirrors its upper triangle so the result is exactly symmetric.
The eigensolver is a cyclic Jacobi method, which is slow for large orders
but deterministic and accurate to working precision for the small dense
matrices handled here.
"""
from dataclasses import dataclass

import numba
import numpy as np

from .errors import InvalidInput

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def sym_matrix(a, *, atol=1e-9):
    """Return a validated, exactly symmetric copy of ``a``.

    Raises :class:`InvalidInput` for non-square, non-finite or visibly
    asymmetric input. Rounding-level asymmetry is removed by mirroring the
    upper triangle onto the lower one.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidInput(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.T).max() > atol * scale:
        raise InvalidInput("matrix is not symmetric")
    upper = np.triu(a)
    return upper + np.triu(a, 1).T


@dataclass(frozen=True)
class Eigenbasis:
    """Orthonormal eigenvectors (columns) with eigenvalues in descending order."""

    vectors: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.vectors.setflags(write=False)
        self.values.setflags(write=False)

    @property
    def n(self):
        return self.values.shape[0]

    def reconstruct(self, values=None):
        """Return ``X diag(values) X^T`` (defaults to the stored eigenvalues)."""
        lam = self.values if values is None else np.asarray(values, dtype=float)
        out = (self.vectors * lam) @ self.vectors.T
        return 0.5 * (out + out.T)


@numba.njit(cache=True)
def _jacobi_sweeps(a, v, tol, max_sweeps):
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off += a[p, q] * a[p, q]
        if np.sqrt(off) <= tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return -1


def eig_sym(a):
    """Eigendecomposition of a real symmetric matrix.

    Eigenvalues come back in descending order. Each eigenvector is signed so
    that its entry of largest magnitude is nonnegative (first such entry on
    ties). Degenerate eigenspaces are returned in an arbitrary orthonormal
    basis.
    """
    a = sym_matrix(a)
    n = a.shape[0]
    work = a.copy()
    v = np.eye(n)
    norm = np.linalg.norm(a)
    if norm > 0.0:
        sweeps = _jacobi_sweeps(work, v, JACOBI_TOL * norm, JACOBI_MAX_SWEEPS)
        if sweeps < 0:
            raise InvalidInput("Jacobi iteration did not converge")
    values = np.diag(work).copy()
    order = np.argsort(-values, kind="stable")
    values = values[order]
    v = v[:, order]
    pivots = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[pivots, np.arange(n)] < 0.0, -1.0, 1.0)
    return Eigenbasis(vectors=np.ascontiguousarray(v * signs), values=values)


def mat_power(a, k):
    """``a**k`` by repeated squaring; ``a**0`` is the identity."""
    a = sym_matrix(a)
    if int(k) != k or k < 0:
        raise InvalidInput(f"power must be a nonnegative integer, got {k}")
    k = int(k)
    result = np.eye(a.shape[0])
    base = a
    while k:
        if k & 1:
            result = result @ base
        k >>= 1
        if k:
            base = base @ base
    return 0.5 * (result + result.T)


def frob_norm(a):
    return float(np.linalg.norm(np.asarray(a, dtype=float)))


def l11_norm(a):
    """Sum of absolute values of all entries."""
    return float(np.abs(np.asarray(a, dtype=float)).sum())


def trace(a):
    return float(np.trace(np.asarray(a, dtype=float)))
