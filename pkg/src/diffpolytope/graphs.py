"""Random graph families, the normalized diffusion operator and smoothness."""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import GenerationFailed, InvalidInput, IsolatedVertex
from .matcore import Eigenbasis, eig_sym, sym_matrix

log = logging.getLogger(__name__)

MAX_DRAWS = 1000


@dataclass(frozen=True)
class AdjacencyMatrix:
    w: np.ndarray
    model: str
    params: dict = field(default_factory=dict)
    rejected: int = 0

    @property
    def n(self):
        return self.w.shape[0]


@dataclass(frozen=True)
class DiffusionOperator:
    t: np.ndarray
    basis: Eigenbasis

    @property
    def n(self):
        return self.t.shape[0]


def is_connected(w):
    n_comp, _ = connected_components(np.asarray(w) > 0, directed=False)
    return n_comp == 1


def torus_distances(points):
    """Pairwise geodesic distances between points on the flat unit torus."""
    delta = np.abs(points[:, None, :] - points[None, :, :])
    delta = np.minimum(delta, 1.0 - delta)
    return np.sqrt((delta**2).sum(axis=-1))


def _connected_draws(draw, model, params):
    for attempt in range(MAX_DRAWS):
        w = draw()
        if is_connected(w):
            if attempt:
                log.debug("%s: rejected %d disconnected draws", model, attempt)
            return AdjacencyMatrix(w=w, model=model, params=params, rejected=attempt)
    raise GenerationFailed(f"{model} {params}: {MAX_DRAWS} consecutive disconnected draws")


def square_distances(points):
    """Pairwise Euclidean distances, without wrap-around."""
    delta = points[:, None, :] - points[None, :, :]
    return np.sqrt((delta**2).sum(axis=-1))


GEOMETRIES = {"torus": torus_distances, "square": square_distances}


def random_geometric(n, r, rng, geometry="torus"):
    """Random geometric graph on the unit torus with inverse-distance weights.

    Edges join points closer than ``r``; disconnected draws are rejected.
    ``geometry="square"`` measures plain distances in the unit square instead.
    """
    if n < 2:
        raise InvalidInput("random geometric graph needs n >= 2")
    if not r > 0:
        raise InvalidInput(f"radius must be positive, got {r}")
    if geometry not in GEOMETRIES:
        raise InvalidInput(f"unknown geometry {geometry!r}")
    distances = GEOMETRIES[geometry]

    def draw():
        d = distances(rng.random((n, 2)))
        np.fill_diagonal(d, np.inf)
        near = d < r
        w = np.zeros((n, n))
        w[near] = 1.0 / d[near]
        return sym_matrix(w)

    return _connected_draws(draw, "rg", {"n": n, "r": r, "geometry": geometry})


def erdos_renyi(n, p, rng):
    """Binary Erdős–Rényi graph, regenerated until connected."""
    if n < 2:
        raise InvalidInput("Erdős–Rényi graph needs n >= 2")
    if not 0.0 <= p <= 1.0:
        raise InvalidInput(f"edge probability must lie in [0, 1], got {p}")
    iu = np.triu_indices(n, 1)

    def draw():
        w = np.zeros((n, n))
        w[iu] = (rng.random(iu[0].size) < p).astype(float)
        return w + w.T

    return _connected_draws(draw, "er", {"n": n, "p": p})


def ring(n):
    if n < 3:
        raise InvalidInput("ring graph needs n >= 3")
    w = np.zeros((n, n))
    idx = np.arange(n)
    w[idx, (idx + 1) % n] = 1.0
    w[(idx + 1) % n, idx] = 1.0
    return AdjacencyMatrix(w=w, model="ring", params={"n": n})


def uniform_dense(n, rng):
    """Dense symmetric adjacency ``(U + U^T) / 2`` with ``U`` i.i.d. uniform on [0, 1].

    Symmetry is enforced by averaging, so off-diagonal weights follow a
    triangular law on [0, 1]; the diagonal stays uniform, giving self-loops.
    """
    if n < 1:
        raise InvalidInput("dense graph needs n >= 1")
    u = rng.random((n, n))
    return AdjacencyMatrix(w=0.5 * (u + u.T), model="dense", params={"n": n})


def diffusion_operator(adj):
    """``D^{-1/2} W D^{-1/2}`` together with its eigendecomposition."""
    w = adj.w if isinstance(adj, AdjacencyMatrix) else sym_matrix(adj)
    if np.any(w < 0):
        raise InvalidInput("adjacency weights must be nonnegative")
    deg = w.sum(axis=1)
    if np.any(deg <= 0):
        raise IsolatedVertex(f"vertices {np.flatnonzero(deg <= 0).tolist()} have zero degree")
    scale = 1.0 / np.sqrt(deg)
    t = sym_matrix(w * scale[:, None] * scale[None, :])
    basis = eig_sym(t)
    top = basis.values[0]
    if abs(top - 1.0) > 1e-9 or np.abs(basis.values).max() > 1.0 + 1e-9:
        raise InvalidInput(f"spectrum violates diffusion scale (top eigenvalue {top!r})")
    return DiffusionOperator(t=t, basis=basis)


def as_operator(t):
    """Wrap an arbitrary symmetric matrix as a DiffusionOperator without checks."""
    if isinstance(t, DiffusionOperator):
        return t
    t = sym_matrix(t)
    return DiffusionOperator(t=t, basis=eig_sym(t))


def smoothness(t, x):
    """Sum over vertex pairs u < v of ``T[u, v] * (x[u] - x[v])**2``."""
    tm = t.t if isinstance(t, DiffusionOperator) else np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape != (tm.shape[0],):
        raise InvalidInput(f"signal of shape {x.shape} does not match order {tm.shape[0]}")
    diff = (x[:, None] - x[None, :]) ** 2
    return float(np.triu(tm * diff, 1).sum())
