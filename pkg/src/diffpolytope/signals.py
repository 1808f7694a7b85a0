"""Diffused signal generation and sample covariance estimation.

Observations follow the monomial model ``x_i = T**k_i y_i`` where the
columns ``y_i`` are i.i.d. source signals. Sources and diffusion counts are
drawn from two independent child streams of the caller's generator, and
signals are drawn column by column, so the streaming estimator sees exactly
the same signals as the materialized path whatever the chunk size.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, Undefined
from .graphs import DiffusionOperator
from .matcore import Eigenbasis, eig_sym, mat_power, sym_matrix

SOURCES = ("uniform", "gaussian")
DEFAULT_CHUNK = 1 << 15


@dataclass(frozen=True)
class ObservationSet:
    """N x M signal matrix, one observation per column."""

    x: np.ndarray
    k: np.ndarray = None

    def __post_init__(self):
        if self.x.ndim != 2 or self.x.shape[1] < 2:
            raise InvalidInput("observations need a 2-D array with at least two columns")
        if self.k is not None:
            if self.k.shape != (self.x.shape[1],) or np.any(self.k < 1):
                raise InvalidInput("diffusion counts must be >= 1, one per column")

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def m(self):
        return self.x.shape[1]


@dataclass(frozen=True)
class CovarianceEstimate:
    sigma: np.ndarray
    basis: Eigenbasis
    m: int


def _operator_matrix(t):
    return t.t if isinstance(t, DiffusionOperator) else sym_matrix(t)


def _check_ranges(m, k_min, k_max, source):
    if m < 2:
        raise InvalidInput("need at least two signals")
    if not 1 <= k_min <= k_max:
        raise InvalidInput(f"diffusion counts need 1 <= k_min <= k_max, got [{k_min}, {k_max}]")
    if source not in SOURCES:
        raise InvalidInput(f"unknown source distribution {source!r}")


def _streams(rng):
    source_rng, count_rng = rng.spawn(2)
    return source_rng, count_rng


def _draw_block(t, c, k_min, k_max, source, source_rng, count_rng):
    n = t.shape[0]
    if source == "uniform":
        y = source_rng.random((c, n)).T
    else:
        y = source_rng.standard_normal((c, n)).T
    u = count_rng.random(c)
    k = k_min + np.floor(u * (k_max - k_min + 1)).astype(np.int64)
    k = np.minimum(k, k_max)
    x = np.empty_like(y)
    z = y
    active = np.arange(c)
    for step in range(1, k_max + 1):
        z = t @ z
        done = k[active] == step
        x[:, active[done]] = z[:, done]
        keep = ~done
        active = active[keep]
        z = z[:, keep]
        if active.size == 0:
            break
    return x, k


def generate_observations(t, m, k_min=1, k_max=10, source="uniform", *, rng):
    """Draw ``m`` source signals and diffuse each one a random number of steps.

    Diffusion counts are uniform integers in ``[k_min, k_max]``.
    """
    _check_ranges(m, k_min, k_max, source)
    tm = _operator_matrix(t)
    x, k = _draw_block(tm, m, k_min, k_max, source, *_streams(rng))
    return ObservationSet(x=x, k=k)


def covariance_estimate(sigma, m):
    """Wrap a covariance matrix estimated from ``m`` signals with its eigenbasis."""
    sigma = sym_matrix(sigma)
    return CovarianceEstimate(sigma=sigma, basis=eig_sym(sigma), m=m)


def sample_covariance(obs):
    """Unbiased sample covariance ``(X - mean)(X - mean)^T / (M - 1)``."""
    x = obs.x if isinstance(obs, ObservationSet) else np.asarray(obs, dtype=float)
    m = x.shape[1]
    if m < 2:
        raise InvalidInput("sample covariance needs at least two observations")
    centered = x - x.mean(axis=1, keepdims=True)
    return covariance_estimate(centered @ centered.T / (m - 1), m)


def _chunked_covariance(blocks, n, m):
    count = 0
    mean = np.zeros(n)
    comoment = np.zeros((n, n))
    for x in blocks:
        c = x.shape[1]
        block_mean = x.mean(axis=1)
        centered = x - block_mean[:, None]
        delta = block_mean - mean
        total = count + c
        comoment += centered @ centered.T + np.outer(delta, delta) * (count * c / total)
        mean += delta * (c / total)
        count = total
    return covariance_estimate(comoment / (m - 1), m)


def _chunk_sizes(m, chunk):
    full, rest = divmod(m, chunk)
    return [chunk] * full + ([rest] if rest else [])


def stream_covariance(t, m, k_min=1, k_max=10, source="uniform", *, rng, chunk=DEFAULT_CHUNK):
    """Sample covariance of generated observations without materializing X.

    Chunks are merged with the pairwise mean/co-moment update, in chunk order,
    so the result is deterministic for a given seed and chunk size.
    """
    _check_ranges(m, k_min, k_max, source)
    tm = _operator_matrix(t)
    streams = _streams(rng)
    blocks = (_draw_block(tm, c, k_min, k_max, source, *streams)[0] for c in _chunk_sizes(m, chunk))
    return _chunked_covariance(blocks, tm.shape[0], m)


def source_covariance(n, m, source="uniform", *, rng, chunk=DEFAULT_CHUNK):
    """Sample covariance of ``m`` undiffused source signals of length ``n``.

    Combined with :func:`propagate_covariance` this gives the covariance of
    signals all diffused the same number of times, since centering commutes
    with the linear diffusion map.
    """
    _check_ranges(m, 1, 1, source)
    source_rng, _ = _streams(rng)

    def blocks():
        for c in _chunk_sizes(m, chunk):
            if source == "uniform":
                yield source_rng.random((c, n)).T
            else:
                yield source_rng.standard_normal((c, n)).T

    return _chunked_covariance(blocks(), n, m)


def propagate_covariance(sigma, t, k):
    """Covariance of ``T**k y`` given the covariance of ``y``."""
    tk = mat_power(_operator_matrix(t), k)
    return tk @ sym_matrix(sigma) @ tk


def anderson_variance(lambda_i, lambda_j_hat, m):
    """Asymptotic variance of the inner product between a true and a sample eigenvector."""
    if m < 2:
        raise InvalidInput("need m >= 2")
    if lambda_i == lambda_j_hat:
        raise Undefined("asymptotic variance needs distinct eigenvalues")
    return lambda_i * lambda_j_hat / ((m - 1) * (lambda_i - lambda_j_hat) ** 2)


def mle_eigenvalue(lambda_i, m):
    """Maximum-likelihood sample eigenvalue for a distinct population eigenvalue."""
    if m < 2:
        raise InvalidInput("need m >= 2")
    return (m - 1) / m * lambda_i
