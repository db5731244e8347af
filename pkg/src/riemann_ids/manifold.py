"""Affine-invariant geometry on the cone of SPD matrices.

Log/exp maps, geodesic distance, the Karcher mean and the whitened
tangent-space vectorization used to feed Euclidean classifiers.
"""
from dataclasses import dataclass

import numpy as np

from .linalg import _recompose, as_sym, expm, logm, sqrt_and_invsqrt, sym_eig

SQRT2 = np.sqrt(2.0)


class KarcherConvergenceError(ArithmeticError):
    def __init__(self, residual, iters):
        super().__init__(
            f"Karcher mean did not converge after {iters} iterations "
            f"(gradient norm {residual:.3e})"
        )
        self.residual = residual
        self.iters = iters


@dataclass(frozen=True)
class KarcherConfig:
    max_iters: int = 50
    tol: float = 1e-8
    step: float = 1.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if not 0 < self.step <= 1:
            raise ValueError("step must lie in (0, 1]")


def _same_dim(a, b):
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")


def _whiten(isqrt, points):
    out = isqrt @ points @ isqrt
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def log_map(reference, point):
    """Project ``point`` (or a stack) onto the tangent space at ``reference``.

    Returns ``R^{1/2} log(R^{-1/2} P R^{-1/2}) R^{1/2}``.
    """
    reference = as_sym(reference)
    point = as_sym(point)
    _same_dim(reference, point)
    rs, ris = sqrt_and_invsqrt(reference)
    return _whiten(rs, logm(_whiten(ris, point)))


def exp_map(reference, tangent):
    """Inverse of :func:`log_map`: ``R^{1/2} exp(R^{-1/2} S R^{-1/2}) R^{1/2}``."""
    reference = as_sym(reference)
    tangent = as_sym(tangent)
    _same_dim(reference, tangent)
    rs, ris = sqrt_and_invsqrt(reference)
    return _whiten(rs, expm(_whiten(ris, tangent)))


def geodesic_distance(a, b):
    """Affine-invariant distance ``sqrt(sum(log(w)**2))``, where ``w`` are
    the eigenvalues of ``a^{-1/2} b a^{-1/2}``.

    ``b`` may be a stack, in which case an array of distances is returned.
    """
    a = as_sym(a)
    b = as_sym(b)
    _same_dim(a, b)
    _, ais = sqrt_and_invsqrt(a)
    w = sym_eig(_whiten(ais, b)).values
    if np.any(w <= 0):
        raise ValueError("second argument is not positive definite")
    return np.sqrt(np.sum(np.log(w) ** 2, axis=-1))


def geodesic_midpoint(a, b):
    """Closed-form midpoint ``a^{1/2} (a^{-1/2} b a^{-1/2})^{1/2} a^{1/2}``."""
    a = as_sym(a)
    b = as_sym(b)
    _same_dim(a, b)
    asq, ais = sqrt_and_invsqrt(a)
    w, u = sym_eig(_whiten(ais, b))
    return _whiten(asq, _recompose(u, np.sqrt(w)))


def _mean_whitened_log(isqrt, points):
    w, u = sym_eig(_whiten(isqrt, points))
    if np.any(w <= 0):
        raise ValueError("input contains a matrix that is not positive definite")
    return np.mean(_recompose(u, np.log(w)), axis=0)


def karcher_mean(points, cfg=None, init=None):
    """Riemannian (Karcher) mean of a set of SPD matrices.

    Fixed-point iteration ``Q <- exp_Q(step * mean_i log_Q(C_i))`` started
    from the arithmetic mean. The step is halved whenever the gradient
    norm grows, which tames the oscillation a full step shows on widely
    spread data. The gradient is measured in whitened
    coordinates, ``||mean_i log(Q^{-1/2} C_i Q^{-1/2})||_F``, which is
    invariant to congruence and to the overall scale of the data.

    Parameters
    ----------
    points : array_like, shape (n, p, p)
    cfg : KarcherConfig, optional
    init : array_like, shape (p, p), optional
        Starting point; defaults to the arithmetic mean.

    Raises
    ------
    KarcherConvergenceError
        When the gradient norm is still above ``cfg.tol`` after
        ``cfg.max_iters`` iterations.
    """
    cfg = cfg or KarcherConfig()
    points = as_sym(points)
    if points.ndim == 2:
        points = points[None]
    if points.shape[0] == 0:
        raise ValueError("karcher_mean needs at least one matrix")
    if points.shape[0] == 1:
        return points[0].copy()

    q = np.mean(points, axis=0) if init is None else as_sym(init)
    step = cfg.step
    prev = np.inf
    for _ in range(cfg.max_iters):
        qs, qis = sqrt_and_invsqrt(q)
        grad = _mean_whitened_log(qis, points)
        residual = float(np.linalg.norm(grad))
        if residual < cfg.tol:
            return q
        if residual > prev:
            step *= 0.5
        prev = residual
        q = _whiten(qs, expm(step * grad))
    qs, qis = sqrt_and_invsqrt(q)
    residual = float(np.linalg.norm(_mean_whitened_log(qis, points)))
    if residual < cfg.tol:
        return q
    raise KarcherConvergenceError(residual, cfg.max_iters)


def upper_index(p):
    """Row-major upper-triangle indices (i <= j) and the per-entry weight."""
    iu = np.triu_indices(p)
    weights = np.where(iu[0] == iu[1], 1.0, SQRT2)
    return iu, weights


def vectorize(sym):
    """Upper triangle of a symmetric matrix (or stack), off-diagonals times
    sqrt(2) so the Euclidean norm matches the Frobenius norm."""
    sym = np.asarray(sym, dtype=np.float64)
    (r, c), wts = upper_index(sym.shape[-1])
    return sym[..., r, c] * wts


def unvectorize(vec, p=None):
    """Rebuild the symmetric matrix from :func:`vectorize` output."""
    vec = np.asarray(vec, dtype=np.float64)
    m = vec.shape[-1]
    if p is None:
        p = int(round((np.sqrt(8 * m + 1) - 1) / 2))
    if p * (p + 1) // 2 != m:
        raise ValueError(f"length {m} is not p(p+1)/2 for any p")
    (r, c), wts = upper_index(p)
    out = np.zeros(vec.shape[:-1] + (p, p))
    vals = vec / wts
    out[..., r, c] = vals
    out[..., c, r] = vals
    return out


def tangent_vectorize(reference, point):
    """Whitened tangent coordinates ``vectorize(log(R^{-1/2} P R^{-1/2}))``.

    Length ``p(p+1)/2``; the Euclidean norm equals the geodesic distance
    between ``reference`` and ``point``.
    """
    reference = as_sym(reference)
    point = as_sym(point)
    _same_dim(reference, point)
    _, ris = sqrt_and_invsqrt(reference)
    return vectorize(logm(_whiten(ris, point)))


def tsm_features(reference, points):
    """Stack of tangent vectors, one row per input matrix."""
    points = as_sym(points)
    if points.ndim == 2:
        points = points[None]
    if points.shape[0] == 0:
        raise ValueError("tsm_features needs at least one matrix")
    return tangent_vectorize(reference, points)


def untangent(reference, vec):
    """Map tangent coordinates back onto the manifold (inverse of
    :func:`tangent_vectorize`)."""
    reference = as_sym(reference)
    rs, _ = sqrt_and_invsqrt(reference)
    return _whiten(rs, expm(unvectorize(vec, reference.shape[-1])))
