"""Symmetric eigendecomposition and spectral functions of SPD matrices.

Every function accepts a single ``(p, p)`` matrix or a stack ``(n, p, p)``
and returns the same leading shape. Matrices are plain float64 ndarrays;
``as_sym`` and ``as_spd`` are the construction checks.
"""
from typing import NamedTuple

import numpy as np

from ._backend import kernels

EIG_FLOOR = 1e-12
EIG_TOL = 1e-11
MAX_SWEEPS = 100


class NotSPDError(ValueError):
    """Raised when a matrix fails positive-definiteness certification."""


class EigenConvergenceError(ArithmeticError):
    def __init__(self, residual):
        super().__init__(
            f"Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps "
            f"(off-diagonal residual {residual:.3e})"
        )
        self.residual = residual


class EigenPair(NamedTuple):
    """Eigenvalues in descending order; column ``k`` of ``vectors`` pairs
    with ``values[..., k]``."""

    values: np.ndarray
    vectors: np.ndarray


def _check_square(m):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim not in (2, 3) or m.shape[-1] != m.shape[-2] or m.shape[-1] < 1:
        raise ValueError(f"expected (p, p) or (n, p, p) matrices, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def as_sym(m):
    """Return the symmetric part ``(M + M^T) / 2`` as a new array."""
    m = _check_square(m)
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def _spectrum_ok(w):
    # w sorted descending along the last axis
    top = w[..., 0]
    return (w[..., -1] > EIG_FLOOR * np.maximum(top, 0.0)) & (w[..., -1] > 0.0)


def as_spd(m):
    """Symmetrize ``m`` and certify every eigenvalue is above the floor.

    The floor is relative to the largest eigenvalue, so uniformly scaled
    matrices certify identically.
    """
    s = as_sym(m)
    w = sym_eig(s).values
    if not np.all(_spectrum_ok(w)):
        raise NotSPDError(
            f"matrix is not positive definite (min eigenvalue {np.min(w[..., -1]):.3e})"
        )
    return s


def is_spd(m):
    try:
        as_spd(m)
    except (NotSPDError, ValueError):
        return False
    return True


def sym_eig(m):
    """Eigendecomposition of symmetric matrices by cyclic Jacobi sweeps.

    Parameters
    ----------
    m : ndarray, shape (p, p) or (n, p, p)
        Symmetric input; only the symmetric part is used.

    Returns
    -------
    EigenPair
        Descending eigenvalues and orthonormal eigenvectors (columns).

    Raises
    ------
    EigenConvergenceError
        If any matrix still has off-diagonal mass above ``EIG_TOL`` (relative
        to its Frobenius norm) after ``MAX_SWEEPS`` sweeps.
    """
    m = as_sym(m)
    single = m.ndim == 2
    work = np.ascontiguousarray(m[None] if single else m).copy()
    vals, vecs, sweeps, res = kernels.jacobi_eigh_batch(work, EIG_TOL, MAX_SWEEPS)
    vals = np.asarray(vals)
    vecs = np.asarray(vecs)
    bad = np.asarray(sweeps) < 0
    if bad.any():
        raise EigenConvergenceError(float(np.max(np.asarray(res)[bad])))
    order = np.argsort(-vals, axis=-1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=-1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=-1)
    if single:
        return EigenPair(vals[0], vecs[0])
    return EigenPair(vals, vecs)


def _recompose(vecs, fvals):
    out = (vecs * fvals[..., None, :]) @ np.swapaxes(vecs, -1, -2)
    return 0.5 * (out + np.swapaxes(out, -1, -2))


_FUNCS = {
    "log": np.log,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "invsqrt": lambda w: 1.0 / np.sqrt(w),
}


def mat_func(c, f):
    """Apply a scalar function to the spectrum: ``U f(diag(w)) U^T``.

    ``f`` is one of ``"log"``, ``"exp"``, ``"sqrt"``, ``"invsqrt"``. All but
    ``exp`` require positive-definite input and raise ``NotSPDError``
    otherwise.
    """
    if f not in _FUNCS:
        raise ValueError(f"unknown matrix function {f!r}")
    w, u = sym_eig(c)
    if f != "exp" and not np.all(_spectrum_ok(w)):
        raise NotSPDError(
            f"{f} needs a positive-definite matrix (min eigenvalue {np.min(w[..., -1]):.3e})"
        )
    return _recompose(u, _FUNCS[f](w))


def logm(c):
    return mat_func(c, "log")


def expm(s):
    return mat_func(s, "exp")


def sqrtm(c):
    return mat_func(c, "sqrt")


def invsqrtm(c):
    return mat_func(c, "invsqrt")


def sqrt_and_invsqrt(c):
    """Both square-root factors from a single eigendecomposition."""
    w, u = sym_eig(c)
    if not np.all(_spectrum_ok(w)):
        raise NotSPDError(f"matrix is not positive definite (min eigenvalue {np.min(w[..., -1]):.3e})")
    r = np.sqrt(w)
    return _recompose(u, r), _recompose(u, 1.0 / r)
