"""Numpy fallback for the compiled kernels.

Same cyclic Jacobi rotations as ``_kernels.pyx``, vectorized across the
stack instead of looping over matrices. Each matrix leaves the active set
as soon as it meets the tolerance, so the rotation sequence applied to any
single matrix matches the compiled path.
"""
import numpy as np


def _off_norm(a):
    iu = np.triu_indices(a.shape[-1], 1)
    return np.sqrt(2.0 * np.sum(a[:, iu[0], iu[1]] ** 2, axis=-1))


def _sweep(a, v):
    p = a.shape[-1]
    for i in range(p):
        for j in range(i + 1, p):
            apq = a[:, i, j].copy()
            app = a[:, i, i].copy()
            aqq = a[:, j, j].copy()
            nz = apq != 0.0
            denom = np.where(nz, 2.0 * apq, 1.0)
            theta = (aqq - app) / denom
            big = np.abs(theta) > 1e150
            with np.errstate(over="ignore", invalid="ignore"):
                t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
            t = np.where(nz, t, 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            c_ = c[:, None]
            s_ = s[:, None]

            arp = a[:, :, i].copy()
            arq = a[:, :, j].copy()
            new_p = c_ * arp - s_ * arq
            new_q = s_ * arp + c_ * arq
            a[:, :, i] = new_p
            a[:, :, j] = new_q
            a[:, i, :] = new_p
            a[:, j, :] = new_q
            a[:, i, i] = app - t * apq
            a[:, j, j] = aqq + t * apq
            a[:, i, j] = 0.0
            a[:, j, i] = 0.0

            vrp = v[:, :, i].copy()
            vrq = v[:, :, j].copy()
            v[:, :, i] = c_ * vrp - s_ * vrq
            v[:, :, j] = s_ * vrp + c_ * vrq


def jacobi_eigh_batch(mats, tol, max_sweeps):
    """Diagonalize ``mats`` (n, p, p) in place; see the compiled twin."""
    n, p, _ = mats.shape
    vecs = np.broadcast_to(np.eye(p), (n, p, p)).copy()
    sweeps = np.zeros(n, dtype=np.intc)
    limit = tol * np.sqrt(np.sum(mats ** 2, axis=(1, 2)))
    off = _off_norm(mats)
    active = np.flatnonzero(off > limit)
    while active.size:
        stuck = sweeps[active] >= max_sweeps
        if stuck.any():
            sweeps[active[stuck]] = -1
            active = active[~stuck]
            if not active.size:
                break
        a = mats[active]
        v = vecs[active]
        _sweep(a, v)
        mats[active] = a
        vecs[active] = v
        sweeps[active] += 1
        off[active] = _off_norm(a)
        active = active[off[active] > limit[active]]
    vals = np.diagonal(mats, axis1=1, axis2=2).copy()
    return vals, vecs, sweeps, off
