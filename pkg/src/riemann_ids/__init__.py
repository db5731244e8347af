"""Intrusion detection with covariance features on the SPD manifold."""
from ._backend import BACKEND
from .linalg import EigenPair, NotSPDError, as_spd, as_sym, expm, invsqrtm, logm, mat_func, sqrtm, sym_eig
from .manifold import (
    KarcherConfig,
    exp_map,
    geodesic_distance,
    geodesic_midpoint,
    karcher_mean,
    log_map,
    tangent_vectorize,
    tsm_features,
)

__version__ = "0.1.0"
