"""From raw traffic records to shrunk covariance matrices.

Categorical columns are numeralized in first-appearance order, every column
is min-max scaled with training bounds, each record is reshaped into a
``p x t`` block, and its second-moment matrix is shrunk towards a
trace-matched identity.
"""
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .linalg import NotSPDError, _spectrum_ok, as_sym, sym_eig

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass
class FittedPreprocessor:
    """Encoding and scaling parameters learned from a training table.

    ``feature_order`` lists the retained columns; ``col_min``/``col_max`` are
    aligned with it and measured after categorical encoding.
    """

    feature_order: list
    column_kinds: dict
    category_maps: dict
    col_min: np.ndarray
    col_max: np.ndarray

    def to_dict(self):
        return {
            "feature_order": list(self.feature_order),
            "column_kinds": dict(self.column_kinds),
            "category_maps": {k: dict(v) for k, v in self.category_maps.items()},
            "col_min": [float(x) for x in self.col_min],
            "col_max": [float(x) for x in self.col_max],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            feature_order=list(d["feature_order"]),
            column_kinds=dict(d["column_kinds"]),
            category_maps={k: {s: int(c) for s, c in v.items()} for k, v in d["category_maps"].items()},
            col_min=np.asarray(d["col_min"], dtype=np.float64),
            col_max=np.asarray(d["col_max"], dtype=np.float64),
        )


@dataclass(frozen=True)
class ReshapeSpec:
    rows_p: int
    cols_t: int
    order: str = "row"

    def __post_init__(self):
        if self.rows_p < 1 or self.cols_t < 1:
            raise ValueError("reshape dimensions must be positive")
        if self.order not in ("row", "col"):
            raise ValueError(f"order must be 'row' or 'col', got {self.order!r}")

    @property
    def size(self):
        return self.rows_p * self.cols_t


@dataclass(frozen=True)
class ShrinkageConfig:
    """Shrinkage intensity ``alpha``.

    ``trace_floor`` stands in for ``tr(C)/p`` when a record's matrix is
    identically zero, which otherwise has no positive-definite shrinkage.
    """

    alpha: float = 0.1
    trace_floor: float = 1e-12

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


def _encode(col, mapping):
    return col.map(lambda s: mapping.get(str(s), 0)).to_numpy(dtype=np.float64)


def fit_preprocessor(table, kinds, columns=None):
    """Learn categorical codes and min/max bounds from ``table``.

    Parameters
    ----------
    table : pandas.DataFrame
        Training records, one column per raw feature.
    kinds : mapping
        Column name -> ``"numeric"`` or ``"categorical"``.
    columns : sequence of str, optional
        Columns to retain, in order. Defaults to every column of ``table``.
    """
    if len(table) == 0:
        raise ValueError("cannot fit a preprocessor on an empty table")
    columns = list(table.columns if columns is None else columns)
    missing = [c for c in columns if c not in kinds]
    if missing:
        raise ValueError(f"columns missing from schema: {missing}")
    absent = [c for c in columns if c not in table.columns]
    if absent:
        raise ValueError(f"columns missing from table: {absent}")

    cat_maps = {}
    lo = np.empty(len(columns))
    hi = np.empty(len(columns))
    for j, name in enumerate(columns):
        if kinds[name] == CATEGORICAL:
            symbols = pd.unique(table[name].astype(str))
            cat_maps[name] = {s: i + 1 for i, s in enumerate(symbols)}
            vals = _encode(table[name], cat_maps[name])
        elif kinds[name] == NUMERIC:
            vals = table[name].to_numpy(dtype=np.float64)
        else:
            raise ValueError(f"unknown column kind {kinds[name]!r} for {name}")
        lo[j] = np.min(vals)
        hi[j] = np.max(vals)
    return FittedPreprocessor(
        feature_order=columns,
        column_kinds={c: kinds[c] for c in columns},
        category_maps=cat_maps,
        col_min=lo,
        col_max=hi,
    )


def apply_preprocessor(pp, table):
    """Encode and min-max scale ``table`` with fitted bounds; output in [0, 1].

    Unseen symbols encode to 0, values outside the training range clip to
    the interval ends, and zero-range columns map to 0.
    """
    absent = [c for c in pp.feature_order if c not in table.columns]
    if absent:
        raise ValueError(f"table lacks {len(absent)} fitted columns: {absent[:5]}")
    out = np.empty((len(table), len(pp.feature_order)))
    for j, name in enumerate(pp.feature_order):
        if pp.column_kinds[name] == CATEGORICAL:
            vals = _encode(table[name], pp.category_maps[name])
        else:
            vals = table[name].to_numpy(dtype=np.float64)
        span = pp.col_max[j] - pp.col_min[j]
        if span > 0:
            out[:, j] = (vals - pp.col_min[j]) / span
        else:
            out[:, j] = 0.0
    np.clip(out, 0.0, 1.0, out=out)
    return out


def reshape_sample(x, spec):
    """First ``p*t`` features of ``x`` (or of every row of a 2-D ``x``) laid
    out as ``p x t``; trailing features are dropped."""
    x = np.asarray(x, dtype=np.float64)
    m = x.shape[-1]
    if spec.size > m:
        raise ValueError(f"cannot reshape {m} features into {spec.rows_p}x{spec.cols_t}")
    head = x[..., : spec.size]
    if spec.order == "row":
        return head.reshape(x.shape[:-1] + (spec.rows_p, spec.cols_t))
    flipped = head.reshape(x.shape[:-1] + (spec.cols_t, spec.rows_p))
    return np.swapaxes(flipped, -1, -2).copy()


def sample_second_moment(xm, center_rows=False):
    """``X X^T / (t - 1)`` for a ``p x t`` block (or a stack of them).

    No mean is removed unless ``center_rows`` is set.
    """
    xm = np.asarray(xm, dtype=np.float64)
    t = xm.shape[-1]
    if t < 2:
        raise ValueError("need at least two columns (t >= 2)")
    if center_rows:
        xm = xm - xm.mean(axis=-1, keepdims=True)
    c = xm @ np.swapaxes(xm, -1, -2) / (t - 1)
    return 0.5 * (c + np.swapaxes(c, -1, -2))


def shrink(c, cfg=None, check=True):
    """Shrink towards the trace-matched identity:
    ``(1 - alpha) C + alpha * tr(C)/p * I``.

    The trace is preserved whenever ``tr(C) > 0``. With ``check`` the
    result is certified positive definite and ``NotSPDError`` raised
    otherwise.
    """
    cfg = cfg or ShrinkageConfig()
    c = as_sym(c)
    p = c.shape[-1]
    mu = np.trace(c, axis1=-2, axis2=-1) / p
    mu = np.where(mu > 0, mu, cfg.trace_floor)
    eye = np.eye(p)
    out = (1.0 - cfg.alpha) * c + cfg.alpha * np.asarray(mu)[..., None, None] * eye
    if check:
        w = sym_eig(out).values
        ok = _spectrum_ok(w)
        if not np.all(ok):
            raise NotSPDError(
                f"shrunk matrix is not positive definite (alpha={cfg.alpha}, "
                f"min eigenvalue {np.min(w[..., -1]):.3e})"
            )
    return out


def extract_covariances(table, pp, spec, cfg=None, center_rows=False):
    """Full per-record pipeline; returns an ``(n, p, p)`` stack in row order."""
    cfg = cfg or ShrinkageConfig()
    if len(table) == 0:
        return np.empty((0, spec.rows_p, spec.rows_p))
    x = apply_preprocessor(pp, table)
    blocks = reshape_sample(x, spec)
    return shrink(sample_second_moment(blocks, center_rows=center_rows), cfg)
