"""End-to-end training and scoring on record tables."""
from dataclasses import asdict, dataclass, field

import numpy as np

from .classify import (
    TrainConfig,
    ae_fit,
    ae_predict,
    ae_score,
    lda_decision,
    lda_fit,
    lda_predict,
    mdrm_fit,
    mdrm_predict,
    mdrm_score,
    mlp_fit,
    mlp_predict,
)
from .dataio import ATTACK, NORMAL, NSLKDD, UNSW, ModelBundle, binarize_labels
from .features import ReshapeSpec, ShrinkageConfig, extract_covariances, fit_preprocessor
from .manifold import KarcherConfig, karcher_mean, tsm_features

CLASSIFIERS = ("mdrm", "lda", "mlp", "ae")

DEFAULT_SHAPE = {NSLKDD: (10, 4), UNSW: (13, 3)}
VIZ_SHAPE = {NSLKDD: (2, 20), UNSW: (3, 13)}


@dataclass
class RunConfig:
    dataset: str = NSLKDD
    train: str = None
    test: str = None
    model: str = None
    classifier: str = "mdrm"
    p: int = None
    t: int = None
    alpha: float = 0.1
    seed: int = 0
    out_dir: str = "out"
    drop_column: str = None
    center_rows: bool = False
    order: str = "row"
    epochs: int = 20
    batch: int = 128
    lr: float = 0.01
    hidden: int = 64
    karcher_iters: int = 50
    karcher_tol: float = 1e-8

    def __post_init__(self):
        if self.dataset not in DEFAULT_SHAPE:
            raise ValueError(f"unknown dataset {self.dataset!r}")
        if self.classifier not in CLASSIFIERS:
            raise ValueError(f"unknown classifier {self.classifier!r}")
        p, t = DEFAULT_SHAPE[self.dataset]
        if self.p is None:
            self.p = p
        if self.t is None:
            self.t = t
        # fail early on out-of-range settings
        self.reshape, self.shrinkage, self.karcher
        if self.epochs < 1 or self.batch < 1 or self.hidden < 1 or not self.lr > 0:
            raise ValueError("epochs, batch, hidden and lr must be positive")

    def model_fields(self):
        """Settings that determine the fitted model (no paths)."""
        d = asdict(self)
        for k in ("train", "test", "model", "out_dir"):
            d.pop(k)
        return d

    @property
    def reshape(self):
        return ReshapeSpec(self.p, self.t, self.order)

    @property
    def shrinkage(self):
        return ShrinkageConfig(self.alpha)

    @property
    def karcher(self):
        return KarcherConfig(self.karcher_iters, self.karcher_tol)

    def train_config(self):
        return TrainConfig(self.epochs, self.batch, self.lr, sub_seed(self.seed, 0))


def sub_seed(seed, k):
    """Deterministic per-component seed derived from the run seed."""
    return int(np.random.SeedSequence([seed, k]).generate_state(1)[0])


def retained_columns(table, drop_column=None):
    cols = table.default_columns()
    if drop_column is not None:
        if drop_column not in cols:
            raise ValueError(f"cannot drop {drop_column!r}: not a retained column")
        cols = [c for c in cols if c != drop_column]
    return cols


def table_covariances(table, pp, spec, shrinkage, center_rows=False):
    return extract_covariances(table.features, pp, spec, shrinkage, center_rows)


def train(table, cfg):
    """Fit preprocessing and the chosen classifier on ``table`` only."""
    cols = retained_columns(table, cfg.drop_column)
    if cfg.p * cfg.t > len(cols):
        raise ValueError(f"{cfg.p}x{cfg.t} reshape needs {cfg.p * cfg.t} features, only {len(cols)} retained")
    pp = fit_preprocessor(table.features, table.column_kinds, cols)
    covs = table_covariances(table, pp, cfg.reshape, cfg.shrinkage, cfg.center_rows)
    y = binarize_labels(table)
    ref = None
    if cfg.classifier == "mdrm":
        model = mdrm_fit(covs, y, cfg.karcher)
    else:
        ref = karcher_mean(covs, cfg.karcher)
        v = tsm_features(ref, covs)
        if cfg.classifier == "lda":
            model = lda_fit(v, y)
        elif cfg.classifier == "mlp":
            model = mlp_fit(v, y, hidden=(cfg.hidden,), cfg=cfg.train_config())
        else:
            normal = v[y == NORMAL]
            model = ae_fit(normal, cfg.train_config())
    return ModelBundle(
        dataset=table.dataset,
        preprocessor=pp,
        reshape=cfg.reshape,
        shrinkage=cfg.shrinkage,
        classifier=model,
        reference_mean=ref,
        center_rows=cfg.center_rows,
        config=cfg.model_fields(),
    )


def bundle_covariances(bundle, table):
    return table_covariances(table, bundle.preprocessor, bundle.reshape, bundle.shrinkage, bundle.center_rows)


def predict(bundle, table):
    """Predicted binary labels and attack scores (higher = more malicious)."""
    if table.dataset != bundle.dataset:
        raise ValueError(f"bundle was trained on {bundle.dataset}, table is {table.dataset}")
    covs = bundle_covariances(bundle, table)
    return predict_covariances(bundle, covs)


def predict_covariances(bundle, covs):
    kind = bundle.kind
    model = bundle.classifier
    if kind == "mdrm":
        labels = mdrm_predict(model, covs)
        scores = mdrm_score(model, covs, ATTACK) if ATTACK in model.class_labels else None
        return list(labels), scores
    v = tsm_features(bundle.reference_mean, covs)
    if kind == "lda":
        scores = lda_decision(model, v)
        if model.class_labels[1] != ATTACK:
            scores = -scores
        return lda_predict(model, v), scores
    if kind == "mlp":
        labels, proba = mlp_predict(model, v)
        scores = proba[:, model.class_labels.index(ATTACK)] if ATTACK in model.class_labels else None
        return labels, scores
    return ae_predict(model, v), ae_score(model, v)


def tangent_coordinates(train_table, tables, p, t, alpha=0.1, karcher=None):
    """Tangent coordinates at the training-set Karcher mean for ``p x t``
    reshapes. Returns the reference and one coordinate array per table."""
    cols = retained_columns(train_table)
    if p * t > len(cols):
        raise ValueError(f"{p}x{t} reshape needs {p * t} features, only {len(cols)} retained")
    spec = ReshapeSpec(p, t)
    shrink_cfg = ShrinkageConfig(alpha)
    pp = fit_preprocessor(train_table.features, train_table.column_kinds, cols)
    train_covs = table_covariances(train_table, pp, spec, shrink_cfg)
    ref = karcher_mean(train_covs, karcher or KarcherConfig())
    out = [tsm_features(ref, train_covs)]
    for tab in tables:
        out.append(tsm_features(ref, table_covariances(tab, pp, spec, shrink_cfg)))
    return ref, out
