"""Minimum distance to Riemannian mean."""
from dataclasses import dataclass

import numpy as np

from ..linalg import as_sym
from ..manifold import KarcherConfig, geodesic_distance, karcher_mean


def first_appearance(labels):
    return list(dict.fromkeys(labels))


@dataclass
class MdrmModel:
    class_labels: list
    class_means: np.ndarray
    dim_p: int

    def to_dict(self):
        return {
            "class_labels": list(self.class_labels),
            "class_means": self.class_means.tolist(),
            "dim_p": self.dim_p,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(list(d["class_labels"]), np.asarray(d["class_means"], dtype=np.float64), int(d["dim_p"]))


def mdrm_fit(covs, labels, cfg=None):
    """One Karcher mean per class, classes in first-appearance order."""
    covs = as_sym(covs)
    labels = list(labels)
    if covs.ndim != 3 or covs.shape[0] != len(labels):
        raise ValueError(f"{covs.shape[0] if covs.ndim == 3 else 1} matrices but {len(labels)} labels")
    classes = first_appearance(labels)
    if len(classes) < 2:
        raise ValueError("MDRM needs at least two classes")
    arr = np.asarray(labels, dtype=object)
    means = np.stack([karcher_mean(covs[arr == c], cfg or KarcherConfig()) for c in classes])
    return MdrmModel(classes, means, covs.shape[-1])


def mdrm_distances(model, covs):
    """Geodesic distance of every matrix to every class mean, shape (n, K)."""
    covs = as_sym(covs)
    single = covs.ndim == 2
    if single:
        covs = covs[None]
    if covs.shape[-1] != model.dim_p:
        raise ValueError(f"dimension mismatch: model p={model.dim_p}, input p={covs.shape[-1]}")
    d = np.stack([geodesic_distance(q, covs) for q in model.class_means], axis=-1)
    return d[0] if single else d


def mdrm_predict(model, covs):
    """Nearest class mean; ties go to the earliest class."""
    d = mdrm_distances(model, covs)
    idx = np.argmin(d, axis=-1)
    if np.ndim(idx) == 0:
        return model.class_labels[int(idx)]
    return [model.class_labels[i] for i in idx]


def mdrm_score(model, covs, positive_label):
    """Binary margin: distance to the other class mean minus distance to the
    ``positive_label`` mean. Larger means more positive."""
    if len(model.class_labels) != 2:
        raise ValueError("margin score is defined for two classes only")
    k = model.class_labels.index(positive_label)
    d = mdrm_distances(model, covs)
    return d[..., 1 - k] - d[..., k]
