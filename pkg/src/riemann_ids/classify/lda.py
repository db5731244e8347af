"""Two-class Fisher discriminant on tangent-space features."""
from dataclasses import dataclass

import numpy as np

from .mdrm import first_appearance

RIDGE = 1e-6


@dataclass
class LdaModel:
    projection: np.ndarray
    threshold: float
    class_labels: list

    def to_dict(self):
        return {
            "projection": self.projection.tolist(),
            "threshold": self.threshold,
            "class_labels": list(self.class_labels),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["projection"], dtype=np.float64), float(d["threshold"]), list(d["class_labels"]))


def lda_fit(features, labels):
    """Fisher direction ``(S_W + r I)^{-1} (mu_1 - mu_0)``.

    ``S_W`` is the pooled within-class covariance and ``r = 1e-6 tr(S_W)/d``
    keeps it invertible when features are collinear. The threshold is the
    projected midpoint of the two class means.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 1:
        raise ValueError("features must be an (n, d) array with d >= 1")
    labels = list(labels)
    classes = first_appearance(labels)
    if len(classes) != 2:
        raise ValueError(f"LDA needs exactly two classes, got {len(classes)}")
    arr = np.asarray(labels, dtype=object)
    x0, x1 = x[arr == classes[0]], x[arr == classes[1]]
    mu0, mu1 = x0.mean(axis=0), x1.mean(axis=0)
    r0, r1 = x0 - mu0, x1 - mu1
    sw = (r0.T @ r0 + r1.T @ r1) / max(len(x) - 2, 1)
    d = x.shape[1]
    ridge = RIDGE * np.trace(sw) / d
    if ridge <= 0:
        ridge = RIDGE
    w = np.linalg.solve(sw + ridge * np.eye(d), mu1 - mu0)
    if not np.linalg.norm(w) > 0:
        raise ValueError("class means coincide; no discriminant direction")
    threshold = float(w @ (mu0 + mu1) / 2.0)
    return LdaModel(w, threshold, classes)


def lda_decision(model, x):
    """Signed projected distance from the threshold; positive favours
    ``class_labels[1]``."""
    return np.asarray(x, dtype=np.float64) @ model.projection - model.threshold


def lda_predict(model, x):
    score = lda_decision(model, x)
    if np.ndim(score) == 0:
        return model.class_labels[int(score > 0)]
    return [model.class_labels[int(s > 0)] for s in score]
