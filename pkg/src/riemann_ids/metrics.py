"""Confusion matrices, precision/recall/F1 averages and ROC/AUC."""
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are actual classes, columns predicted, both in ``class_labels`` order."""

    class_labels: tuple
    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())

    def to_dict(self):
        return {"class_labels": [str(c) for c in self.class_labels], "counts": self.counts.tolist()}


def _label_order(values):
    try:
        return tuple(sorted(set(values)))
    except TypeError:
        return tuple(sorted(set(values), key=str))


def confusion(actual, predicted, labels=None):
    actual = list(actual)
    predicted = list(predicted)
    if len(actual) != len(predicted):
        raise ValueError(f"length mismatch: {len(actual)} actual vs {len(predicted)} predicted")
    if not actual:
        raise ValueError("confusion matrix of an empty sample")
    labels = tuple(labels) if labels is not None else _label_order(actual + predicted)
    index = {c: i for i, c in enumerate(labels)}
    extra = (set(actual) | set(predicted)) - set(index)
    if extra:
        raise ValueError(f"labels not in class list: {sorted(map(str, extra))}")
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    np.add.at(counts, ([index[a] for a in actual], [index[p] for p in predicted]), 1)
    return ConfusionMatrix(labels, counts)


def accuracy(cm):
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(cm.counts)) / cm.total


def _ratio(num, den):
    zero = den == 0
    out = np.divide(num, np.where(zero, 1, den), dtype=np.float64)
    return np.where(zero, 0.0, out), zero


@dataclass
class PRF:
    """Per-class precision/recall/F1 plus their macro, micro and weighted
    averages. ``undefined`` flags per-class values that hit a zero
    denominator and were set to 0."""

    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    macro: dict
    micro: dict
    weighted: dict
    undefined: dict = field(default_factory=dict)


def precision_recall_f1(cm):
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    c = cm.counts.astype(np.float64)
    tp = np.diag(c)
    pred_pos = c.sum(axis=0)
    support = c.sum(axis=1)
    precision, p_undef = _ratio(tp, pred_pos)
    recall, r_undef = _ratio(tp, support)
    f1, f_undef = _ratio(2 * precision * recall, precision + recall)

    micro_p = tp.sum() / pred_pos.sum()
    micro_r = tp.sum() / support.sum()
    micro_f = 0.0 if micro_p + micro_r == 0 else 2 * micro_p * micro_r / (micro_p + micro_r)
    w = support / support.sum()
    return PRF(
        precision=precision,
        recall=recall,
        f1=f1,
        support=support.astype(np.int64),
        macro={"precision": float(precision.mean()), "recall": float(recall.mean()), "f1": float(f1.mean())},
        micro={"precision": float(micro_p), "recall": float(micro_r), "f1": float(micro_f)},
        weighted={
            "precision": float(w @ precision),
            "recall": float(w @ recall),
            "f1": float(w @ f1),
        },
        undefined={"precision": p_undef, "recall": r_undef, "f1": f_undef},
    )


def roc_curve(actual, scores, positive_label):
    """ROC points at every distinct score, highest first.

    Samples sharing a score cross the threshold together. Returns
    ``(fpr, tpr, thresholds)``, with a leading ``(0, 0)`` point at
    threshold ``+inf``.
    """
    actual = np.asarray(list(actual), dtype=object)
    scores = np.asarray(scores, dtype=np.float64)
    if actual.shape[0] != scores.shape[0]:
        raise ValueError("labels and scores differ in length")
    pos = actual == positive_label
    n_pos = int(pos.sum())
    n_neg = pos.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both positive and negative samples")
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    hits = pos[order].astype(np.float64)
    last_of_group = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tps = np.cumsum(hits)[last_of_group]
    fps = (last_of_group + 1) - tps
    tpr = np.r_[0.0, tps / n_pos]
    fpr = np.r_[0.0, fps / n_neg]
    thresholds = np.r_[np.inf, s[last_of_group]]
    return fpr, tpr, thresholds


def roc_auc(actual, scores, positive_label):
    """Trapezoidal area under the ROC curve; returns ``(auc, (fpr, tpr))``."""
    fpr, tpr, _ = roc_curve(actual, scores, positive_label)
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return auc, (fpr, tpr)


@dataclass
class EvalReport:
    cm: ConfusionMatrix
    accuracy: float
    prf: PRF
    auc: float = None
    roc: tuple = None

    def to_dict(self):
        labels = [str(c) for c in self.cm.class_labels]
        per_class = {
            lab: {
                "precision": float(self.prf.precision[i]),
                "recall": float(self.prf.recall[i]),
                "f1": float(self.prf.f1[i]),
                "support": int(self.prf.support[i]),
                "undefined": [k for k, v in self.prf.undefined.items() if v[i]],
            }
            for i, lab in enumerate(labels)
        }
        return {
            "confusion_matrix": self.cm.to_dict(),
            "total": self.cm.total,
            "accuracy": self.accuracy,
            "per_class": per_class,
            "macro": self.prf.macro,
            "micro": self.prf.micro,
            "weighted": self.prf.weighted,
            "auc": self.auc,
        }

    def to_text(self):
        labels = [str(c) for c in self.cm.class_labels]
        width = max(9, *(len(s) for s in labels))
        lines = ["Confusion matrix (rows = actual, columns = predicted)"]
        lines.append(" " * width + "".join(f"{s:>{width + 2}}" for s in labels))
        for lab, row in zip(labels, self.cm.counts):
            lines.append(f"{lab:>{width}}" + "".join(f"{int(v):>{width + 2}}" for v in row))
        lines.append("")
        lines.append(f"{'class':>{width}}  precision     recall         f1    support")
        for i, lab in enumerate(labels):
            lines.append(
                f"{lab:>{width}}  {self.prf.precision[i]:9.4f}  {self.prf.recall[i]:9.4f}"
                f"  {self.prf.f1[i]:9.4f}  {int(self.prf.support[i]):9d}"
            )
        for name in ("macro", "micro", "weighted"):
            agg = getattr(self.prf, name)
            lines.append(
                f"{name:>{width}}  {agg['precision']:9.4f}  {agg['recall']:9.4f}  {agg['f1']:9.4f}"
            )
        lines.append("")
        lines.append(f"accuracy: {self.accuracy:.4f}  (n = {self.cm.total})")
        if self.auc is not None:
            lines.append(f"auc:      {self.auc:.4f}")
        return "\n".join(lines) + "\n"


def evaluate(actual, predicted, labels=None, scores=None, positive_label=None):
    """Build an :class:`EvalReport`; AUC only when ``scores`` and a
    ``positive_label`` are given for a two-class problem."""
    cm = confusion(actual, predicted, labels)
    report = EvalReport(cm=cm, accuracy=accuracy(cm), prf=precision_recall_f1(cm))
    if scores is not None and positive_label is not None and len(set(actual)) == 2:
        report.auc, report.roc = roc_auc(actual, scores, positive_label)
    return report
