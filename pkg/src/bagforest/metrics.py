"""Binary classification metrics: confusion counts, precision/recall/F1,
Cohen's kappa and ROC/AUC."""

from __future__ import annotations

import os
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class LabelScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class Averages:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ClassificationReport:
    per_label: dict
    macro: Averages
    weighted: Averages
    accuracy: float
    kappa: float
    confusion: ConfusionMatrix
    degenerate: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "per_label": {
                str(k): {
                    "precision": v.precision,
                    "recall": v.recall,
                    "f1": v.f1,
                    "support": v.support,
                }
                for k, v in sorted(self.per_label.items())
            },
            "macro": vars(self.macro).copy(),
            "weighted": vars(self.weighted).copy(),
            "accuracy": self.accuracy,
            "kappa": self.kappa,
            "confusion": vars(self.confusion).copy(),
            "degenerate": list(self.degenerate),
            "display": self.display(),
        }

    def display(self) -> dict:
        """Whole-percent strings laid out like the usual summary tables."""
        return {
            "precision_recall_averages": {
                "Macro": [percent(self.macro.precision), percent(self.macro.recall)],
                "Weighted": [percent(self.weighted.precision), percent(self.weighted.recall)],
            },
            "precision_recall_labels": {
                f"Label {k}": [percent(v.precision), percent(v.recall)]
                for k, v in sorted(self.per_label.items())
            },
            "f1_averages": {
                "Macro": percent(self.macro.f1),
                "Weighted": percent(self.weighted.f1),
            },
            "f1_labels": {f"Label {k}": percent(v.f1) for k, v in sorted(self.per_label.items())},
            "accuracy": percent(self.accuracy),
            "kappa": f"{round_half_away(self.kappa, 2):.2f}",
        }


def round_half_away(x: float, places: int) -> float:
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP))


def percent(x: float) -> str:
    """``0.9447 -> '94%'``, rounding halves away from zero."""
    return f"{int(round_half_away(100.0 * x, 0))}%"


def _as_labels(v, name):
    a = np.asarray(v)
    if a.ndim != 1:
        raise ValueError(f"{name} must be a 1-D label vector")
    if a.size and not np.isin(a, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return a.astype(np.int64)


def _pair(predicted, actual):
    p = _as_labels(predicted, "predicted")
    a = _as_labels(actual, "actual")
    if len(p) != len(a):
        raise ValueError(f"length mismatch: {len(p)} predictions vs {len(a)} labels")
    if len(p) == 0:
        raise ValueError("empty label vectors")
    return p, a


def confusion(predicted, actual) -> ConfusionMatrix:
    p, a = _pair(predicted, actual)
    tp = int(np.sum((p == 1) & (a == 1)))
    fp = int(np.sum((p == 1) & (a == 0)))
    fn = int(np.sum((p == 0) & (a == 1)))
    return ConfusionMatrix(tp, fp, fn, len(p) - tp - fp - fn)


def _ratio(num, den):
    return (num / den, False) if den else (0.0, True)


def _precision_recall_flags(cm: ConfusionMatrix, positive_label: int):
    if positive_label == 1:
        hit, false_alarm, miss = cm.tp, cm.fp, cm.fn
    elif positive_label == 0:
        hit, false_alarm, miss = cm.tn, cm.fn, cm.fp
    else:
        raise ValueError("positive_label must be 0 or 1")
    p, p_bad = _ratio(hit, hit + false_alarm)
    r, r_bad = _ratio(hit, hit + miss)
    return p, r, p_bad, r_bad


def precision_recall(cm: ConfusionMatrix, positive_label: int = 1) -> tuple[float, float]:
    """Precision and recall treating ``positive_label`` as the positive class.

    A zero denominator yields 0; :func:`report` records such cases in
    ``ClassificationReport.degenerate``.
    """
    p, r, _, _ = _precision_recall_flags(cm, positive_label)
    return p, r


def f1(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def _kappa_from_counts(cm: ConfusionMatrix):
    n = cm.total
    po = (cm.tp + cm.tn) / n
    pred1, act1 = cm.tp + cm.fp, cm.tp + cm.fn
    pe = (pred1 * act1 + (n - pred1) * (n - act1)) / (n * n)
    if pe == 1.0:
        return (1.0 if po == 1.0 else 0.0), True
    return (po - pe) / (1.0 - pe), False


def cohen_kappa(predicted, actual) -> float:
    """Chance-corrected agreement ``(P_o - P_e) / (1 - P_e)``.

    When the expected agreement is 1 (both vectors constant) the ratio is
    undefined; 1.0 is returned for identical vectors, otherwise 0.0.
    """
    return _kappa_from_counts(confusion(predicted, actual))[0]


def report(predicted, actual) -> ClassificationReport:
    cm = confusion(predicted, actual)
    flags = []
    per_label = {}
    for label in (0, 1):
        p, r, p_bad, r_bad = _precision_recall_flags(cm, label)
        if p_bad:
            flags.append(f"precision[{label}]: no predictions of this label")
        if r_bad:
            flags.append(f"recall[{label}]: no true instances of this label")
        support = cm.tp + cm.fn if label == 1 else cm.tn + cm.fp
        per_label[label] = LabelScores(p, r, f1(p, r), support)

    def avg(attr, weights):
        vals = np.array([getattr(per_label[k], attr) for k in (0, 1)])
        return float(np.dot(vals, weights) / np.sum(weights))

    n = cm.total
    w = np.array([per_label[0].support, per_label[1].support], dtype=float)
    eq = np.ones(2)
    macro = Averages(avg("precision", eq), avg("recall", eq), avg("f1", eq))
    weighted = Averages(avg("precision", w), avg("recall", w), avg("f1", w))
    kappa, k_bad = _kappa_from_counts(cm)
    if k_bad:
        flags.append("kappa: expected agreement is 1")
    return ClassificationReport(
        per_label, macro, weighted, (cm.tp + cm.tn) / n, kappa, cm, tuple(flags)
    )


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    @property
    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist(), self.thresholds.tolist()))


def roc_curve(scores, actual) -> RocCurve:
    """ROC points for the rule ``score >= threshold`` predicts label 1.

    Thresholds run over the distinct scores in descending order, preceded by
    ``+inf`` so the curve starts at (0, 0). The area is the trapezoidal
    integral of the resulting step points.
    """
    s = np.asarray(scores, dtype=float)
    a = _as_labels(actual, "actual")
    if s.ndim != 1 or len(s) != len(a):
        raise ValueError("scores and labels must be 1-D vectors of equal length")
    if np.isnan(s).any():
        raise ValueError("scores contain NaN")
    n_pos = int(a.sum())
    n_neg = len(a) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC is undefined unless both classes are present")

    order = np.argsort(-s, kind="stable")
    s_sorted, a_sorted = s[order], a[order]
    # last index of each run of equal scores
    ends = np.flatnonzero(np.r_[s_sorted[1:] != s_sorted[:-1], True])
    tps = np.cumsum(a_sorted)[ends]
    fps = (ends + 1) - tps
    tpr = np.r_[0.0, tps / n_pos]
    fpr = np.r_[0.0, fps / n_neg]
    thresholds = np.r_[np.inf, s_sorted[ends]]
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(fpr, tpr, thresholds, auc)


def write_roc_csv(curve: RocCurve, path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(f"# auc={curve.auc!r}\n")
        fh.write("threshold,fpr,tpr\n")
        for f_, t_, th in curve.points:
            fh.write(f"{th!r},{f_!r},{t_!r}\n")
    os.replace(tmp, path)
