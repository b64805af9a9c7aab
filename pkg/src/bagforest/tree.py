"""Binary CART classification trees grown on Gini impurity."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Union

import numpy as np


@dataclass(frozen=True)
class Leaf:
    class_counts: tuple[int, int]
    predicted: int


@dataclass(frozen=True)
class Internal:
    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Internal]


@dataclass(frozen=True)
class TreeConfig:
    """Growth bounds for a single tree.

    ``max_depth=None`` grows until leaves are pure or unsplittable and
    ``features_per_split=None`` considers every feature at every node.
    """

    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    features_per_split: Optional[int] = None

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be positive")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError("features_per_split must be positive")


class Split(NamedTuple):
    feature_index: int
    threshold: float
    impurity_decrease: float


def gini_impurity(class_counts) -> float:
    n0, n1 = class_counts
    total = n0 + n1
    if n0 < 0 or n1 < 0:
        raise ValueError("class counts must be non-negative")
    if total == 0:
        raise ValueError("gini impurity of an empty node is undefined")
    p0, p1 = n0 / total, n1 / total
    return 1.0 - p0 * p0 - p1 * p1


def _make_leaf(labels) -> Leaf:
    n1 = int(np.count_nonzero(labels))
    n0 = len(labels) - n1
    return Leaf((n0, n1), 1 if n1 > n0 else 0)


def _split_score(l0, l1, r0, r1) -> Fraction:
    # sum over children of (sum of squared counts) / size; larger is purer
    nl, nr = l0 + l1, r0 + r1
    return Fraction(l0 * l0 + l1 * l1, nl) + Fraction(r0 * r0 + r1 * r1, nr)


def best_split(
    rows, labels, candidate_features, min_samples_leaf: int = 1, require_gain: bool = True
) -> Optional[Split]:
    """Best Gini split over midpoints of consecutive distinct values.

    Parameters
    ----------
    rows : ndarray of shape (n, n_features)
    labels : ndarray of shape (n,) with values in {0, 1}
    candidate_features : sequence of int
        Column ordinals to search.
    min_samples_leaf : int
        Splits leaving fewer rows than this on either side are skipped.
    require_gain : bool
        With the default ``True`` a split must strictly lower the weighted
        impurity. ``False`` also accepts a best split of zero gain, which
        :func:`grow` needs for patterns such as XOR.

    Returns
    -------
    Split or None
        ``None`` when no admissible split qualifies. Equal gains resolve to
        the lower feature index, then the lower threshold.
    """
    rows = np.asarray(rows, dtype=float)
    labels = np.asarray(labels)
    n = len(labels)
    if n < 2:
        return None
    t1 = int(np.count_nonzero(labels))
    t0 = n - t1
    if t0 == 0 or t1 == 0:
        return None

    per_feature = []
    for f in sorted(set(int(f) for f in candidate_features)):
        x = rows[:, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        c1 = np.cumsum(labels[order] != 0)
        left = np.arange(1, n)
        ok = (xs[1:] > xs[:-1]) & (left >= min_samples_leaf) & (n - left >= min_samples_leaf)
        if not ok.any():
            continue
        left = left[ok]
        l1 = c1[left - 1].astype(float)
        l0 = left - l1
        r1 = t1 - l1
        r0 = (n - left) - r1
        score = (l0 * l0 + l1 * l1) / left + (r0 * r0 + r1 * r1) / (n - left)
        per_feature.append((f, xs, c1, left, score))
    if not per_feature:
        return None

    # float scores shortlist; exact rationals settle ties and near-ties
    top = max(float(s.max()) for *_, s in per_feature)
    tol = 1e-9 * max(1.0, top)
    best = None
    for f, xs, c1, left, score in per_feature:
        for k in np.flatnonzero(score >= top - tol):
            i = int(left[k])
            lo, hi = xs[i - 1], xs[i]
            thr = lo + (hi - lo) / 2.0
            if not lo <= thr < hi:
                thr = lo
            l1 = int(c1[i - 1])
            exact = _split_score(i - l1, l1, t0 - (i - l1), t1 - l1)
            key = (exact, -f, -thr)
            if best is None or key > best[0]:
                best = (key, f, thr, exact)
    _, f, thr, exact = best
    parent = Fraction(t0 * t0 + t1 * t1, n)
    if exact < parent or (require_gain and exact == parent):
        return None
    return Split(f, float(thr), float((exact - parent) / n))


def grow(rows, labels, cfg: TreeConfig, rng: np.random.Generator) -> TreeNode:
    """Grow a tree greedily, sampling candidate features afresh at each node.

    Stops at ``cfg.max_depth``, at pure nodes, when a node is too small to
    leave ``min_samples_leaf`` rows on both sides, or when the sampled
    features cannot separate the node's rows at all. An impure node takes
    its best split even at zero gain, since the children of a zero-gain
    split may still separate (XOR).
    """
    rows = np.asarray(rows, dtype=float)
    labels = np.asarray(labels)
    if rows.ndim != 2 or len(labels) == 0 or rows.shape[0] != len(labels):
        raise ValueError("grow needs a non-empty (n, n_features) matrix with n labels")
    n_features = rows.shape[1]
    k = n_features if cfg.features_per_split is None else cfg.features_per_split
    if k > n_features:
        raise ValueError(f"features_per_split={k} exceeds n_features={n_features}")

    def build(idx, depth):
        y = labels[idx]
        if (
            (cfg.max_depth is not None and depth >= cfg.max_depth)
            or len(idx) < 2 * cfg.min_samples_leaf
            or y.min() == y.max()
        ):
            return _make_leaf(y)
        feats = np.sort(rng.choice(n_features, size=k, replace=False))
        split = best_split(rows[idx], y, feats, cfg.min_samples_leaf, require_gain=False)
        if split is None:
            return _make_leaf(y)
        go_left = rows[idx, split.feature_index] <= split.threshold
        return Internal(
            split.feature_index,
            split.threshold,
            build(idx[go_left], depth + 1),
            build(idx[~go_left], depth + 1),
        )

    return build(np.arange(len(labels)), 0)


def predict_one(t: TreeNode, row) -> int:
    while isinstance(t, Internal):
        if not 0 <= t.feature_index < len(row):
            raise IndexError(
                f"corrupt tree: feature {t.feature_index} outside row of width {len(row)}"
            )
        t = t.left if row[t.feature_index] <= t.threshold else t.right
    return t.predicted


def predict_many(t: TreeNode, X) -> np.ndarray:
    """Vectorised :func:`predict_one` over the rows of ``X``."""
    X = np.asarray(X, dtype=float)
    out = np.empty(X.shape[0], dtype=np.int64)

    def descend(node, idx):
        if isinstance(node, Leaf):
            out[idx] = node.predicted
            return
        if not 0 <= node.feature_index < X.shape[1]:
            raise IndexError(
                f"corrupt tree: feature {node.feature_index} outside row of width {X.shape[1]}"
            )
        mask = X[idx, node.feature_index] <= node.threshold
        descend(node.left, idx[mask])
        descend(node.right, idx[~mask])

    descend(t, np.arange(X.shape[0]))
    return out


def default_depth(n: int) -> int:
    """``ceil(log2 n)``: the depth at which a balanced tree isolates ``n`` rows."""
    if n < 1:
        raise ValueError("default_depth needs at least one observation")
    return (n - 1).bit_length()


def leaf_bound(n: int) -> int:
    if n < 0:
        raise ValueError("observation count must be non-negative")
    return 2 * n


def leaves(t: TreeNode) -> list[Leaf]:
    if isinstance(t, Leaf):
        return [t]
    return leaves(t.left) + leaves(t.right)


def depth(t: TreeNode) -> int:
    if isinstance(t, Leaf):
        return 0
    return 1 + max(depth(t.left), depth(t.right))


def to_dict(t: TreeNode) -> dict:
    if isinstance(t, Leaf):
        return {"counts": list(t.class_counts), "predicted": t.predicted}
    return {
        "feature_index": t.feature_index,
        "threshold": t.threshold,
        "left": to_dict(t.left),
        "right": to_dict(t.right),
    }


def from_dict(d: dict) -> TreeNode:
    if "counts" in d:
        n0, n1 = d["counts"]
        return Leaf((int(n0), int(n1)), int(d["predicted"]))
    return Internal(
        int(d["feature_index"]), float(d["threshold"]), from_dict(d["left"]), from_dict(d["right"])
    )
