"""Bootstrap-aggregated decision trees with out-of-bag scoring."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np

from . import tree as _tree
from .data import Dataset
from .rng import stream

FORMAT_VERSION = 1

# max_depth may be an int, None (unbounded) or this marker for ceil(log2 n_train)
LOG2_DEPTH = "log2"


class ModelError(ValueError):
    """Invalid forest configuration, model file, or model/data mismatch."""


@dataclass(frozen=True)
class ForestConfig:
    n_estimators: int = 100
    max_depth: Union[int, str, None] = LOG2_DEPTH
    features_per_split: Optional[int] = None
    min_samples_leaf: int = 1
    seed: int = 42

    def __post_init__(self):
        if not isinstance(self.n_estimators, int) or self.n_estimators < 1:
            raise ModelError("n_estimators must be positive")
        if isinstance(self.max_depth, str):
            if self.max_depth != LOG2_DEPTH:
                raise ModelError(f"max_depth must be an integer, None or {LOG2_DEPTH!r}")
        elif self.max_depth is not None and self.max_depth < 0:
            raise ModelError("max_depth must be non-negative")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ModelError("features_per_split must be positive")
        if self.min_samples_leaf < 1:
            raise ModelError("min_samples_leaf must be positive")
        if self.seed < 0:
            raise ModelError("seed must be non-negative")

    def resolve(self, n_train: int, n_features: int) -> "ForestConfig":
        """Concrete copy with data-dependent defaults filled in."""
        depth = self.max_depth
        if depth == LOG2_DEPTH:
            depth = _tree.default_depth(n_train)
        k = self.features_per_split
        if k is None:
            k = max(1, math.isqrt(n_features))
        if k > n_features:
            raise ModelError(f"features_per_split={k} exceeds n_features={n_features}")
        return ForestConfig(self.n_estimators, depth, k, self.min_samples_leaf, self.seed)


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple
    bootstrap_indices: tuple
    config: ForestConfig
    oob_score: Optional[float]
    n_features: int
    feature_names: tuple[str, ...] = ()

    def _check(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ModelError(
                f"row width {X.shape[-1]} does not match model n_features={self.n_features}"
            )
        return X

    def votes(self, X) -> np.ndarray:
        """Per-tree predictions, shape ``(n_trees, n_rows)``."""
        X = self._check(X)
        return np.stack([_tree.predict_many(t, X) for t in self.trees])

    def predict_score(self, X) -> np.ndarray:
        """Fraction of trees voting for label 1, one value per row."""
        return self.votes(X).mean(axis=0)

    def predict(self, X) -> np.ndarray:
        v = self.votes(X)
        # strict majority; an exact half goes to label 0
        return (2 * v.sum(axis=0) > v.shape[0]).astype(np.int64)


def bootstrap_sample(n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise ValueError("cannot bootstrap an empty sample")
    return rng.integers(0, n, size=n)


def oob_exclusion_probability(k: int) -> float:
    """Chance a given row is missed by ``k`` uniform draws from ``k`` rows."""
    if k < 1:
        raise ValueError("k must be positive")
    # log1p keeps precision for large k
    return math.exp(k * math.log1p(-1.0 / k)) if k > 1 else 0.0


def _grow_one(args):
    rows, labels, cfg, index = args
    rng = stream(cfg.seed, "tree", index)
    idx = bootstrap_sample(len(labels), rng)
    tcfg = _tree.TreeConfig(cfg.max_depth, cfg.min_samples_leaf, cfg.features_per_split)
    return _tree.grow(rows[idx], labels[idx], tcfg, rng), idx


def fit(train: Dataset, cfg: ForestConfig = ForestConfig(), n_jobs: int = 1) -> ForestModel:
    """Grow ``cfg.n_estimators`` trees on bootstrap resamples of ``train``.

    Tree ``i`` draws its bootstrap sample and its per-node feature subsets
    from a stream keyed on ``(cfg.seed, i)``, so the fitted model is the same
    for any ``n_jobs``.
    """
    rcfg = cfg.resolve(train.n_rows, train.n_features)
    rows = np.ascontiguousarray(train.rows)
    labels = np.ascontiguousarray(train.labels)
    jobs = [(rows, labels, rcfg, i) for i in range(rcfg.n_estimators)]
    if n_jobs is not None and n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            grown = list(ex.map(_grow_one, jobs, chunksize=max(1, len(jobs) // (4 * n_jobs))))
    else:
        grown = [_grow_one(j) for j in jobs]
    trees = tuple(t for t, _ in grown)
    boots = tuple(i for _, i in grown)
    m = ForestModel(trees, boots, rcfg, None, train.n_features, train.feature_names)
    return ForestModel(trees, boots, rcfg, oob_score(m, train), train.n_features, train.feature_names)


def predict(m: ForestModel, row) -> int:
    return int(m.predict(row)[0])


def predict_score(m: ForestModel, row) -> float:
    return float(m.predict_score(row)[0])


def oob_votes(m: ForestModel, train: Dataset):
    """Out-of-bag vote tallies: (votes for label 1, number of OOB trees) per row."""
    n = train.n_rows
    ones = np.zeros(n, dtype=np.int64)
    count = np.zeros(n, dtype=np.int64)
    for t, idx in zip(m.trees, m.bootstrap_indices):
        idx = np.asarray(idx)
        if idx.size and idx.max() >= n:
            raise ModelError("bootstrap indices exceed the training set size")
        out = np.ones(n, dtype=bool)
        out[idx] = False
        if not out.any():
            continue
        ones[out] += _tree.predict_many(t, train.rows[out])
        count[out] += 1
    return ones, count


def oob_score(m: ForestModel, train: Dataset) -> Optional[float]:
    """OOB accuracy, or ``None`` when no row was left out of any bootstrap."""
    ones, count = oob_votes(m, train)
    seen = count > 0
    if not seen.any():
        return None
    pred = (2 * ones[seen] > count[seen]).astype(np.int64)
    return float(np.mean(pred == train.labels[seen]))


def _config_dict(cfg: ForestConfig) -> dict:
    return asdict(cfg)


def to_dict(m: ForestModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "config": _config_dict(m.config),
        "n_features": m.n_features,
        "feature_names": list(m.feature_names),
        "oob_score": m.oob_score,
        "trees": [_tree.to_dict(t) for t in m.trees],
        "bootstrap_indices": [np.asarray(i).tolist() for i in m.bootstrap_indices],
    }


def from_dict(d: dict) -> ForestModel:
    if d.get("format_version") != FORMAT_VERSION:
        raise ModelError(f"unsupported model format_version {d.get('format_version')!r}")
    try:
        cfg = ForestConfig(**d["config"])
        trees = tuple(_tree.from_dict(t) for t in d["trees"])
        boots = tuple(np.asarray(i, dtype=np.int64) for i in d["bootstrap_indices"])
        m = ForestModel(
            trees, boots, cfg, d["oob_score"], int(d["n_features"]), tuple(d["feature_names"])
        )
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model document: {exc}") from None
    if len(trees) != cfg.n_estimators or len(boots) != len(trees):
        raise ModelError("tree count does not match config.n_estimators")
    return m


def dumps(m: ForestModel) -> str:
    return json.dumps(to_dict(m), separators=(",", ":"), allow_nan=False) + "\n"


def save(m: ForestModel, path) -> None:
    """Write the model JSON atomically (no partial file on failure)."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(dumps(m))
    os.replace(tmp, path)


def load(path) -> ForestModel:
    try:
        with open(path, encoding="utf-8") as fh:
            return from_dict(json.load(fh))
    except FileNotFoundError:
        raise ModelError(f"missing model file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: not valid JSON ({exc})") from None
