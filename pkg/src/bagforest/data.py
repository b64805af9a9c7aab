"""CSV ingestion, imputation, label encoding and stratified splitting."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import stream

IMPUTE_STRATEGIES = ("median", "mean", "drop-row")

_LABELS = {"0": 0, "1": 1, "n": 0, "y": 1}


class DataError(ValueError):
    """Raised for malformed input files or invalid data-level arguments."""


@dataclass(frozen=True)
class ImputePolicy:
    strategy: str = "median"
    applied_columns: tuple[str, ...] = ()

    def __post_init__(self):
        if self.strategy not in IMPUTE_STRATEGIES:
            raise DataError(
                f"unknown impute strategy {self.strategy!r}; "
                f"expected one of {', '.join(IMPUTE_STRATEGIES)}"
            )


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix with named columns and binary labels.

    ``rows`` is a read-only ``(n_rows, n_features)`` float array and
    ``labels`` a read-only int array of 0/1 values.
    """

    feature_names: tuple[str, ...]
    rows: np.ndarray
    labels: np.ndarray
    impute: ImputePolicy = field(default_factory=ImputePolicy)

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        names = tuple(self.feature_names)
        if len(labels) < 1:
            raise DataError("dataset has no rows")
        if rows.shape != (len(labels), len(names)):
            raise DataError(
                f"shape mismatch: rows {rows.shape}, {len(labels)} labels, {len(names)} names"
            )
        if len(set(names)) != len(names):
            raise DataError("feature names must be unique")
        if np.isnan(rows).any():
            raise DataError("dataset contains missing values")
        if not np.isin(labels, (0, 1)).all():
            raise DataError("labels must be 0 or 1")
        rows.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.rows[:, self.feature_names.index(name)]
        except ValueError:
            raise DataError(f"unknown column {name!r}") from None

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.feature_names, self.rows[indices], self.labels[indices], self.impute)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.feature_names == other.feature_names
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SplitResult:
    train: Dataset
    test: Dataset
    seed: int
    test_fraction: float
    train_indices: np.ndarray
    test_indices: np.ndarray


def _parse_label(cell: str, line: int) -> int:
    try:
        return _LABELS[cell.strip().lower()]
    except KeyError:
        raise DataError(
            f"line {line}: label {cell!r} is not one of 0/1/N/Y"
        ) from None


def _parse_float(cell: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        return math.nan
    return value if math.isfinite(value) else math.nan


def load_csv(path, target_column: str, impute="median", exclude=()) -> Dataset:
    """Read a binary-labelled CSV file into a :class:`Dataset`.

    Parameters
    ----------
    path : str or path-like
        CSV file with a header row.
    target_column : str
        Header of the label column. Labels may be ``0/1`` or ``N/Y``
        (case-insensitive); anything else raises :class:`DataError`.
    impute : str or ImputePolicy
        ``"median"`` (default), ``"mean"`` or ``"drop-row"``. Blank and
        non-numeric feature cells count as missing.
    exclude : iterable of str
        Feature columns to ignore entirely (identifiers and the like).

    Returns
    -------
    Dataset
        Features in file order with the target removed. ``impute`` on the
        result records which columns had missing cells.
    """
    strategy = impute.strategy if isinstance(impute, ImputePolicy) else impute
    ImputePolicy(strategy)
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing file: {path}")

    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file, no header row") from None
        body = [r for r in reader if any(c.strip() for c in r)]

    target_column = target_column.strip()
    hits = [i for i, h in enumerate(header) if h == target_column]
    if not hits:
        raise DataError(f"missing target column {target_column!r}")
    if len(hits) > 1:
        raise DataError(f"duplicate target column {target_column!r}")
    target = hits[0]
    exclude = {e.strip() for e in exclude}
    unknown = exclude - set(header)
    if unknown:
        raise DataError(f"unknown excluded column(s): {', '.join(sorted(unknown))}")
    feats = [i for i, h in enumerate(header) if i != target and h not in exclude]
    names = [header[i] for i in feats]
    if len(set(names)) != len(names):
        dup = sorted({n for n in names if names.count(n) > 1})
        raise DataError(f"duplicate feature column(s): {', '.join(dup)}")
    if not body:
        raise DataError(f"{path}: no data rows")

    width = len(header)
    labels = np.empty(len(body), dtype=np.int64)
    X = np.full((len(body), len(feats)), np.nan)
    for r, row in enumerate(body):
        line = r + 2
        if len(row) > width:
            raise DataError(f"line {line}: {len(row)} cells but header has {width}")
        row = row + [""] * (width - len(row))
        labels[r] = _parse_label(row[target], line)
        for j, i in enumerate(feats):
            X[r, j] = _parse_float(row[i].strip())

    # a column with text cells but no numbers is categorical, not sparse
    for j, i in enumerate(feats):
        col = X[:, j]
        if np.isnan(col).all() and any(row[i].strip() for row in body if i < len(row)):
            raise DataError(
                f"column {names[j]!r} is non-numeric; encode categorical features first"
            )

    missing = np.isnan(X)
    applied = tuple(names[j] for j in range(len(names)) if missing[:, j].any())
    if strategy == "drop-row":
        keep = ~missing.any(axis=1)
        X, labels = X[keep], labels[keep]
        if len(labels) == 0:
            raise DataError("drop-row policy removed every row")
    else:
        reduce = np.median if strategy == "median" else np.mean
        for j in range(X.shape[1]):
            col = X[:, j]
            holes = np.isnan(col)
            if not holes.any():
                continue
            if holes.all():
                raise DataError(f"column {names[j]!r} is entirely missing")
            col[holes] = reduce(col[~holes])
    return Dataset(tuple(names), X, labels, ImputePolicy(strategy, applied))


def save_csv(d: Dataset, path, target_column: str = "label") -> None:
    """Write ``d`` in the ingestion schema, target column last."""
    if target_column in d.feature_names:
        raise DataError(f"target column {target_column!r} clashes with a feature name")
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*d.feature_names, target_column])
        for row, label in zip(d.rows.tolist(), d.labels.tolist()):
            w.writerow([*(repr(v) for v in row), label])
    os.replace(tmp, path)


def class_counts(d: Dataset) -> tuple[int, int]:
    n1 = int(d.labels.sum())
    return d.n_rows - n1, n1


def _allocate(sizes, fraction):
    """Largest-remainder allocation of ``round(n * fraction)`` test rows."""
    n = sum(sizes)
    total = int(math.floor(n * fraction + 0.5))
    total = min(max(total, 1), n - 1)
    quotas = [s * total / n for s in sizes]
    alloc = [int(math.floor(q)) for q in quotas]
    # ties go to the lower class label
    order = sorted(range(len(sizes)), key=lambda c: (-(quotas[c] - alloc[c]), c))
    for c in order[: total - sum(alloc)]:
        alloc[c] += 1
    return alloc


def stratified_split(d: Dataset, test_fraction: float = 0.25, seed: int = 42) -> SplitResult:
    """Deterministic stratified train/test partition.

    The test size is ``round(n_rows * test_fraction)`` distributed over the
    two classes by largest remainder, so each class's test share is within
    one row of its exact proportion.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    if seed < 0:
        raise DataError("seed must be non-negative")
    by_class = [np.flatnonzero(d.labels == c) for c in (0, 1)]
    for c, idx in enumerate(by_class):
        if len(idx) == 0:
            raise DataError(f"class {c} has no rows; cannot stratify")
    if d.n_rows < 2:
        raise DataError("need at least 2 rows to split")

    alloc = _allocate([len(i) for i in by_class], test_fraction)
    rng = stream(seed, "split")
    test_parts = []
    for idx, k in zip(by_class, alloc):
        test_parts.append(rng.permutation(idx)[:k])
    test_idx = np.sort(np.concatenate(test_parts))
    mask = np.ones(d.n_rows, dtype=bool)
    mask[test_idx] = False
    train_idx = np.flatnonzero(mask)
    return SplitResult(
        d.subset(train_idx), d.subset(test_idx), seed, test_fraction, train_idx, test_idx
    )
