import csv
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parents[1]
PCOS_DEFAULT = ROOT / "data" / "PCOS_data.csv"


def pytest_addoption(parser):
    parser.addoption(
        "--pcos-csv",
        default=str(PCOS_DEFAULT),
        help="path to the public PCOS CSV used by the reference-number acceptance check",
    )


@pytest.fixture
def pcos_csv(request):
    return Path(request.config.getoption("--pcos-csv"))


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def synthetic_rows(n=300, n_features=8, seed=0, shift=1.5):
    """Two Gaussian classes, roughly 1:2, separated along the first 3 features."""
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < 0.35).astype(int)
    X = rng.normal(size=(n, n_features))
    X[:, :3] += shift * y[:, None]
    return X, y


@pytest.fixture
def toy_csv(tmp_path):
    X, y = synthetic_rows()
    header = [f"f{i}" for i in range(X.shape[1])] + ["target"]
    rows = [[*map(repr, r.tolist()), "Y" if t else "N"] for r, t in zip(X, y)]
    return write_csv(tmp_path / "toy.csv", header, rows)
