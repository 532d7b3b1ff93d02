import csv
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from gpmal.data import Dataset, load_csv, scale_min_max


@pytest.fixture(scope="session")
def wine_csv(tmp_path_factory):
    """The classic 178x13, 3-class wine dataset as a CSV file."""
    from sklearn.datasets import load_wine

    wine = load_wine()
    path = tmp_path_factory.mktemp("data") / "wine.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(wine.feature_names) + ["class"])
        for row, label in zip(wine.data, wine.target):
            writer.writerow([repr(float(v)) for v in row] + [f"c{int(label)}"])
    return path


@pytest.fixture(scope="session")
def wine_raw(wine_csv):
    return load_csv(wine_csv, "last")


@pytest.fixture(scope="session")
def wine_scaled(wine_raw):
    return scale_min_max(wine_raw)


def make_dataset(features, labels=None, scaled=False):
    """Small helper to build datasets directly from arrays."""
    features = np.asarray(features, dtype=float)
    names = tuple(f"f{i}" for i in range(features.shape[1]))
    label_ids = None
    label_names = ()
    if labels is not None:
        uniq = []
        for lab in labels:
            if lab not in uniq:
                uniq.append(lab)
        label_ids = np.array([uniq.index(lab) for lab in labels], dtype=np.intp)
        label_names = tuple(str(u) for u in uniq)
    ds = Dataset(features, names, label_ids, label_names)
    return scale_min_max(ds) if scaled else ds
