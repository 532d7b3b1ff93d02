"""Embedding quality evaluation: stratified k-fold cross-validated k-NN
accuracy, a from-scratch PCA baseline, and the output-dimensionality
schedule used for comparison runs.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .data import Dataset, DataError, format_value


@dataclass(frozen=True)
class EvalReport:
    dataset: str
    method: str
    t: int
    fold_accuracies: tuple[float, ...]
    seed: int

    @property
    def mean_accuracy(self) -> float:
        return sum(self.fold_accuracies) / len(self.fold_accuracies)

    def to_json(self) -> str:
        return json.dumps(
            {
                "dataset": self.dataset,
                "method": self.method,
                "t": self.t,
                "seed": self.seed,
                "folds": list(self.fold_accuracies),
                "mean_accuracy": self.mean_accuracy,
            },
            sort_keys=True,
        )

    def csv_row(self) -> str:
        cells = [self.dataset, self.method, str(self.t), str(self.seed),
                 format_value(self.mean_accuracy)]
        cells += [format_value(a) for a in self.fold_accuracies]
        return ",".join(cells)


def stratified_folds(labels: np.ndarray, n_folds: int,
                     seed: int) -> list[np.ndarray]:
    """Disjoint, label-balanced folds: shuffle each class with the seeded
    generator, then deal round-robin. Folds shrink to the smallest class
    size (with a warning) if a class is rarer than the fold count."""
    classes = sorted(set(int(v) for v in labels))
    if len(classes) < 2:
        raise DataError("cross-validation needs at least 2 classes")
    min_count = min(int((labels == c).sum()) for c in classes)
    if min_count < n_folds:
        warnings.warn(
            f"smallest class has {min_count} members; "
            f"reducing folds from {n_folds} to {min_count}"
        )
        n_folds = min_count
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    offset = 0
    for c in classes:
        idxs = np.flatnonzero(labels == c)
        rng.shuffle(idxs)
        for j, idx in enumerate(idxs):
            folds[(offset + j) % n_folds].append(int(idx))
        offset += len(idxs)
    return [np.array(sorted(f), dtype=np.intp) for f in folds]


def knn_predict(train_x: np.ndarray, train_y: np.ndarray,
                test_x: np.ndarray, k_nn: int) -> np.ndarray:
    """Majority vote over the k Euclidean-nearest training points.

    Distance ties break by training-point id, vote ties by smallest
    class id.
    """
    d2 = (
        np.einsum("ij,ij->i", test_x, test_x)[:, None]
        + np.einsum("ij,ij->i", train_x, train_x)[None, :]
        - 2.0 * (test_x @ train_x.T)
    )
    ids = np.broadcast_to(np.arange(train_x.shape[0]), d2.shape)
    order = np.lexsort((ids, d2), axis=1)[:, :k_nn]
    votes = train_y[order]
    n_classes = int(train_y.max()) + 1
    counts = np.zeros((test_x.shape[0], n_classes), dtype=np.intp)
    for col in range(votes.shape[1]):
        np.add.at(counts, (np.arange(test_x.shape[0]), votes[:, col]), 1)
    return counts.argmax(axis=1)  # argmax takes the smallest class id on ties


def knn_cv_accuracy(embedding: np.ndarray, labels: np.ndarray,
                    dataset: str = "", method: str = "",
                    folds: int = 10, k_nn: int = 5,
                    seed: int = 0) -> EvalReport:
    """Stratified k-fold cross-validated k-NN accuracy of an embedding."""
    if labels is None:
        raise DataError("evaluation requires class labels")
    embedding = np.asarray(embedding, dtype=np.float64)
    assignments = stratified_folds(labels, folds, seed)
    accs = []
    for fold in assignments:
        mask = np.ones(len(labels), dtype=bool)
        mask[fold] = False
        pred = knn_predict(embedding[mask], labels[mask], embedding[fold], k_nn)
        accs.append(float((pred == labels[fold]).mean()))
    return EvalReport(
        dataset=dataset,
        method=method,
        t=embedding.shape[1],
        fold_accuracies=tuple(accs),
        seed=seed,
    )


# --- PCA -------------------------------------------------------------------

_POWER_ITERS = 10000
_POWER_TOL = 1e-14


def pca_components(x: np.ndarray, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-t principal directions of the column-centered data by power
    iteration with re-orthogonalization.

    Returns (components, eigenvalues) with components as columns, sorted by
    descending eigenvalue. Sign convention: the largest-magnitude loading of
    each component is positive.
    """
    n, d = x.shape
    if t > d:
        raise ValueError(f"cannot extract {t} components from {d} features")
    centered = x - x.mean(axis=0)
    cov = (centered.T @ centered) / max(n - 1, 1)

    comps = np.zeros((d, t))
    eigvals = np.zeros(t)
    # residuals below round-off relative to the covariance scale are treated
    # as a null direction rather than amplified into noise
    null_floor = max(1e-300, 1e-12 * float(np.abs(cov).max()))
    for c in range(t):
        v = np.full(d, 1.0 / math.sqrt(d)) + 1e-3 * np.arange(d) / d
        v /= np.linalg.norm(v)
        prev = comps[:, :c]
        lam = 0.0
        for _ in range(_POWER_ITERS):
            w = cov @ v
            if c:
                w -= prev @ (prev.T @ w)
            norm = np.linalg.norm(w)
            if norm < null_floor:
                # null direction: any unit vector orthogonal to the found ones
                w = _orthogonal_completion(prev, d)
                v = w
                lam = 0.0
                break
            v_new = w / norm
            lam_new = float(v_new @ cov @ v_new)
            if (abs(lam_new - lam) <= _POWER_TOL * max(1.0, abs(lam_new))
                    and np.linalg.norm(v_new - v) <= 1e-12):
                v = v_new
                lam = lam_new
                break
            v, lam = v_new, lam_new
        if c:
            v = v - prev @ (prev.T @ v)
            vnorm = np.linalg.norm(v)
            if vnorm < 1e-8:
                v = _orthogonal_completion(prev, d)
                lam = 0.0
            else:
                v /= vnorm
        pivot = int(np.argmax(np.abs(v)))
        if v[pivot] < 0:
            v = -v
        comps[:, c] = v
        eigvals[c] = max(lam, 0.0)
    return comps, eigvals


def _orthogonal_completion(prev: np.ndarray, d: int) -> np.ndarray:
    for basis in range(d):
        e = np.zeros(d)
        e[basis] = 1.0
        if prev.shape[1]:
            e -= prev @ (prev.T @ e)
        norm = np.linalg.norm(e)
        if norm > 1e-8:
            return e / norm
    raise RuntimeError("no orthogonal direction left")


def pca_project(ds: Dataset, t: int) -> np.ndarray:
    """Mean-center and project onto the top-t principal components."""
    comps, _ = pca_components(ds.features, t)
    centered = ds.features - ds.features.mean(axis=0)
    return centered @ comps


def dimensionality_schedule(d: int) -> list[int]:
    """Output sizes for comparison runs: 2, 3, 5 and the rounded cube root
    of the feature count (round-half-up), deduplicated, each clamped to d."""
    cr = int(math.floor(d ** (1.0 / 3.0) + 0.5))
    return sorted({min(v, d) for v in (2, 3, 5, cr) if v >= 1})
