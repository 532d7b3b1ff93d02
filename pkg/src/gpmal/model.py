"""Trained model persistence and reuse.

A model file is UTF-8 text: one ``#``-prefixed header line carrying the
manifest JSON (resolved config, seed, training-data scaling parameters and
input hash), then one prefix expression per output dimension. Because the
scaling parameters travel with the trees, the mapping can be re-applied to
unseen data without re-running the search.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .data import DataError, apply_scaling
from .trees import eval_individual, max_feature_index, parse_tree, to_prefix


@dataclass(frozen=True)
class Model:
    trees: tuple
    feature_mins: np.ndarray
    feature_maxs: np.ndarray
    manifest: dict

    @property
    def t(self) -> int:
        return len(self.trees)

    @property
    def n_features(self) -> int:
        return len(self.feature_mins)

    def required_features(self) -> int:
        return max(max_feature_index(tree) for tree in self.trees) + 1

    def transform(self, features: np.ndarray) -> np.ndarray:
        """Scale raw features with the stored training min/max and apply the
        trees. Out-of-range values scale linearly without clamping."""
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2:
            raise DataError("expected a 2-D feature matrix")
        need = self.required_features()
        if features.shape[1] < need:
            raise DataError(
                f"model references feature X{need - 1} but the data has only "
                f"{features.shape[1]} features"
            )
        if features.shape[1] != self.n_features:
            raise DataError(
                f"feature-count mismatch: model was trained on "
                f"{self.n_features} features, data has {features.shape[1]}"
            )
        scaled = apply_scaling(features, self.feature_mins, self.feature_maxs)
        return eval_individual(self.trees, scaled)

    def save(self, path) -> None:
        manifest = dict(self.manifest)
        manifest["feature_mins"] = [float(v) for v in self.feature_mins]
        manifest["feature_maxs"] = [float(v) for v in self.feature_maxs]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# " + json.dumps(manifest, sort_keys=True) + "\n")
            for tree in self.trees:
                fh.write(to_prefix(tree) + "\n")

    @classmethod
    def load(cls, path) -> "Model":
        header_json: str | None = None
        exprs: list[str] = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                if line.startswith("#"):
                    if header_json is None:
                        header_json = line.lstrip("#").strip()
                    continue
                exprs.append(line)
        if header_json is None:
            raise DataError(f"{path}: missing manifest header line")
        if not exprs:
            raise DataError(f"{path}: no expression lines")
        try:
            manifest = json.loads(header_json)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: bad manifest JSON: {exc}") from exc
        try:
            trees = tuple(parse_tree(e) for e in exprs)
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from exc
        mins = np.array(manifest.pop("feature_mins"), dtype=np.float64)
        maxs = np.array(manifest.pop("feature_maxs"), dtype=np.float64)
        return cls(trees=trees, feature_mins=mins, feature_maxs=maxs,
                   manifest=manifest)


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
