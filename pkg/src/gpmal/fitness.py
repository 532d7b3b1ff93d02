"""Neighbour-ordering fitness.

For each instance the embedded-space distances to its selected neighbours
are ranked; the fitness sums a Gaussian-tail agreement weight over the
rank deviations between original-space and embedded-space orderings, then
normalises by the attainable maximum (n * eta) so a perfect preservation
scores exactly 1.
"""

from __future__ import annotations

import math

import numpy as np

from .neighbors import NeighborIndex
from .trees import eval_individual


class AgreementKernel:
    """Weight per integer rank deviation: 1 - P(-dev < X < dev) for
    X ~ Normal(0, theta^2), i.e. erfc(dev / (theta * sqrt(2))).

    Zero deviation weighs exactly 1; the weight decays smoothly toward 0 so
    small misorderings are barely punished while large ones are worthless.
    Values for all reachable deviations are tabulated once since this sits
    in the hot loop.
    """

    def __init__(self, theta: float = 20.0, max_dev: int = 0):
        if theta <= 0:
            raise ValueError("theta must be positive")
        self.theta = theta
        self.table = np.array(
            [self.compute(dev) for dev in range(max_dev + 1)]
        )

    def compute(self, dev: float) -> float:
        return math.erfc(dev / (self.theta * math.sqrt(2.0)))

    def __call__(self, dev: int) -> float:
        if dev < len(self.table):
            return float(self.table[dev])
        return self.compute(dev)


def similarity(high_order, low_rank: dict, kernel: AgreementKernel) -> float:
    """Sum of agreement weights over one instance's selected neighbours.

    ``high_order`` lists neighbour ids by original-space rank;
    ``low_rank`` maps each of those ids to its embedded-space rank. Both
    rankings must cover the same id set.
    """
    if set(high_order) != set(low_rank):
        raise ValueError("high- and low-dimensional rankings cover different ids")
    return sum(
        kernel(abs(pos - low_rank[nb])) for pos, nb in enumerate(high_order)
    )


class FitnessEvaluator:
    """Precomputed state for scoring individuals against one dataset.

    Pure with respect to the individual: safe to call concurrently.
    """

    def __init__(self, features: np.ndarray, nidx: NeighborIndex,
                 theta: float = 20.0):
        self.features = features
        self.nidx = nidx
        self.kernel = AgreementKernel(theta, max_dev=nidx.eta)
        n, eta = nidx.selected.shape
        self._denom = float(n * eta)
        self._ranks = np.arange(eta)
        # permutation putting each row's selected ids in ascending-id order;
        # a stable sort of the re-permuted distances then breaks distance
        # ties by id, as required
        self._id_order = np.argsort(nidx.selected, axis=1, kind="stable")
        self._sel_by_id = np.take_along_axis(nidx.selected, self._id_order, axis=1)
        self._rows = np.arange(n)[:, None]

    def score_embedding(self, embedding: np.ndarray) -> float:
        return float(self.score_embeddings(embedding[None, :, :])[0])

    def score_embeddings(self, embeddings: np.ndarray) -> np.ndarray:
        """Score a (p, n, t) stack of embeddings at once; one value per
        embedding. Batch form of the per-instance rank-deviation sum."""
        p, n, _ = embeddings.shape
        eta = self.nidx.selected.shape[1]
        finite = np.isfinite(embeddings).all(axis=(1, 2))
        if not finite.all():
            # affected embeddings score 0 regardless; zeroing the bad values
            # just keeps the vectorized arithmetic finite
            embeddings = np.nan_to_num(embeddings, posinf=0.0, neginf=0.0)
        # squared distances, order-equal to Euclidean, laid out directly in
        # ascending-id order so a stable sort breaks ties by id
        dist = np.zeros((p, n, eta))
        for j in range(embeddings.shape[2]):
            col = embeddings[:, :, j]
            dcol = col[:, self._sel_by_id] - col[:, :, None]
            dist += dcol * dcol
        by_dist = np.argsort(
            dist.reshape(p * n, eta), axis=1, kind="stable"
        ).reshape(p, n, eta)
        # original selected-list position of each low-dimensional rank
        orig = self._id_order[self._rows, by_dist]
        low_rank = np.empty_like(orig)
        low_rank[
            np.arange(p)[:, None, None], self._rows[None, :, :], orig
        ] = self._ranks[None, None, :]
        dev = np.abs(low_rank - self._ranks[None, None, :])
        totals = self.kernel.table[dev].sum(axis=(1, 2)) / self._denom
        return np.where(finite, totals, 0.0)

    # memory cap for batched scoring: p * n * eta distance entries per chunk
    CHUNK_ENTRIES = 4_000_000

    def score_many(self, trees_list) -> list[float]:
        """Evaluate and score a batch of individuals.

        Subtree results are shared across the batch: crossover and mutation
        reuse whole subtrees by reference, so most of a child is already
        evaluated once any relative has been.
        """
        n, eta = self.nidx.selected.shape
        chunk = max(1, self.CHUNK_ENTRIES // max(1, n * eta))
        cache: dict = {}
        out: list[float] = []
        for start in range(0, len(trees_list), chunk):
            batch = trees_list[start:start + chunk]
            embs = np.stack([
                eval_individual(trees, self.features, cache)
                for trees in batch
            ])
            out.extend(float(v) for v in self.score_embeddings(embs))
        return out

    def __call__(self, trees) -> float:
        return self.score_embedding(eval_individual(trees, self.features))
