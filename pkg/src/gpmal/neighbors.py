"""Neighbour orderings in the original space and block-wise subsampling.

Every instance gets all other instances sorted by ascending Euclidean
distance (ties by ascending id). Fitness only looks at a logarithmic-sized
subset of that ordering: all of the nearest k, then k evenly spaced picks
out of the next 2k, then k out of the next 4k, and so on. Because every
ordering has the same length, the picked positions are shared by all
instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, format_value


@dataclass(frozen=True)
class NeighborIndex:
    orderings: np.ndarray        # (n, n-1) int, neighbour ids by ascending distance
    distances: np.ndarray        # (n, n-1) float, distances along each ordering
    positions: np.ndarray        # (eta,) int, picked ranks within each ordering
    selected: np.ndarray         # (n, eta) int, orderings[:, positions]
    k: int

    @property
    def n(self) -> int:
        return self.orderings.shape[0]

    @property
    def eta(self) -> int:
        return self.selected.shape[1]

    def rank_of_selected(self, i: int) -> dict[int, int]:
        """Map each selected neighbour id of instance i to its 0-based rank
        within the selected list."""
        return {int(nb): r for r, nb in enumerate(self.selected[i])}


def build_orderings(ds: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Sort all other instances by ascending Euclidean distance, per instance.

    Returns (orderings, distances), each (n, n-1). Ties break by ascending
    instance id, so the result is deterministic.
    """
    x = ds.features
    n = x.shape[0]
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    dist = np.sqrt(d2)

    ids = np.broadcast_to(np.arange(n), (n, n))
    order = np.lexsort((ids, dist), axis=1)
    # drop the self column (distance 0, and the smallest id at distance 0
    # could be another instance; remove by identity, not by position)
    keep = order != np.arange(n)[:, None]
    orderings = order[keep].reshape(n, n - 1)
    distances = np.take_along_axis(dist, orderings, axis=1)
    return orderings, distances


def select_positions(length: int, k: int) -> np.ndarray:
    """Ranks to keep out of an ordering of the given length.

    The ordering is split into consecutive blocks of sizes k, 2k, 4k, ...;
    block j is sampled with stride 2**j starting at its first entry. A
    trailing partial block keeps the same stride.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    picks: list[int] = []
    start = 0
    j = 0
    while start < length:
        block = k * (1 << j)
        stride = 1 << j
        end = min(start + block, length)
        picks.extend(range(start, end, stride))
        start += block
        j += 1
    return np.array(picks, dtype=np.intp)


def build_neighbor_index(ds: Dataset, k: int = 10) -> NeighborIndex:
    orderings, distances = build_orderings(ds)
    positions = select_positions(ds.n - 1, k)
    return NeighborIndex(
        orderings=orderings,
        distances=distances,
        positions=positions,
        selected=orderings[:, positions],
        k=k,
    )


def reorder_selected_lowdim(distances, ids) -> list[int]:
    """Sort selected neighbour ids by ascending embedded-space distance,
    ties by ascending id. The output index of each id is its low-dimensional
    rank."""
    dist = [float(v) for v in distances]
    if any(not np.isfinite(v) for v in dist):
        raise ValueError("non-finite distance in embedded space")
    return sorted(range(len(ids)), key=lambda m: (dist[m], ids[m]))


def dump_orderings_csv(nidx: NeighborIndex, path) -> None:
    """Debug dump: one row per (instance, rank) with the neighbour id and
    distance, plus whether that rank was selected."""
    chosen = set(nidx.positions.tolist())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("instance,rank,neighbor,distance,selected\n")
        for i in range(nidx.n):
            for r in range(nidx.orderings.shape[1]):
                fh.write(
                    f"{i},{r},{nidx.orderings[i, r]},"
                    f"{format_value(nidx.distances[i, r])},"
                    f"{int(r in chosen)}\n"
                )
