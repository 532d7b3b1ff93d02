"""Independent reference implementations used only to check the library.

These deliberately share no code with the package: plain Python loops,
full re-sorting, and scipy's normal CDF.
"""

import numpy as np
from scipy.stats import norm


def agreement_oracle(dev, theta=20.0):
    """1 - P(-dev < X < dev) for X ~ N(0, theta^2), via the normal CDF."""
    return 1.0 - (norm.cdf(dev / theta) - norm.cdf(-dev / theta))


def naive_fitness(embedding, selected, theta=20.0):
    """Brute-force neighbour-ordering fitness.

    ``selected`` is the (n, eta) matrix of selected neighbour ids in
    original-space rank order. Every instance's embedded-space distances are
    recomputed with sqrt and fully re-sorted with Python's sort.
    """
    embedding = np.asarray(embedding, dtype=float)
    n, eta = selected.shape
    # deviations are integers in [0, eta); tabulating the oracle values up
    # front only avoids repeated identical CDF calls
    weight = [agreement_oracle(dev, theta) for dev in range(eta)]
    total = 0.0
    for i in range(n):
        sel = [int(v) for v in selected[i]]
        dists = []
        for j in sel:
            diff = embedding[j] - embedding[i]
            dists.append(float(np.sqrt(np.dot(diff, diff))))
        order = sorted(range(eta), key=lambda m: (dists[m], sel[m]))
        low_rank = {sel[m]: r for r, m in enumerate(order)}
        for pos, nb in enumerate(sel):
            total += weight[abs(pos - low_rank[nb])]
    return total / (n * eta)


def naive_select_count(length, k):
    """Count selected neighbours by literally building the blocks."""
    count = 0
    start = 0
    j = 0
    while start < length:
        block_size = k * 2 ** j
        block = list(range(start, min(start + block_size, length)))
        count += len(block[:: 2 ** j])
        start += block_size
        j += 1
    return count
