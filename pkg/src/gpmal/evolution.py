"""Generational evolutionary loop: ramped half-and-half initialization,
tournament selection, per-tree subtree crossover/mutation, elitism.

All stochastic choices flow through one generator in a fixed order, so a
(config, dataset, seed) triple fully determines the run. Fitness
evaluation is pure and may fan out over threads without affecting results.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import trees as T


@dataclass
class RunConfig:
    generations: int = 1000
    population_size: int = 1024
    crossover_rate: float = 0.8
    mutation_rate: float = 0.2
    elitism_count: int = 10
    tournament_size: int = 7
    min_depth: int = 2
    max_depth: int = 8
    t: int = 2
    k: int = 10
    theta: float = 20.0
    seed: int = 0
    p_feat: float = 0.9
    threads: int = 1

    # initial depths are ramped over [min_depth, min(max_depth, this)] to
    # leave headroom for growth under the max_depth cap
    INIT_DEPTH_CAP = 6

    def validate(self) -> None:
        if self.crossover_rate < 0 or self.mutation_rate < 0:
            raise ValueError("variation rates must be non-negative")
        if self.crossover_rate + self.mutation_rate > 1.0 + 1e-12:
            raise ValueError("crossover_rate + mutation_rate must be <= 1")
        if not (0 <= self.elitism_count < self.population_size):
            raise ValueError("elitism_count must be < population_size")
        if not (1 <= self.tournament_size <= self.population_size):
            raise ValueError("tournament_size must be <= population_size")
        if not (2 <= self.min_depth <= self.max_depth):
            raise ValueError("need 2 <= min_depth <= max_depth")
        if self.t < 1:
            raise ValueError("output dimensionality must be >= 1")
        if self.k < 1:
            raise ValueError("neighbour block size k must be >= 1")
        if self.generations < 0 or self.population_size < 1:
            raise ValueError("bad generations/population_size")

    def to_dict(self) -> dict:
        return {
            "generations": self.generations,
            "population_size": self.population_size,
            "crossover_rate": self.crossover_rate,
            "mutation_rate": self.mutation_rate,
            "elitism_count": self.elitism_count,
            "tournament_size": self.tournament_size,
            "min_depth": self.min_depth,
            "max_depth": self.max_depth,
            "t": self.t,
            "k": self.k,
            "theta": self.theta,
            "seed": self.seed,
            "p_feat": self.p_feat,
        }


@dataclass(frozen=True)
class Individual:
    trees: tuple
    fitness: float | None = None

    def with_fitness(self, value: float) -> "Individual":
        return replace(self, fitness=value)


@dataclass
class EvolutionState:
    population: list[Individual]
    generation: int
    best_ever: Individual
    history: list[tuple[int, float, float]] = field(default_factory=list)


INTERNAL_NODE_BIAS = 0.9
CROSSOVER_RETRIES = 10


def _pick_node(rng: np.random.Generator, tree) -> tuple[int, int, object]:
    """Choose a preorder node, preferring internal nodes. Returns
    (preorder index, depth, node)."""
    nodes, depths = T.collect_nodes(tree)
    internal = []
    leaves = []
    for i, nd in enumerate(nodes):
        (internal if isinstance(nd, T.Func) else leaves).append(i)
    if internal and (not leaves or rng.random() < INTERNAL_NODE_BIAS):
        pool = internal
    else:
        pool = leaves
    idx = pool[rng.integers(len(pool))]
    return idx, depths[idx], nodes[idx]


def initialize(cfg: RunConfig, n_features: int,
               rng: np.random.Generator) -> list[Individual]:
    """Half the population with full construction, half with grow, target
    depths drawn uniformly from the ramp range."""
    lo = cfg.min_depth
    hi = min(cfg.max_depth, cfg.INIT_DEPTH_CAP)
    pop = []
    for i in range(cfg.population_size):
        method = "full" if i < cfg.population_size // 2 else "grow"
        pop.append(Individual(tuple(
            T.random_tree(rng, n_features, method,
                          depth=int(rng.integers(lo, hi + 1)),
                          min_depth=cfg.min_depth, p_feat=cfg.p_feat)
            for _ in range(cfg.t)
        )))
    return pop


def tournament_select(pop: list[Individual], size: int,
                      rng: np.random.Generator) -> Individual:
    """Sample ``size`` with replacement; best fitness wins, ties go to the
    lower population index."""
    idxs = rng.integers(len(pop), size=size)
    best = None
    for i in sorted(int(v) for v in idxs):
        if best is None or pop[i].fitness > pop[best].fitness:
            best = i
    return pop[best]


def crossover(p1: Individual, p2: Individual, cfg: RunConfig,
              rng: np.random.Generator) -> tuple[Individual, Individual]:
    """Swap a random subtree between one random tree of each parent.

    If a swap would push either child tree past max_depth, retry with fresh
    choices; after the retry budget, return untouched copies of the parents.
    """
    for _ in range(CROSSOVER_RETRIES):
        i1 = int(rng.integers(len(p1.trees)))
        i2 = int(rng.integers(len(p2.trees)))
        t1, t2 = p1.trees[i1], p2.trees[i2]
        n1, _, s1 = _pick_node(rng, t1)
        n2, _, s2 = _pick_node(rng, t2)
        new1 = T.replace_subtree(t1, n1, s2)
        new2 = T.replace_subtree(t2, n2, s1)
        if T.tree_depth(new1) <= cfg.max_depth and T.tree_depth(new2) <= cfg.max_depth:
            c1 = list(p1.trees)
            c1[i1] = new1
            c2 = list(p2.trees)
            c2[i2] = new2
            return Individual(tuple(c1)), Individual(tuple(c2))
    # fallback: pass the parents through unchanged, fitness included
    return Individual(p1.trees, p1.fitness), Individual(p2.trees, p2.fitness)


def mutate(p: Individual, cfg: RunConfig, n_features: int,
           rng: np.random.Generator) -> Individual:
    """Replace a random subtree in a random tree with a freshly grown one
    that fits the remaining depth budget."""
    ti = int(rng.integers(len(p.trees)))
    tree = p.trees[ti]
    node_idx, node_depth, _ = _pick_node(rng, tree)
    budget = cfg.max_depth - node_depth + 1
    depth = int(rng.integers(1, budget + 1))
    sub = T.grow_subtree(rng, n_features, depth, cfg.p_feat)
    new_trees = list(p.trees)
    new_trees[ti] = T.replace_subtree(tree, node_idx, sub)
    return Individual(tuple(new_trees))


def _evaluate(pop: list[Individual], fitness_fn, threads: int) -> list[Individual]:
    pending = [ind for ind in pop if ind.fitness is None]
    if hasattr(fitness_fn, "score_many"):
        if threads > 1 and len(pending) > 1:
            # split the batch across workers; chunk order keeps determinism
            chunks = np.array_split(np.arange(len(pending)), threads)
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = pool.map(
                    lambda idxs: fitness_fn.score_many(
                        [pending[i].trees for i in idxs]
                    ),
                    chunks,
                )
            scores = [s for part in parts for s in part]
        else:
            scores = fitness_fn.score_many([ind.trees for ind in pending])
    elif threads > 1 and len(pending) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = list(pool.map(lambda ind: fitness_fn(ind.trees), pending))
    else:
        scores = [fitness_fn(ind.trees) for ind in pending]
    scored = iter(scores)
    return [
        ind if ind.fitness is not None else ind.with_fitness(next(scored))
        for ind in pop
    ]


def _best_index(pop: list[Individual]) -> int:
    best = 0
    for i in range(1, len(pop)):
        if pop[i].fitness > pop[best].fitness:
            best = i
    return best


def run_evolution(cfg: RunConfig, n_features: int, fitness_fn,
                  rng: np.random.Generator | None = None,
                  progress=None) -> EvolutionState:
    """Run the full loop and return the final state.

    ``fitness_fn`` maps a tuple of trees to a score in [0, 1];
    ``progress`` is called per generation with (gen, best, mean).
    """
    cfg.validate()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)

    pop = _evaluate(initialize(cfg, n_features, rng), fitness_fn, cfg.threads)
    state = EvolutionState(
        population=pop,
        generation=0,
        best_ever=pop[_best_index(pop)],
    )
    _record(state, progress)

    for gen in range(1, cfg.generations + 1):
        ranked = sorted(
            range(len(pop)), key=lambda i: (-pop[i].fitness, i)
        )
        next_pop: list[Individual] = [pop[i] for i in ranked[:cfg.elitism_count]]
        while len(next_pop) < cfg.population_size:
            r = rng.random()
            if r < cfg.crossover_rate:
                p1 = tournament_select(pop, cfg.tournament_size, rng)
                p2 = tournament_select(pop, cfg.tournament_size, rng)
                c1, c2 = crossover(p1, p2, cfg, rng)
                next_pop.append(c1)
                if len(next_pop) < cfg.population_size:
                    next_pop.append(c2)
            elif r < cfg.crossover_rate + cfg.mutation_rate:
                p = tournament_select(pop, cfg.tournament_size, rng)
                next_pop.append(mutate(p, cfg, n_features, rng))
            else:
                next_pop.append(tournament_select(pop, cfg.tournament_size, rng))

        pop = _evaluate(next_pop, fitness_fn, cfg.threads)
        state.population = pop
        state.generation = gen
        best = pop[_best_index(pop)]
        if best.fitness > state.best_ever.fitness:
            state.best_ever = best
        _record(state, progress)

    return state


def _record(state: EvolutionState, progress) -> None:
    fits = [ind.fitness for ind in state.population]
    best = max(fits)
    mean = sum(fits) / len(fits)
    state.history.append((state.generation, best, mean))
    if progress is not None:
        progress(state.generation, best, mean)
