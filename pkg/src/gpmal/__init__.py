"""GP-MaL: manifold learning by evolving multi-tree genetic programs.

Each individual is a small set of expression trees, one per output
dimension. Fitness rewards preserving the ordering of each instance's
nearest neighbours from the original feature space in the embedded space.
"""

from .data import Dataset, DataError, load_csv, save_csv, scale_min_max
from .neighbors import NeighborIndex, build_neighbor_index, select_positions
from .trees import (
    Constant,
    Feature,
    Func,
    eval_individual,
    eval_node,
    eval_tree,
    parse_tree,
    random_tree,
    to_prefix,
    tree_depth,
)
from .fitness import AgreementKernel, FitnessEvaluator, similarity
from .evolution import EvolutionState, Individual, RunConfig, run_evolution
from .evaluation import EvalReport, dimensionality_schedule, knn_cv_accuracy, pca_project
from .model import Model
from .plotting import ScatterSpec, render_scatter

__version__ = "0.1.0"

__all__ = [
    "AgreementKernel",
    "Constant",
    "DataError",
    "Dataset",
    "EvalReport",
    "EvolutionState",
    "Feature",
    "FitnessEvaluator",
    "Func",
    "Individual",
    "Model",
    "NeighborIndex",
    "RunConfig",
    "ScatterSpec",
    "build_neighbor_index",
    "dimensionality_schedule",
    "eval_individual",
    "eval_node",
    "eval_tree",
    "knn_cv_accuracy",
    "load_csv",
    "parse_tree",
    "pca_project",
    "random_tree",
    "render_scatter",
    "run_evolution",
    "save_csv",
    "scale_min_max",
    "select_positions",
    "similarity",
    "to_prefix",
    "tree_depth",
]
