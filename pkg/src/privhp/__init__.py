"""Bounded-memory differentially private hierarchical decompositions.

One pass over a stream of points in [0,1]^d produces a pruned dyadic
partition tree whose node counts are epsilon-differentially private; the
tree then acts as a synthetic data generator.  See core.PrivHpState for
the streaming side, sampler for generation, and evaluate for utility
measurement in 1-Wasserstein distance.
"""

from .backend import BACKEND
from .core import PrivHpConfig, PrivHpState, default_config, init
from .domain import HypercubeDomain, SubdomainIndex, key_code
from .evaluate import (ExactHistogram, UtilityReport, exact_prune_tree,
                       pruning_bound_1d, w1_exact_1d, w1_leaf_flow,
                       w1_points_tree_1d, w1_trees_1d)
from .grow import (apply_consistency, consistency_error, enforce_consistency,
                   grow_from_counts, grow_partition, tree_total_and_levels)
from .noise import BudgetPlan, LaplaceScale, allocate_budget, sample_laplace
from .sampler import TreeSampler, sample_many, sample_one, walk_leaf
from .sketch import PrivateSketch
from .tree import PartitionNode, PartitionTree, load_tree, save_tree

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BudgetPlan", "ExactHistogram", "HypercubeDomain",
    "LaplaceScale", "PartitionNode", "PartitionTree", "PrivHpConfig",
    "PrivHpState", "PrivateSketch", "SubdomainIndex", "TreeSampler",
    "UtilityReport", "allocate_budget", "apply_consistency",
    "consistency_error", "default_config", "enforce_consistency",
    "exact_prune_tree", "grow_from_counts", "grow_partition", "init",
    "key_code", "load_tree", "pruning_bound_1d", "sample_laplace",
    "sample_many", "sample_one", "save_tree", "tree_total_and_levels",
    "w1_exact_1d", "w1_leaf_flow", "w1_points_tree_1d", "w1_trees_1d",
    "walk_leaf",
]
