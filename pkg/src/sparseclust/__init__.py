"""Choosing the number of clusters, and the sparsity of sparse K-means, by subsampling concordance."""

from .kmeans import KMeansFit, kmeans
from .metrics import ari, jaccard
from .prediction import prediction_strength, ps_select_k
from .selection import (LambdaGrid, SelectionConfig, SelectionReport, build_grids,
                        build_lambda_grid, estimate, gap_joint_select, pick_sum, s4_joint_select,
                        s4_naive_sum_select)
from .simgen import generate
from .sparse import SparseFit, sparse_kmeans
from .stability import S4Result, s4_estimate_k

__version__ = "0.1.0"

__all__ = [
    "KMeansFit", "kmeans", "ari", "jaccard", "prediction_strength", "ps_select_k",
    "LambdaGrid", "SelectionConfig", "SelectionReport", "build_grids", "build_lambda_grid",
    "estimate", "gap_joint_select", "pick_sum", "s4_joint_select", "s4_naive_sum_select", "generate",
    "SparseFit", "sparse_kmeans", "S4Result", "s4_estimate_k",
]
