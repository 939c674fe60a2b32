"""Power-trace time series classification toolkit.

Elastic distance kernels (DTW, LTW, LB_Keogh, MSM, CID) with numba-compiled
hot paths, nearest-neighbour and from-scratch LSTM classifiers, their
probability fusion, a synthetic 13-class corpus generator, and a five-fold
evaluation/benchmark harness with a CLI.
"""

from ._backend import active_backend
from .series import (
    Dataset,
    FoldPlan,
    Series,
    cut_windows,
    load_csv,
    partition_folds,
    save_csv,
    split,
)
from .distances import (
    DistanceSpec,
    WarpIndexSet,
    cid_enhance,
    complexity_estimate,
    dtw,
    euclidean,
    evaluate,
    evaluate_many,
    lb_keogh,
    ltw,
    ltw_com,
    ltw_k,
    msm,
)
from .knn import classify_1nn, nearest_neighbors, prob_vector_knn

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "DistanceSpec",
    "FoldPlan",
    "Series",
    "WarpIndexSet",
    "active_backend",
    "cid_enhance",
    "classify_1nn",
    "complexity_estimate",
    "cut_windows",
    "dtw",
    "euclidean",
    "evaluate",
    "evaluate_many",
    "lb_keogh",
    "load_csv",
    "ltw",
    "ltw_com",
    "ltw_k",
    "msm",
    "nearest_neighbors",
    "partition_folds",
    "prob_vector_knn",
    "save_csv",
    "split",
]
