"""Multi-class cost-sensitive boosting.

Library surface: cost-matrix algebra and decision rules (costs), the
cost-sensitive tree learner (tree), the stage-wise booster and step-size
solvers (boosting, solvers), detection scoring and cascade calibration
(cascade), metrics and cross-validation (evaluation), CSV ingestion
(dataset) and model persistence (model_io).  The hot split-search loop runs
on a compiled kernel when available and a numpy fallback otherwise; both
give bit-identical trees (see costboost._kernels.BACKEND).
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .boosting import Ensemble, TrainReport, margin_vector, predict, train
from .cascade import (
    CascadeThresholds,
    calibrate,
    detection_score,
    predict_pruned,
    score_trace,
    trace_matrix,
)
from .costs import (
    CostMatrix,
    CostMatrixError,
    ExtendedCostMatrix,
    LabelCodeSet,
    cmel,
    cost_margin,
    extend_cost_matrix,
    label_codes,
    load_cost_csv,
    make_01_cost,
    make_circular_view_cost,
    make_detection_cost,
    min_cost_decision,
    min_cost_label,
    posterior_from_scores,
    save_cost_csv,
)
from .dataset import CsvFormatError, Dataset, load_csv, save_csv
from .errors import DimensionMismatch, ValidationError
from .evaluation import (
    ConfusionMatrix,
    PerfectBaseline,
    average_cost,
    confusion,
    cross_validate,
    imbalance_cost_matrix,
    stratified_folds,
)
from .model_io import ModelFormatError, load_model, save_model
from .solvers import (
    NoErrors,
    SolverError,
    TooWeak,
    cs_adaboost_beta,
    piboost_beta,
    samme_beta,
    solve_beta,
)
from .tree import CostTree, WeakFitStats, evaluate_stats, fit_cost_tree, leaf_label

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CascadeThresholds",
    "ConfusionMatrix",
    "CostMatrix",
    "CostMatrixError",
    "CostTree",
    "CsvFormatError",
    "Dataset",
    "DimensionMismatch",
    "Ensemble",
    "ExtendedCostMatrix",
    "KERNEL_BACKEND",
    "LabelCodeSet",
    "ModelFormatError",
    "NoErrors",
    "PerfectBaseline",
    "SolverError",
    "TooWeak",
    "TrainReport",
    "ValidationError",
    "WeakFitStats",
    "average_cost",
    "calibrate",
    "cmel",
    "confusion",
    "cost_margin",
    "cross_validate",
    "cs_adaboost_beta",
    "detection_score",
    "evaluate_stats",
    "extend_cost_matrix",
    "fit_cost_tree",
    "imbalance_cost_matrix",
    "label_codes",
    "leaf_label",
    "load_cost_csv",
    "load_csv",
    "load_model",
    "make_01_cost",
    "make_circular_view_cost",
    "make_detection_cost",
    "margin_vector",
    "min_cost_decision",
    "min_cost_label",
    "piboost_beta",
    "posterior_from_scores",
    "predict",
    "predict_pruned",
    "samme_beta",
    "save_cost_csv",
    "save_csv",
    "save_model",
    "score_trace",
    "solve_beta",
    "stratified_folds",
    "trace_matrix",
    "train",
]
