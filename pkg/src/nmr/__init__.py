"""Nuclear-norm matrix regression (NMR) solved by ADMM, with an occlusion
robust nearest-class classifier and an experiment harness."""

from .classifier import (ClassificationReport, batch_classify, class_reconstruction_error,
                         class_select, classify)
from .dictionary import Dictionary
from .estimators import NMRClassifier, NuclearNormCoder
from .linalg import ThinSvd, apply_operator, nuclear_norm, svt, thin_svd, unvectorize, vectorize
from .solver import (IllPosedError, RidgeMap, SolverConfig, SolverResult, check_termination,
                     objective, precompute_ridge_map, scaled_penalty, solve_nmr, update_x,
                     update_y, update_z)

__version__ = "0.1.0"

__all__ = [
    "ClassificationReport", "Dictionary", "IllPosedError", "NMRClassifier",
    "NuclearNormCoder", "RidgeMap", "SolverConfig", "SolverResult", "ThinSvd",
    "apply_operator", "batch_classify", "check_termination", "class_reconstruction_error",
    "class_select", "classify", "nuclear_norm", "objective", "precompute_ridge_map",
    "scaled_penalty", "solve_nmr", "svt", "thin_svd", "unvectorize", "update_x",
    "update_y", "update_z", "vectorize",
]
