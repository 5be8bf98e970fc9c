"""Ridge regression classifier used as the comparison arm."""

import numpy as np

from ..classifier import ClassificationReport, decide, score_classes
from ..linalg import vectorize
from ..solver import precompute_ridge_map


def _euclidean(M):
    return float(np.linalg.norm(M))


def ridge_baseline_classify(dictionary, B, lam=1.0, ridge_map=None):
    """Classify ``B`` from ridge coefficients scored with the Euclidean norm.

    Solves ``min ||H x - vec(B)||^2 + lam ||x||^2`` and assigns the class
    minimizing ``||A(x) - A(class_select(x, i))||_F``.
    """
    if dictionary.labels is None or len(set(dictionary.labels)) < 2:
        raise ValueError("classification needs at least two distinct labels")
    B = dictionary.check_image(B)
    if ridge_map is None:
        ridge_map = precompute_ridge_map(dictionary, lam, 1.0)
    elif not np.isclose(ridge_map.lambda_over_mu, lam, rtol=1e-12, atol=0):
        raise ValueError("ridge_map was built for a different lambda")
    x = ridge_map(vectorize(B))
    errors = score_classes(dictionary, x, norm=_euclidean)
    label, margin = decide(errors)
    residual = B - (dictionary.H @ x).reshape(dictionary.image_shape, order="F")
    return ClassificationReport(label, errors, None, margin, x, residual)
