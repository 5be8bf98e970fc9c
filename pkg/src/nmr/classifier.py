"""Nearest-subspace classification by nuclear-norm class reconstruction error."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linalg import apply_operator, nuclear_norm
from .solver import SolverConfig, SolverResult, precompute_ridge_map, solve_nmr


@dataclass
class ClassificationReport:
    """Decision for one test image.

    Attributes
    ----------
    predicted_label
        Class with the smallest reconstruction error (ties go to the label
        that sorts first).
    class_errors : dict
        Reconstruction error per class, keyed in canonical label order.
    solver : SolverResult or None
        Underlying regression result (None for the ridge baseline).
    margin : float
        Second smallest error minus the smallest; ``inf`` with one class.
    coefficients : ndarray
        Representation coefficients the decision was made from.
    residual_image : ndarray
        ``B - A(x)``; for occluded inputs this approximates the occlusion.
    """

    predicted_label: object
    class_errors: dict
    solver: SolverResult
    margin: float
    coefficients: np.ndarray
    residual_image: np.ndarray

    @property
    def converged(self):
        return True if self.solver is None else self.solver.converged


def _label_mask(label, labels):
    mask = np.array([lab == label for lab in labels], dtype=bool)
    if not mask.any():
        raise ValueError(f"label {label!r} does not occur in the dictionary labels")
    return mask


def class_select(x, label, labels):
    """Copy of ``x`` keeping only the coefficients whose label is ``label``."""
    x = np.asarray(x, dtype=np.float64)
    if len(labels) != x.shape[0]:
        raise ValueError(f"{len(labels)} labels for {x.shape[0]} coefficients")
    return np.where(_label_mask(label, labels), x, 0.0)


def _require_labels(dictionary):
    if dictionary.labels is None:
        raise ValueError("dictionary has no class labels")
    return dictionary.labels


def class_reconstruction_error(dictionary, x, label, norm=nuclear_norm):
    """Gap between the full and the class-``label`` reconstruction.

    ``norm(A(x) - A(class_select(x, label)))``; with the default nuclear
    norm this is the NMR class error.
    """
    labels = _require_labels(dictionary)
    rest = np.asarray(x, dtype=np.float64) - class_select(x, label, labels)
    return norm(apply_operator(dictionary, rest))


def decide(class_errors):
    """Canonical-order argmin of ``class_errors`` and the decision margin."""
    labels = sorted(class_errors)
    errors = np.array([class_errors[lab] for lab in labels])
    best = int(np.argmin(errors))  # first occurrence = smallest label on ties
    if len(labels) > 1:
        margin = float(np.partition(errors, 1)[1] - errors[best])
    else:
        margin = float("inf")
    return labels[best], margin


def score_classes(dictionary, x, norm=nuclear_norm):
    """Reconstruction error for every class, in canonical label order."""
    return {lab: class_reconstruction_error(dictionary, x, lab, norm)
            for lab in dictionary.classes}


def _normalize(B):
    nrm = np.linalg.norm(B)
    return B / nrm if nrm > 0 else B


def classify(dictionary, B, config=None, ridge_map=None, normalize=False):
    """Classify ``B`` by one NMR solve over the pooled dictionary.

    Parameters
    ----------
    dictionary : Dictionary
        Labelled training images; at least two distinct labels.
    B : array_like, shape (p, q)
    config : SolverConfig, optional
    ridge_map : RidgeMap, optional
        Shared precomputed ridge operator.
    normalize : bool
        Scale ``B`` to unit Frobenius norm before solving. The dictionary is
        used as given; pair this with ``Dictionary.normalized()``.
    """
    labels = _require_labels(dictionary)
    if len(set(labels)) < 2:
        raise ValueError("classification needs at least two distinct labels")
    config = SolverConfig() if config is None else config
    B = dictionary.check_image(B)
    if normalize:
        B = _normalize(B)
    result = solve_nmr(dictionary, B, config, ridge_map=ridge_map)
    errors = score_classes(dictionary, result.x)
    label, margin = decide(errors)
    return ClassificationReport(label, errors, result, margin, result.x,
                                result.residual_image)


def batch_classify(dictionary, test_set, config=None, normalize=False, n_jobs=1):
    """Classify every ``(image, true_label)`` pair in ``test_set``.

    Returns
    -------
    reports : list of ClassificationReport
        In input order.
    recognition_rate : float
        Fraction of items whose prediction equals the true label.
    """
    test_set = list(test_set)
    if not test_set:
        raise ValueError("test set is empty")
    config = SolverConfig() if config is None else config
    ridge_map = precompute_ridge_map(dictionary, config.lam, config.mu)

    def run(item):
        idx, (B, _) = item
        try:
            return classify(dictionary, B, config, ridge_map, normalize)
        except ValueError as exc:
            raise ValueError(f"test item {idx}: {exc}") from exc

    if n_jobs == 1:
        reports = [run(item) for item in enumerate(test_set)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            reports = list(pool.map(run, enumerate(test_set)))
    correct = sum(r.predicted_label == y for r, (_, y) in zip(reports, test_set))
    return reports, correct / len(test_set)
