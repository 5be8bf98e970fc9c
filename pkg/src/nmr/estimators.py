"""scikit-learn compatible wrappers around the NMR solver and classifier."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_array, check_is_fitted

from .classifier import classify
from .dictionary import Dictionary
from .solver import SolverConfig, precompute_ridge_map, scaled_penalty, solve_nmr


def check_images(X, image_shape=None):
    """Validate a stack of images and return it as ``(n_samples, p, q)``.

    ``X`` may already be 3-D, or 2-D with one flattened (row-major) image per
    row, in which case ``image_shape`` is required.
    """
    X = check_array(X, allow_nd=True, dtype=np.float64)
    if X.ndim == 3:
        if image_shape is not None and X.shape[1:] != tuple(image_shape):
            raise ValueError(f"images have shape {X.shape[1:]}, expected {tuple(image_shape)}")
        return X
    if X.ndim == 2:
        if image_shape is None:
            raise ValueError("2-D input needs image_shape to unflatten each row")
        p, q = image_shape
        if X.shape[1] != p * q:
            raise ValueError(f"rows have {X.shape[1]} features, image_shape gives {p * q}")
        return X.reshape(X.shape[0], p, q)
    raise ValueError(f"expected 2-D or 3-D input, got {X.ndim}-D")


class _SolverParams:
    def _solver_config(self, dictionary):
        mu = scaled_penalty(dictionary) if self.mu == "auto" else self.mu
        return SolverConfig(lam=self.lam, mu=mu, eps_abs=self.eps_abs,
                            eps_rel=self.eps_rel, max_iters=self.max_iters,
                            y_init=self.y_init)


class NMRClassifier(_SolverParams, ClassifierMixin, BaseEstimator):
    """Nuclear-norm matrix regression classifier.

    Every test image is represented by all training images at once; the
    predicted class is the one whose coefficients leave the smallest
    nuclear-norm gap to the full reconstruction.

    Parameters
    ----------
    lam : float, default=1.0
        Ridge weight on the representation coefficients.
    mu : float or "auto", default=1.0
        ADMM penalty. ``"auto"`` uses :func:`~nmr.solver.scaled_penalty` of
        the training images.
    eps_abs, eps_rel : float
        Stopping tolerances.
    max_iters : int, default=500
    y_init : {"negative_b", "zero"}, default="negative_b"
    image_shape : tuple of int, optional
        Needed when ``X`` holds flattened images.
    normalize : bool, default=False
        Scale each image (training and test) to unit Frobenius norm.

    Attributes
    ----------
    classes_ : ndarray
    dictionary_ : Dictionary
    config_ : SolverConfig
    """

    def __init__(self, lam=1.0, mu=1.0, eps_abs=1e-6, eps_rel=1e-4, max_iters=500,
                 y_init="negative_b", image_shape=None, normalize=False):
        self.lam = lam
        self.mu = mu
        self.eps_abs = eps_abs
        self.eps_rel = eps_rel
        self.max_iters = max_iters
        self.y_init = y_init
        self.image_shape = image_shape
        self.normalize = normalize

    def _prepare(self, X):
        X = check_images(X, self.image_shape)
        if self.normalize:
            norms = np.linalg.norm(X, axis=(1, 2), keepdims=True)
            X = np.divide(X, norms, out=X.copy(), where=norms > 0)
        return X

    def fit(self, X, y):
        X = self._prepare(X)
        check_classification_targets(y)
        y = np.asarray(y)
        if y.shape[0] != X.shape[0]:
            raise ValueError(f"X has {X.shape[0]} images but y has {y.shape[0]} labels")
        self.classes_ = np.unique(y)
        if self.classes_.size < 2:
            raise ValueError("need at least two classes")
        self.dictionary_ = Dictionary(X, y.tolist())
        self.config_ = self._solver_config(self.dictionary_)
        self.ridge_map_ = precompute_ridge_map(self.dictionary_, self.config_.lam,
                                               self.config_.mu)
        self.n_features_in_ = X.shape[1] * X.shape[2]
        return self

    def reports(self, X):
        """Full :class:`~nmr.classifier.ClassificationReport` per image."""
        check_is_fitted(self, "dictionary_")
        X = self._prepare(X)
        return [classify(self.dictionary_, B, self.config_, self.ridge_map_) for B in X]

    def decision_function(self, X):
        """Negated class reconstruction errors, columns ordered as ``classes_``."""
        reps = self.reports(X)
        return -np.array([[r.class_errors[c] for c in self.classes_.tolist()] for r in reps])

    def predict(self, X):
        return np.array([r.predicted_label for r in self.reports(X)])


class NuclearNormCoder(_SolverParams, TransformerMixin, BaseEstimator):
    """Encode images as NMR coefficients over a fixed set of regressor images.

    Parameters
    ----------
    dictionary : array_like, shape (n_atoms, p, q)
        Regressor images.
    lam, mu, eps_abs, eps_rel, max_iters, y_init
        As in :class:`NMRClassifier`.

    Attributes
    ----------
    residuals_ : ndarray, shape (n_samples, p, q)
        ``B - A(x)`` for the images passed to the last ``transform`` call.
    converged_ : ndarray of bool
    """

    def __init__(self, dictionary, lam=1.0, mu=1.0, eps_abs=1e-6, eps_rel=1e-4,
                 max_iters=500, y_init="negative_b"):
        self.dictionary = dictionary
        self.lam = lam
        self.mu = mu
        self.eps_abs = eps_abs
        self.eps_rel = eps_rel
        self.max_iters = max_iters
        self.y_init = y_init

    def fit(self, X=None, y=None):
        self.dictionary_ = Dictionary(check_images(self.dictionary))
        self.config_ = self._solver_config(self.dictionary_)
        self.ridge_map_ = precompute_ridge_map(self.dictionary_, self.config_.lam,
                                               self.config_.mu)
        p, q = self.dictionary_.image_shape
        self.n_features_in_ = p * q
        return self

    def transform(self, X):
        check_is_fitted(self, "dictionary_")
        X = check_images(X, self.dictionary_.image_shape)
        results = [solve_nmr(self.dictionary_, B, self.config_, self.ridge_map_) for B in X]
        self.residuals_ = np.stack([r.residual_image for r in results])
        self.converged_ = np.array([r.converged for r in results])
        return np.stack([r.x for r in results])
