"""Seeded synthetic data with low-rank class structure.

Each class owns ``rank_r`` rank-one factors ``u_k v_k^T`` whose profiles are
piecewise linear curves through random integer knots. A class sample is a
random convex combination of its factors scaled to ``[0, 255]`` plus a small
integer perturbation, so the images of one class are nearly linearly
dependent while different classes span different subspaces. Only integer
draws and elementary arithmetic enter the sampling path, so outputs are
identical across platforms for a given seed.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from ..dictionary import Dictionary
from ..linalg import apply_operator
from .occlusion import OcclusionSpec, make_rng, occlude

N_KNOTS = 5


@dataclass
class SyntheticProblem:
    """Regression instance with known coefficients and occlusion mask."""

    dictionary: Dictionary
    true_x: np.ndarray
    B_clean: np.ndarray
    B_corrupted: np.ndarray
    occlusion_mask: np.ndarray
    true_label: int
    seed: object


def _profile(rng, length):
    knots = rng.integers(0, 256, size=N_KNOTS) / 255.0
    return np.interp(np.arange(length), np.linspace(0, length - 1, N_KNOTS), knots)


def _class_factors(rng, p, q, rank_r):
    U = np.stack([_profile(rng, p) for _ in range(rank_r)], axis=1)
    V = np.stack([_profile(rng, q) for _ in range(rank_r)], axis=1)
    return U, V


def _sample(rng, U, V, perturbation):
    c = rng.integers(1, 17, size=U.shape[1]).astype(np.float64)
    w = 255.0 * c / c.sum()
    img = np.zeros((U.shape[0], V.shape[0]))
    for k in range(U.shape[1]):
        img += w[k] * np.outer(U[:, k], V[:, k])
    amp = int(round(perturbation * 255))
    if amp > 0:
        img = np.clip(img + rng.integers(-amp, amp + 1, size=img.shape), 0.0, 255.0)
    return img


def _check_params(p, q, n_classes, rank_r):
    if p < 8 or q < 8:
        raise ValueError(f"synthetic images need p, q >= 8, got {p}x{q}")
    if n_classes < 1:
        raise ValueError("n_classes must be >= 1")
    if not 1 <= rank_r <= min(p, q):
        raise ValueError(f"rank_r must be in [1, {min(p, q)}], got {rank_r}")


def class_sizes(n, n_classes):
    """Split ``n`` atoms over classes as evenly as possible, earlier classes first."""
    base, extra = divmod(n, n_classes)
    return [base + (c < extra) for c in range(n_classes)]


def synth_lowrank_problem(p, q, n, n_classes, rank_r, occlusion=None, seed=0,
                          perturbation=0.02):
    """Generate one regression problem ``B = A(true_x) + occlusion``.

    The dictionary holds ``n`` atoms split evenly over ``n_classes`` classes;
    ``true_x`` is a convex combination supported on a single class. The
    occlusion block is placed with a seed derived from ``seed`` (the seed
    stored on ``occlusion`` is ignored).
    """
    _check_params(p, q, n_classes, rank_r)
    if n < n_classes:
        raise ValueError(f"need n >= n_classes, got n={n}, n_classes={n_classes}")
    if not 0 <= perturbation <= 1:
        raise ValueError("perturbation must lie in [0, 1]")
    rng = make_rng(seed)
    sizes = class_sizes(n, n_classes)
    images, labels = [], []
    for c in range(n_classes):
        U, V = _class_factors(rng, p, q, rank_r)
        for _ in range(sizes[c]):
            images.append(_sample(rng, U, V, perturbation))
            labels.append(c)
    dictionary = Dictionary(np.stack(images), labels)

    true_label = int(rng.integers(0, n_classes))
    support = np.flatnonzero(np.asarray(labels) == true_label)
    true_x = np.zeros(n)
    c = rng.integers(1, 17, size=support.size).astype(np.float64)
    true_x[support] = c / c.sum()
    B_clean = apply_operator(dictionary, true_x)

    if occlusion is None:
        occlusion = OcclusionSpec(0.0)
    occlusion = dataclasses.replace(occlusion, seed=int(rng.integers(0, 2**63)))
    B_corrupted, mask = occlude(B_clean, occlusion)
    return SyntheticProblem(dictionary, true_x, B_clean, B_corrupted, mask,
                            true_label, seed)


@dataclass
class SyntheticFamily:
    """Train dictionary plus clean labelled test images for one seed."""

    dictionary: Dictionary
    test_images: list
    test_labels: list
    seed: object


def synth_classification_family(p=32, q=32, n_classes=5, n_train=10, n_test=10,
                                rank_r=3, seed=0, perturbation=0.02):
    """Draw ``n_train`` training and ``n_test`` test images per class.

    Test images are fresh samples from each class model, not combinations of
    the training images.
    """
    _check_params(p, q, n_classes, rank_r)
    if n_train < 1 or n_test < 1:
        raise ValueError("n_train and n_test must be >= 1")
    rng = make_rng(seed)
    train, train_labels, test, test_labels = [], [], [], []
    for c in range(n_classes):
        U, V = _class_factors(rng, p, q, rank_r)
        for _ in range(n_train):
            train.append(_sample(rng, U, V, perturbation))
            train_labels.append(c)
        for _ in range(n_test):
            test.append(_sample(rng, U, V, perturbation))
            test_labels.append(c)
    return SyntheticFamily(Dictionary(np.stack(train), train_labels), test,
                           test_labels, seed)
