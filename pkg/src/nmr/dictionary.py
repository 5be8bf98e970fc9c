"""The pooled set of regressor images and its vectorized design matrix."""

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_image


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Ordered regressor images ``A_1, ..., A_n`` sharing one ``(p, q)`` shape.

    Parameters
    ----------
    regressors : ndarray, shape (n, p, q)
        Regressor images, in dictionary order.
    labels : tuple or None
        Optional class label per regressor.

    Attributes
    ----------
    H : ndarray, shape (p * q, n)
        Design matrix whose column ``j`` is ``vectorize(regressors[j])``.
    """

    regressors: np.ndarray
    labels: tuple = None
    H: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.array(self.regressors, dtype=np.float64)
        if A.ndim != 3 or A.shape[0] < 1:
            raise ValueError(
                f"regressors must have shape (n, p, q) with n >= 1, got {A.shape}"
            )
        if A.shape[1] < 1 or A.shape[2] < 1:
            raise ValueError(f"regressor images must be non-empty, got {A.shape[1:]}")
        if not np.all(np.isfinite(A)):
            raise ValueError("regressors contain non-finite entries")
        A.setflags(write=False)
        object.__setattr__(self, "regressors", A)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != A.shape[0]:
                raise ValueError(
                    f"got {len(labels)} labels for {A.shape[0]} regressors"
                )
            object.__setattr__(self, "labels", labels)
        # column-major vectorization of each image
        H = np.ascontiguousarray(A.transpose(0, 2, 1).reshape(A.shape[0], -1).T)
        H.setflags(write=False)
        object.__setattr__(self, "H", H)

    @classmethod
    def from_images(cls, images, labels=None):
        """Build a dictionary from a sequence of equally sized 2-D images."""
        images = [as_image(im, f"regressor {j}") for j, im in enumerate(images)]
        if not images:
            raise ValueError("dictionary needs at least one regressor")
        shape = images[0].shape
        for j, im in enumerate(images):
            if im.shape != shape:
                raise ValueError(
                    f"regressor {j} has shape {im.shape}, expected {shape}"
                )
        return cls(np.stack(images), labels)

    @property
    def n_atoms(self):
        return self.regressors.shape[0]

    @property
    def image_shape(self):
        return self.regressors.shape[1:]

    @property
    def classes(self):
        """Distinct labels in canonical (sorted) order."""
        if self.labels is None:
            return ()
        return tuple(sorted(set(self.labels)))

    def permuted(self, order):
        """Return a new dictionary with regressors (and labels) reordered."""
        order = list(order)
        labels = None if self.labels is None else [self.labels[j] for j in order]
        return Dictionary(self.regressors[order], labels)

    def normalized(self):
        """Copy with every regressor scaled to unit Frobenius norm."""
        norms = np.linalg.norm(self.regressors, axis=(1, 2), keepdims=True)
        scaled = np.divide(self.regressors, norms, out=self.regressors.copy(),
                           where=norms > 0)
        return Dictionary(scaled, self.labels)

    def check_image(self, B, name="B"):
        B = as_image(B, name)
        if B.shape != self.image_shape:
            raise ValueError(
                f"{name} has shape {B.shape}, dictionary images are {self.image_shape}"
            )
        return B
