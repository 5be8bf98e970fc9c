"""Square block occlusion of images."""

import enum
from dataclasses import dataclass

import numpy as np

from ..linalg import as_image


def make_rng(seed):
    """Seeded generator used for all sampling in the harness.

    Philox-4x64 is counter based and its integer stream is fixed across
    platforms; every sampled quantity is drawn as an integer.
    """
    return np.random.Generator(np.random.Philox(seed))


class OcclusionKind(str, enum.Enum):
    BLACK = "black"
    RANDOM = "random"
    TEXTURE = "texture"


@dataclass(frozen=True)
class OcclusionSpec:
    """How to corrupt an image with a randomly placed square block.

    Parameters
    ----------
    level : float
        Fraction of the image area to cover, in ``[0, 1]``.
    kind : {"black", "random", "texture"}
        Block content: zeros, uniform integers in ``[0, 255]``, or a patch
        cut from ``texture``.
    seed : int
        Seed for placement (and block content for ``random``/``texture``).
    texture : array_like, optional
        Texture image, required for ``kind="texture"``.
    """

    level: float
    kind: OcclusionKind = OcclusionKind.BLACK
    seed: int = 0
    texture: np.ndarray = None
    placement: str = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "kind", OcclusionKind(self.kind))
        if not 0.0 <= self.level <= 1.0:
            raise ValueError(f"occlusion level must lie in [0, 1], got {self.level!r}")
        if self.placement != "uniform":
            raise ValueError(f"unsupported placement {self.placement!r}")
        if self.kind is OcclusionKind.TEXTURE:
            if self.texture is None:
                raise ValueError("texture occlusion needs a texture image")
            object.__setattr__(self, "texture", as_image(self.texture, "texture"))

    def block_side(self, shape):
        p, q = shape
        s = int(round(np.sqrt(self.level * p * q)))
        return min(s, p, q)


def occlude(M, spec):
    """Paste a square block into a copy of ``M``.

    Returns
    -------
    occluded : ndarray
    mask : ndarray of bool
        True on the ``s x s`` covered pixels.
    """
    M = as_image(M, "image")
    p, q = M.shape
    s = spec.block_side(M.shape)
    out = M.copy()
    mask = np.zeros(M.shape, dtype=bool)
    if s == 0:
        return out, mask

    rng = make_rng(spec.seed)
    i = int(rng.integers(0, p - s + 1))
    j = int(rng.integers(0, q - s + 1))
    if spec.kind is OcclusionKind.BLACK:
        block = np.zeros((s, s))
    elif spec.kind is OcclusionKind.RANDOM:
        block = rng.integers(0, 256, size=(s, s)).astype(np.float64)
    else:
        tex = spec.texture
        if tex.shape[0] < s or tex.shape[1] < s:
            raise ValueError(
                f"texture of shape {tex.shape} is smaller than the {s}x{s} block"
            )
        ti = int(rng.integers(0, tex.shape[0] - s + 1))
        tj = int(rng.integers(0, tex.shape[1] - s + 1))
        block = tex[ti:ti + s, tj:tj + s]
    out[i:i + s, j:j + s] = block
    mask[i:i + s, j:j + s] = True
    return out, mask
