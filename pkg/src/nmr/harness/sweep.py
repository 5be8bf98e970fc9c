"""Recognition rate under block occlusion, NMR versus the ridge baseline."""

import dataclasses
import logging
import warnings
from pathlib import Path
from typing import NamedTuple

from sklearn.exceptions import ConvergenceWarning

from ..classifier import classify
from ..solver import SolverConfig, precompute_ridge_map, scaled_penalty
from .baseline import ridge_baseline_classify
from .io import save_image
from .occlusion import OcclusionKind, OcclusionSpec, occlude

logger = logging.getLogger(__name__)

METHODS = ("nmr", "ridge")
_KIND_CODE = {OcclusionKind.BLACK: 0, OcclusionKind.RANDOM: 1, OcclusionKind.TEXTURE: 2}


class SweepRow(NamedTuple):
    level: float
    kind: str
    seed: int
    method: str
    recognition_rate: float


@dataclasses.dataclass
class LabelledSet:
    """Fixed train dictionary and test images, e.g. loaded from manifests."""

    dictionary: object
    test_images: list
    test_labels: list


def occlusion_seed(seed, level, kind, item):
    """Seed for one occluded test image; independent of loop order."""
    return [int(seed), int(round(level * 1_000_000)), _KIND_CODE[OcclusionKind(kind)], int(item)]


def sweep_config(dictionary, config, scale_mu):
    if scale_mu:
        return dataclasses.replace(config, mu=scaled_penalty(dictionary))
    return config


def run_occlusion_sweep(family, levels, kinds, seeds, config=None, scale_mu=False,
                        ridge_lambda=None, texture=None, methods=METHODS,
                        residual_dir=None):
    """Recognition rates for every (level, kind, seed, method) cell.

    Parameters
    ----------
    family : callable or LabelledSet
        ``family(seed)`` returns an object with ``dictionary``,
        ``test_images`` and ``test_labels`` (e.g.
        :func:`synth_classification_family`); a fixed set is reused for every
        seed, in which case the seed only moves the occluding blocks.
    levels : sequence of float
    kinds : sequence of {"black", "random", "texture"}
    seeds : sequence of int
    config : SolverConfig, optional
    scale_mu : bool
        Replace ``config.mu`` by :func:`scaled_penalty` of each dictionary.
    ridge_lambda : float, optional
        Ridge baseline weight; defaults to ``config.lam``.
    residual_dir : path, optional
        Dump the NMR residual of the first test image of every cell as CSV.

    Returns
    -------
    list of SweepRow
        Ordered by level, kind, seed, then method.
    """
    config = SolverConfig() if config is None else config
    ridge_lambda = config.lam if ridge_lambda is None else ridge_lambda
    kinds = [OcclusionKind(k) for k in kinds]
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    if residual_dir is not None:
        Path(residual_dir).mkdir(parents=True, exist_ok=True)

    rates = {}
    not_converged = total = 0
    for seed in seeds:
        data = family(seed) if callable(family) else family
        D = data.dictionary
        cfg = sweep_config(D, config, scale_mu)
        nmr_map = precompute_ridge_map(D, cfg.lam, cfg.mu) if "nmr" in methods else None
        ridge_map = precompute_ridge_map(D, ridge_lambda, 1.0) if "ridge" in methods else None
        for level in levels:
            for kind in kinds:
                correct = dict.fromkeys(methods, 0)
                for i, (B, y) in enumerate(zip(data.test_images, data.test_labels)):
                    spec = OcclusionSpec(level, kind, occlusion_seed(seed, level, kind, i),
                                         texture)
                    Bo, _ = occlude(B, spec)
                    if "nmr" in methods:
                        with warnings.catch_warnings():
                            warnings.simplefilter("ignore", ConvergenceWarning)
                            rep = classify(D, Bo, cfg, nmr_map)
                        correct["nmr"] += rep.predicted_label == y
                        total += 1
                        not_converged += not rep.converged
                        if residual_dir is not None and i == 0:
                            name = f"residual_{level:g}_{kind.value}_{seed}.csv"
                            save_image(rep.residual_image, Path(residual_dir) / name)
                    if "ridge" in methods:
                        rep = ridge_baseline_classify(D, Bo, ridge_lambda, ridge_map)
                        correct["ridge"] += rep.predicted_label == y
                n = len(data.test_labels)
                for m in methods:
                    rates[(level, kind, seed, m)] = correct[m] / n
    if not_converged:
        logger.info("%d of %d NMR solves stopped at max_iters", not_converged, total)
    return [SweepRow(level, kind.value, seed, m, rates[(level, kind, seed, m)])
            for level in levels for kind in kinds for seed in seeds for m in methods]
