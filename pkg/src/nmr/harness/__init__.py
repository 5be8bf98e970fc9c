"""Image I/O, occlusion synthesis, synthetic data, ridge baseline and sweeps."""

from .baseline import ridge_baseline_classify
from .io import ImageFormatError, Manifest, load_image, load_manifest, save_image
from .occlusion import OcclusionKind, OcclusionSpec, occlude
from .sweep import LabelledSet, SweepRow, run_occlusion_sweep
from .synthetic import (SyntheticFamily, SyntheticProblem, synth_classification_family,
                        synth_lowrank_problem)
