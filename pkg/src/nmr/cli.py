"""Command line interface: ``nmr {solve,classify,occlude,bench,demo-residuals}``."""

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np
from sklearn.exceptions import ConvergenceWarning

from .classifier import batch_classify, class_select, decide, score_classes
from .harness import io
from .harness.baseline import ridge_baseline_classify
from .harness.occlusion import OcclusionKind, OcclusionSpec, occlude
from .harness.sweep import LabelledSet, run_occlusion_sweep
from .harness.synthetic import synth_classification_family
from .linalg import apply_operator, nuclear_norm
from .solver import IllPosedError, SolverConfig, YInit, scaled_penalty, solve_nmr

_DEFAULTS = SolverConfig()


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def parse_levels(text):
    """``"0.1:0.1:0.6"`` (inclusive range) or ``"0.1,0.3"``."""
    try:
        if ":" in text:
            start, step, stop = (float(t) for t in text.split(":"))
            if step <= 0:
                raise ValueError
            count = int(round((stop - start) / step)) + 1
            return [round(start + k * step, 10) for k in range(count)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bad level list {text!r}; use start:step:end or a,b,c"
        ) from None


def parse_kinds(text):
    try:
        return [OcclusionKind(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


_SYNTH_KEYS = {"p": 32, "q": 32, "n": None, "classes": 5, "rank": 3,
               "train": 10, "test": 10, "perturbation": 0.02}


def parse_synthetic(text):
    """``key=value`` list for :func:`synth_classification_family`.

    ``n`` is the total number of training images and overrides ``train``.
    """
    spec = dict(_SYNTH_KEYS)
    for item in filter(None, (t.strip() for t in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep or key not in spec:
            raise argparse.ArgumentTypeError(
                f"bad synthetic option {item!r}; keys: {', '.join(_SYNTH_KEYS)}"
            )
        try:
            spec[key] = float(value) if key == "perturbation" else int(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad value in {item!r}") from None
    if spec["n"] is not None:
        if spec["n"] % spec["classes"]:
            raise argparse.ArgumentTypeError("n must be a multiple of classes")
        spec["train"] = spec["n"] // spec["classes"]
    return spec


def _family(spec):
    def make(seed):
        return synth_classification_family(
            spec["p"], spec["q"], spec["classes"], spec["train"], spec["test"],
            spec["rank"], seed, spec["perturbation"])
    return make


def _mu(text):
    if text == "auto":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"mu must be a positive number or 'auto', got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("mu must be > 0")
    return value


def _add_solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--lambda", dest="lam", type=float, default=_DEFAULTS.lam,
                   help="ridge weight on the coefficients (default: %(default)s)")
    g.add_argument("--mu", type=_mu, default=_DEFAULTS.mu,
                   help="ADMM penalty, or 'auto' to scale it to the training "
                        "pixel magnitude (default: %(default)s)")
    g.add_argument("--eps-abs", type=float, default=_DEFAULTS.eps_abs,
                   help="absolute stopping tolerance (default: %(default)s)")
    g.add_argument("--eps-rel", type=float, default=_DEFAULTS.eps_rel,
                   help="relative stopping tolerance (default: %(default)s)")
    g.add_argument("--max-iters", type=int, default=_DEFAULTS.max_iters,
                   help="iteration cap (default: %(default)s)")
    g.add_argument("--y-init", choices=[v.value for v in YInit], default=_DEFAULTS.y_init.value,
                   help="initial auxiliary matrix (default: %(default)s)")


def _config(args, dictionary):
    mu = scaled_penalty(dictionary) if args.mu == "auto" else args.mu
    return SolverConfig(lam=args.lam, mu=mu, eps_abs=args.eps_abs, eps_rel=args.eps_rel,
                        max_iters=args.max_iters, y_init=args.y_init)


def _load_set(manifest_path):
    manifest = io.load_manifest(manifest_path)
    return manifest, manifest.load_images()


def cmd_solve(args, out):
    dictionary = io.load_manifest(args.dict).to_dictionary()
    B = io.load_image(args.test)
    config = _config(args, dictionary)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        result = solve_nmr(dictionary, B, config)
    io.write_coefficients(result.x, args.out)
    if args.residual:
        io.save_image(result.residual_image, args.residual)
    if args.auxiliary:
        io.save_image(result.Y, args.auxiliary)
    if args.trace:
        io.write_trace(result.trace, args.trace)
    print(f"converged={io.fmt(result.converged)} iterations={result.iterations} "
          f"objective={io.fmt(result.objective)}", file=out)


def cmd_classify(args, out):
    train = io.load_manifest(args.train).to_dictionary()
    if args.normalize:
        train = train.normalized()
    if len(train.classes) < 2:
        raise CliError("INVALID_INPUT", f"{args.train}: need at least two distinct labels")
    test_manifest, test_images = _load_set(args.test)
    config = _config(args, train)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        reports, rate = batch_classify(train, zip(test_images, test_manifest.labels),
                                       config, normalize=args.normalize)
    ids = [p for p, _ in test_manifest.entries]
    io.write_reports([io.report_row(tid, rep, lab) for tid, rep, lab
                      in zip(ids, reports, test_manifest.labels)], args.out)
    if args.errors:
        io.write_class_errors(ids, reports, args.errors)
    n_bad = sum(not r.converged for r in reports)
    print(f"recognition_rate={io.fmt(rate)} n={len(reports)} not_converged={n_bad}", file=out)


def cmd_occlude(args, out):
    M = io.load_image(args.input)
    texture = io.load_image(args.texture) if args.texture else None
    occluded, mask = occlude(M, OcclusionSpec(args.level, args.kind, args.seed, texture))
    io.save_image(occluded, args.out)
    if args.mask:
        io.save_image(mask * 255.0, args.mask)
    print(f"block_pixels={int(mask.sum())}", file=out)


def cmd_bench(args, out):
    if args.synthetic is not None:
        if args.train or args.test:
            raise CliError("USAGE", "use either --synthetic or --train/--test")
        family = _family(args.synthetic)
    elif args.train and args.test:
        manifest, images = _load_set(args.test)
        family = LabelledSet(io.load_manifest(args.train).to_dictionary(), images,
                             manifest.labels)
    else:
        raise CliError("USAGE", "bench needs --synthetic or both --train and --test")
    texture = io.load_image(args.texture) if args.texture else None
    if OcclusionKind.TEXTURE in args.kinds and texture is None:
        raise CliError("USAGE", "texture occlusion needs --texture")
    seeds = list(range(args.seed, args.seed + args.seeds))
    cfg = SolverConfig(lam=args.lam, mu=1.0 if args.mu == "auto" else args.mu,
                       eps_abs=args.eps_abs, eps_rel=args.eps_rel,
                       max_iters=args.max_iters, y_init=args.y_init)
    rows = run_occlusion_sweep(family, args.levels, args.kinds, seeds, cfg,
                               scale_mu=args.mu == "auto", texture=texture,
                               residual_dir=args.residual_dir)
    io.write_sweep(rows, args.out)
    print(f"rows={len(rows)}", file=out)


def cmd_demo(args, out):
    if args.synthetic is not None:
        fam = _family(args.synthetic)(args.seed)
        dictionary = fam.dictionary
        B = fam.test_images[0]
        true_label = fam.test_labels[0]
    elif args.train and args.test:
        dictionary = io.load_manifest(args.train).to_dictionary()
        B = io.load_image(args.test)
        true_label = args.true_label
    else:
        raise CliError("USAGE", "demo-residuals needs --synthetic or --train and --test")
    if args.level > 0:
        B, _ = occlude(B, OcclusionSpec(args.level, args.kind, args.seed))
    config = _config(args, dictionary)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        result = solve_nmr(dictionary, B, config)
    ridge = ridge_baseline_classify(dictionary, B, args.lam)

    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    io.save_image(B, outdir / "input.pgm")
    for name, x in (("nmr", result.x), ("ridge", ridge.coefficients)):
        io.save_image(apply_operator(dictionary, x), outdir / f"{name}_reconstruction.pgm")
        io.save_image(B - apply_operator(dictionary, x), outdir / f"{name}_residual.csv")

    print("class,nmr_residual_nuclear,ridge_residual_euclidean", file=out)
    for label in dictionary.classes:
        E_nmr = B - apply_operator(dictionary, class_select(result.x, label, dictionary.labels))
        E_ridge = B - apply_operator(dictionary, class_select(ridge.coefficients, label,
                                                              dictionary.labels))
        io.save_image(E_nmr, outdir / f"nmr_class_{label}_residual.csv")
        io.save_image(E_ridge, outdir / f"ridge_class_{label}_residual.csv")
        print(f"{label},{io.fmt(nuclear_norm(E_nmr))},{io.fmt(float(np.linalg.norm(E_ridge)))}",
              file=out)
    nmr_label, _ = decide(score_classes(dictionary, result.x))
    print(f"nmr_predicted={nmr_label} ridge_predicted={ridge.predicted_label} "
          f"true={true_label if true_label is not None else ''} "
          f"converged={io.fmt(result.converged)}", file=out)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nmr", description="Nuclear-norm matrix regression and classification.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("solve", help="regress one image on a dictionary")
    p.add_argument("--dict", required=True, help="manifest CSV of regressor images")
    p.add_argument("--test", required=True, help="image to represent (.pgm or .csv)")
    p.add_argument("--out", required=True, help="coefficient CSV, one value per line")
    p.add_argument("--residual", help="write B - A(x) to this image file")
    p.add_argument("--auxiliary", help="write the auxiliary matrix Y to this image file")
    p.add_argument("--trace", help="per-iteration convergence trace CSV")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("classify", help="classify every image of a test manifest")
    p.add_argument("--train", required=True, help="training manifest CSV")
    p.add_argument("--test", required=True, help="test manifest CSV with true labels")
    p.add_argument("--out", required=True, help="per-item report CSV")
    p.add_argument("--errors", help="wide CSV of per-class reconstruction errors")
    p.add_argument("--normalize", action="store_true",
                   help="scale training and test images to unit Frobenius norm")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("occlude", help="paste a square block into an image")
    p.add_argument("--input", required=True, help="source image")
    p.add_argument("--out", required=True, help="occluded image")
    p.add_argument("--level", type=float, required=True, help="covered area fraction in [0, 1]")
    p.add_argument("--kind", type=OcclusionKind, default=OcclusionKind.BLACK,
                   help="black, random or texture (default: black)")
    p.add_argument("--texture", help="texture image for --kind texture")
    p.add_argument("--mask", help="write the block mask (255 inside) to this image")
    p.add_argument("--seed", type=int, default=0, help="placement seed (default: 0)")
    p.set_defaults(func=cmd_occlude)

    p = sub.add_parser("bench", help="occlusion sweep, NMR versus ridge")
    p.add_argument("--synthetic", type=parse_synthetic,
                   help="synthetic family, e.g. p=32,q=32,n=50,classes=5,rank=3,test=10")
    p.add_argument("--train", help="training manifest (instead of --synthetic)")
    p.add_argument("--test", help="test manifest (instead of --synthetic)")
    p.add_argument("--levels", type=parse_levels, required=True,
                   help="occlusion levels, start:step:end or comma list")
    p.add_argument("--kinds", type=parse_kinds, default=[OcclusionKind.BLACK, OcclusionKind.RANDOM],
                   help="comma list of black,random,texture (default: black,random)")
    p.add_argument("--texture", help="texture image for the texture kind")
    p.add_argument("--seeds", type=int, default=1, help="number of seeds (default: 1)")
    p.add_argument("--seed", type=int, default=0, help="first seed (default: 0)")
    p.add_argument("--out", required=True, help="sweep CSV")
    p.add_argument("--residual-dir", help="dump one NMR residual per cell here")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("demo-residuals",
                       help="NMR vs ridge class residuals and reconstructions for one image")
    p.add_argument("--synthetic", type=parse_synthetic, help="synthetic family options")
    p.add_argument("--train", help="training manifest")
    p.add_argument("--test", help="test image")
    p.add_argument("--true-label", help="true class of --test, for the printout")
    p.add_argument("--level", type=float, default=0.0, help="occlusion level (default: 0)")
    p.add_argument("--kind", type=OcclusionKind, default=OcclusionKind.BLACK,
                   help="occlusion kind, black or random (default: black)")
    p.add_argument("--seed", type=int, default=0, help="seed (default: 0)")
    p.add_argument("--out-dir", required=True, help="directory for images")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_demo)
    return parser


def run(argv=None, out=None, err=None):
    """Execute one command; returns the process exit code."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, stream=err, format="%(name)s: %(message)s")
    try:
        args.func(args, out)
    except CliError as exc:
        code, msg = exc.code, str(exc)
    except io.ImageFormatError as exc:
        code, msg = "FORMAT", str(exc)
    except IllPosedError as exc:
        code, msg = "ILL_POSED", str(exc)
    except OSError as exc:
        code, msg = "IO", str(exc)
    except ValueError as exc:
        code, msg = "INVALID_INPUT", str(exc)
    else:
        return 0
    print(f"nmr: error[{code}]: {msg}", file=err)
    if code == "USAGE":
        parser.print_usage(err)
        return 2
    return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
