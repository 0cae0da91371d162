"""Command-line interface.

Subcommands: filter, embed, classify, evaluate, sweep, synth. Exit codes:
0 success, 1 usage error, 2 data/format error, 3 numerical failure. All
diagnostics go to stderr; output files land in --out-dir with fixed names
so runs with the same arguments and seed are byte-reproducible.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import io as hsio
from .config import (DEFAULT_D, DEFAULT_K, DEFAULT_W, METHODS, RunConfig)
from .embed import npe_fit, pca_fit, project, ssmrpe_fit
from .errors import (BoundsError, ConfigError, FormatError, NumericalError,
                     ShapeError, SsmrpeError, ValidationError)
from .evaluate import SplitSpec, predict_map, run_experiment, sweep
from .ssgraph import DEFAULT_EPS
from .sscd import SscdContext
from .synth import DEFAULT_NOISE, synthetic_benchmark
from .wmf import DEFAULT_GAMMA0, FilterConfig, filter_cube

log = logging.getLogger("ssmrpe")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _int_list(text):
    try:
        values = [int(token) for token in text.split(",") if token.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _method_options(parser, *, methods=METHODS, grid=False):
    parser.add_argument("--method", choices=methods, default="ssmrpe")
    if grid:
        parser.add_argument("--w", type=_int_list, default=[DEFAULT_W],
                            help="comma-separated window sizes (odd)")
        parser.add_argument("--k", type=_int_list, default=[DEFAULT_K],
                            help="comma-separated neighbor counts")
    else:
        parser.add_argument("--w", type=int, default=DEFAULT_W,
                            help="spatial window size (odd)")
        parser.add_argument("--k", type=int, default=DEFAULT_K,
                            help="neighbor count for graph construction")
    parser.add_argument("--d", type=int, default=DEFAULT_D,
                        help="embedding dimension")
    parser.add_argument("--gamma0", type=float, default=DEFAULT_GAMMA0,
                        help="mean-filter kernel constant")
    parser.add_argument("--eps", type=float, default=DEFAULT_EPS,
                        help="relative Gram regularizer for reconstruction weights")
    parser.add_argument("--ridge", type=float, default=None,
                        help="pencil regularizer (default: 1e-6 * trace(XX')/D)")
    parser.add_argument("--project-filtered", action="store_true",
                        help="use filtered spectra for measures and projection")
    parser.add_argument("--scd-const", type=float, default=None,
                        help="replace the coordinate-distance divisor with a constant")


def _split_options(parser):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--train-count", type=int, default=None,
                       help="training samples per class")
    group.add_argument("--train-frac", type=float, default=None,
                       help="training fraction per class (rounded up, min 1)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeats", type=int, default=5)


def _out_dir(parser):
    parser.add_argument("--out-dir", required=True, help="output directory")


def build_parser() -> _Parser:
    parser = _Parser(prog="ssmrpe", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True,
                                     parser_class=_Parser)

    p = commands.add_parser("filter", help="weighted-mean-filter a cube")
    p.add_argument("cube")
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--gamma0", type=float, default=DEFAULT_GAMMA0)
    _out_dir(p)
    p.set_defaults(func=_cmd_filter)

    p = commands.add_parser("embed", help="fit a projection over all pixels")
    p.add_argument("cube")
    _method_options(p, methods=("pca", "npe", "ssmrpe"))
    _out_dir(p)
    p.set_defaults(func=_cmd_embed)

    p = commands.add_parser("classify", help="predict labels for one split")
    p.add_argument("cube")
    p.add_argument("labels")
    _method_options(p)
    _split_options(p)
    _out_dir(p)
    p.set_defaults(func=_cmd_classify)

    p = commands.add_parser("evaluate", help="repeated-trial metrics and map")
    p.add_argument("cube")
    p.add_argument("labels")
    _method_options(p)
    _split_options(p)
    _out_dir(p)
    p.set_defaults(func=_cmd_evaluate)

    p = commands.add_parser("sweep", help="OA grid over window and neighbor counts")
    p.add_argument("cube")
    p.add_argument("labels")
    _method_options(p, grid=True)
    _split_options(p)
    _out_dir(p)
    p.set_defaults(func=_cmd_sweep)

    p = commands.add_parser("synth", help="generate the synthetic benchmark scene")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=DEFAULT_NOISE)
    _out_dir(p)
    p.set_defaults(func=_cmd_synth)

    return parser


def _prepare_out(args) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return args.out_dir


def _run_config(args, *, w=None, k=None) -> RunConfig:
    return RunConfig(method=args.method, w=args.w if w is None else w,
                     k=args.k if k is None else k, d=args.d, gamma0=args.gamma0,
                     eps=args.eps, ridge=args.ridge,
                     project_filtered=args.project_filtered,
                     scd_const=args.scd_const)


def _split_spec(args) -> SplitSpec:
    return SplitSpec(train_count=args.train_count, train_frac=args.train_frac,
                     seed=args.seed, repeats=args.repeats)


def _cmd_filter(args):
    out = _prepare_out(args)
    cube = hsio.load_cube(args.cube)
    filtered = filter_cube(cube, FilterConfig(args.w, args.gamma0))
    hsio.save_cube(filtered, os.path.join(out, "filtered.hsx"))
    log.info("filtered %dx%dx%d cube with w=%d", cube.height, cube.width,
             cube.bands, args.w)


def _cmd_embed(args):
    out = _prepare_out(args)
    cube = hsio.load_cube(args.cube)
    cfg = _run_config(args)
    X = cube.flat.T
    if cfg.method == "pca":
        model = pca_fit(X, cfg.d)
    elif cfg.method == "npe":
        model = npe_fit(X, cfg.k, cfg.d, ridge=cfg.ridge, eps=cfg.eps)
    else:
        ctx = SscdContext.from_cube(cube, FilterConfig(cfg.w, cfg.gamma0))
        model = ssmrpe_fit(ctx, cfg.k, cfg.d, eps=cfg.eps, ridge=cfg.ridge,
                           use_filtered=cfg.project_filtered,
                           scd_override=cfg.scd_const)
        if cfg.project_filtered:
            X = ctx.filtered.flat.T
    embedded = project(model, X)
    hsio.export_matrix(model.projection, os.path.join(out, "projection.csv"))
    hsio.export_matrix(model.eigenvalues, os.path.join(out, "eigenvalues.csv"))
    hsio.export_matrix(embedded.values, os.path.join(out, "embedding.csv"))
    log.info("%s embedding: %d -> %d dimensions over %d pixels",
             cfg.method, model.input_dim, model.output_dim, embedded.count)


def _cmd_classify(args):
    out = _prepare_out(args)
    cube = hsio.load_cube(args.cube)
    labels = hsio.load_labels(args.labels)
    predicted = predict_map(cube, labels, _run_config(args), _split_spec(args))
    hsio.save_labels(predicted, os.path.join(out, "predictions.hsl"))
    hsio.render_class_map(predicted, os.path.join(out, "class_map.png"))


def _cmd_evaluate(args):
    out = _prepare_out(args)
    cube = hsio.load_cube(args.cube)
    labels = hsio.load_labels(args.labels)
    cfg = _run_config(args)
    split = _split_spec(args)
    report = run_experiment(cube, labels, cfg, split)
    hsio.export_metrics(report, os.path.join(out, "metrics.csv"))
    predicted = predict_map(cube, labels, cfg, split)
    hsio.render_class_map(predicted, os.path.join(out, "class_map.png"))
    log.info("%s: OA %.2f +/- %.2f, AA %.2f, kappa %.4f", cfg.method,
             report.oa_mean, report.oa_std, report.aa_mean, report.kappa_mean)


def _cmd_sweep(args):
    out = _prepare_out(args)
    cube = hsio.load_cube(args.cube)
    labels = hsio.load_labels(args.labels)
    cfg = _run_config(args, w=args.w[0], k=args.k[0])
    result = sweep(cube, labels, args.w, args.k, cfg, _split_spec(args))
    hsio.export_sweep(result, os.path.join(out, "sweep.csv"))


def _cmd_synth(args):
    out = _prepare_out(args)
    cube, labels = synthetic_benchmark(args.seed, noise=args.noise)
    hsio.save_cube(cube, os.path.join(out, "cube.hsx"))
    hsio.save_labels(labels, os.path.join(out, "labels.hsl"))
    log.info("synthetic benchmark written for seed %d", args.seed)


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(asctime)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"ssmrpe: configuration error: {exc}", file=sys.stderr)
        return 1
    except (FormatError, ValidationError, ShapeError, BoundsError) as exc:
        print(f"ssmrpe: data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ssmrpe: i/o error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"ssmrpe: numerical failure: {exc}", file=sys.stderr)
        return 3
    except SsmrpeError as exc:
        print(f"ssmrpe: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
