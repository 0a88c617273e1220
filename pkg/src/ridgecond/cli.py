"""Command-line interface: ``ridgecond {cnplot,select,estimate,bench,replay}``.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure,
4 I/O or input-file error.
"""

import argparse
import datetime
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .bench import BENCH_COLUMNS, run_bench
from .condpath import Norm, PenaltyGrid, condition_path, find_knee, spectral_condition
from .errors import InvalidInput, NumericalFailure, ParseError, RidgeCondError
from .estimators import EstimatorKind, TargetSpec, precision_of, ridge_estimate
from .ingest import cov_ml, read_csv, read_matrix, to_correlation, write_matrix, write_table
from .plotting import PlotConfig, render_png, write_svg
from .selection import CVConfig, select_penalty

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

PATH_COLUMNS = ("index", "lambda", "ln_lambda", "cond", "digits_lost", "acceleration")


class UsageError(InvalidInput):
    pass


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_common(p):
    p.add_argument("--input", required=True, help="CSV data (rows = observations) or matrix with --as-matrix")
    p.add_argument("--as-matrix", action="store_true", help="treat the input as a precomputed symmetric matrix")
    p.add_argument("--cor", action="store_true", help="scale to a correlation matrix first")
    p.add_argument("--no-header", action="store_true", help="input has no header row")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--type", default="alt", help="estimator: arch1, arch2 or alt (default alt)")
    p.add_argument(
        "--target",
        default="dupv",
        help="null | scalar:<phi> | dupv (phi = 1/average eigenvalue) | depv (1/variances) | file:<path>",
    )
    p.add_argument("--lmin", type=float, default=1e-5)
    p.add_argument("--lmax", type=float, default=None, help="default 1 for arch1, 20 otherwise")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--norm", default="2", choices=["2", "1"])
    p.add_argument("--aids", action="store_true", help="add digit-loss and acceleration panels")
    p.add_argument("--mark", type=_float_list, default=[], help="penalties to mark, comma-separated")
    p.add_argument("--knee-scale", choices=["range", "point"], default="range")
    p.add_argument("--knee-tol", type=float, default=None, help="default 0.25 (range) or 0.01 (point)")
    p.add_argument("--knee-window", type=int, default=None)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--title", default=None)
    p.add_argument("--y-clip", type=float, default=None)
    p.add_argument("--png", action="store_true", help="also render plot.png with matplotlib")


def build_parser():
    parser = argparse.ArgumentParser(prog="ridgecond", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ridgecond {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cnplot", help="condition number plot over a penalty grid")
    _add_common(p)

    p = sub.add_parser("select", help="knee-constrained cross-validated penalty selection")
    _add_common(p)
    p.add_argument("--folds", type=int, default=None, help="K-fold CV (default leave-one-out)")
    p.add_argument("--lmin-override", type=float, default=None, help="lower search bound instead of the knee")
    p.add_argument("--unbiased", action="store_true", help="n-1 divisor for training covariances")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=200)

    p = sub.add_parser("estimate", help="write a ridge estimate and its precision matrix")
    _add_common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)

    p = sub.add_parser("bench", help="time condition paths over grids of p and S")
    p.add_argument("--p", type=_int_list, default=[125, 250])
    p.add_argument("--steps", type=_int_list, default=[125, 1000])
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--estimators", default="alt,arch1,arch2")
    p.add_argument("--equivariance", choices=["both", "equivariant", "non-equivariant"], default="both")
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=".")

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    return parser


def resolve_threads(value):
    if value is not None:
        return max(1, value)
    env = os.environ.get("RIDGECOND_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"RIDGECOND_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def parse_target(text, delimiter=","):
    key = text.strip()
    low = key.lower()
    if low == "null":
        return TargetSpec.null()
    if low in ("dupv", "daie"):
        return TargetSpec.average_eigenvalue()
    if low == "depv":
        return TargetSpec.reciprocal_variance()
    if low.startswith("scalar:"):
        try:
            return TargetSpec.scalar(float(key.split(":", 1)[1]))
        except ValueError:
            raise UsageError(f"bad scalar target {text!r}") from None
    if low.startswith("file:"):
        matrix, _ = read_matrix(key.split(":", 1)[1], delimiter=delimiter)
        return TargetSpec.custom(matrix)
    raise UsageError(f"unknown target {text!r}")


def sha256_of(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def load_matrix(args):
    """Return ``(s, names, data)`` where ``data`` is ``None`` for matrix input."""
    header = not args.no_header
    if args.as_matrix:
        s, names = read_matrix(args.input, has_header=header, delimiter=args.delimiter)
        data = None
    else:
        data = read_csv(args.input, has_header=header, delimiter=args.delimiter)
        s, names = cov_ml(data), data.names
    if args.cor:
        s = to_correlation(s)
    return s, names, data


def _setup(args):
    kind = EstimatorKind.parse(args.type)
    if args.lmax is None:
        args.lmax = 1.0 if kind is EstimatorKind.ARCH_I else 20.0
    if kind is EstimatorKind.ARCH_I and args.lmax > 1.0:
        raise UsageError(f"--type arch1 needs --lmax within its domain {kind.domain}, got {args.lmax!r}")
    norm = Norm.parse(args.norm)
    if args.aids and norm is not Norm.SPECTRAL:
        raise UsageError("--aids needs --norm 2 (the acceleration aid is spectral only)")
    if args.steps < 3:
        raise UsageError(f"--steps must be at least 3, got {args.steps}")
    target = parse_target(args.target, args.delimiter)
    grid = PenaltyGrid(args.lmin, args.lmax, args.steps)
    for lam in args.mark:
        if not grid.lambda_min <= lam <= grid.lambda_max:
            raise UsageError(f"--mark {lam!r} outside [{grid.lambda_min!r}, {grid.lambda_max!r}]")
    return kind, target, grid, norm


def compute_path(s, kind, target, grid, norm, args):
    path = condition_path(s, kind, target, grid, norm, threads=resolve_threads(args.threads))
    if norm is Norm.SPECTRAL:
        tol = args.knee_tol
        if tol is None:
            tol = 0.25 if args.knee_scale == "range" else 0.01
        path.knee = find_knee(path, tol, args.knee_window, scale=args.knee_scale)
    return path.with_aids()


def path_rows(path):
    lam = path.grid.values
    rows = []
    for i in range(path.grid.steps):
        acc = None
        if path.acceleration is not None and 0 < i < path.grid.steps - 1:
            a = path.acceleration[i - 1]
            acc = None if math.isnan(a) else float(a)
        digits = int(path.digits_lost[i])
        rows.append(
            (
                i,
                float(lam[i]),
                math.log(lam[i]),
                float(path.cond[i]),
                math.inf if digits < 0 else digits,
                acc,
            )
        )
    return rows


def write_plots(out, path, config, args, outputs):
    outputs.append(write_svg(os.path.join(out, "plot.svg"), path, config))
    if args.png:
        outputs.append(render_png(os.path.join(out, "plot.png"), path, config))


def write_manifest(out, args, argv, outputs):
    manifest = {
        "tool": "ridgecond",
        "version": __version__,
        "command": args.command,
        "argv": list(argv),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "outputs": [os.path.basename(f) for f in outputs],
    }
    input_path = getattr(args, "input", None)
    if input_path:
        manifest["input"] = input_path
        manifest["input_sha256"] = sha256_of(input_path)
    for key, value in sorted(vars(args).items()):
        if key in ("command", "func"):
            continue
        manifest[f"param_{key}"] = value
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _plot_config(args, marks, show_aids):
    return PlotConfig(
        title=args.title or f"Condition number plot ({args.type})",
        vertical_marks=marks,
        show_aids=show_aids,
        y_clip=args.y_clip,
    )


def cmd_cnplot(args, argv):
    kind, target, grid, norm = _setup(args)
    s, _, _ = load_matrix(args)
    path = compute_path(s, kind, target, grid, norm, args)
    out = args.out
    outputs = [os.path.join(out, "path.csv")]
    write_table(outputs[0], PATH_COLUMNS, path_rows(path))
    marks = [(lam, "proposed") for lam in args.mark]
    write_plots(out, path, _plot_config(args, marks, args.aids), args, outputs)
    write_manifest(out, args, argv, outputs)
    if path.knee is not None:
        print(f"knee at lambda={path.knee[0]:.6g} (ln {math.log(path.knee[0]):.3f}), cond={path.cond[path.knee[1]]:.6g}")
    else:
        print("no point of relative stabilization in the grid")
    return EXIT_OK


def cmd_select(args, argv):
    kind, target, grid, norm = _setup(args)
    if args.as_matrix:
        raise UsageError("select needs a dataset (rows = observations), not --as-matrix")
    if norm is not Norm.SPECTRAL and args.lmin_override is None:
        raise UsageError("the knee is located on the spectral path; use --norm 2 or --lmin-override")
    s, _, data = load_matrix(args)
    path = compute_path(s, kind, target, grid, norm, args)
    if args.lmin_override is not None:
        lambda_lo = args.lmin_override
    elif path.knee is None:
        raise UsageError(
            f"no point of relative stabilization found in [{grid.lambda_min!r}, {grid.lambda_max!r}]; "
            "widen the domain with --lmin/--lmax or pass --lmin-override"
        )
    else:
        lambda_lo = path.knee[0]
    if not lambda_lo < grid.lambda_max:
        raise UsageError(f"search bound {lambda_lo!r} is not below --lmax {grid.lambda_max!r}")
    cfg = CVConfig(
        lambda_lo=lambda_lo,
        lambda_hi=grid.lambda_max,
        estimator=kind,
        target=target,
        folds=args.folds,
        use_correlation=args.cor,
        unbiased=args.unbiased,
        tol=args.tol,
        max_iter=args.max_iter,
        seed=args.seed,
    )
    result = select_penalty(data, cfg)
    selection = {
        "estimator": kind.value,
        "target": args.target,
        "folds": "loo" if args.folds is None else args.folds,
        "knee_lambda": None if path.knee is None else path.knee[0],
        "knee_index": None if path.knee is None else path.knee[1],
        "lambda_lo": lambda_lo,
        "lambda_hi": grid.lambda_max,
        "lambda_opt": result.lambda_opt,
        "cond_at_lambda_lo": spectral_condition(ridge_estimate(s, kind, target, lambda_lo)),
        "cond_at_lambda_opt": spectral_condition(ridge_estimate(s, kind, target, result.lambda_opt)),
        "cv_score": result.score_opt,
        "evaluations": result.evaluations,
    }
    out = args.out
    outputs = [os.path.join(out, "selection.json"), os.path.join(out, "path.csv")]
    with open(outputs[0], "w") as fh:
        json.dump(selection, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_table(outputs[1], PATH_COLUMNS, path_rows(path))
    marks = [(lam, "proposed") for lam in args.mark] + [(result.lambda_opt, "selected")]
    write_plots(out, path, _plot_config(args, marks, args.aids), args, outputs)
    write_manifest(out, args, argv, outputs)
    print(
        f"lambda_opt={result.lambda_opt:.6g} (searched [{lambda_lo:.6g}, {grid.lambda_max:.6g}]), "
        f"cond={selection['cond_at_lambda_opt']:.6g}, cv score={result.score_opt:.6g}"
    )
    return EXIT_OK


def cmd_estimate(args, argv):
    kind = EstimatorKind.parse(args.type)
    kind.check_penalty(args.lam)
    target = parse_target(args.target, args.delimiter)
    s, names, _ = load_matrix(args)
    est = ridge_estimate(s, kind, target, args.lam)
    prec = precision_of(est)
    out = args.out
    outputs = [os.path.join(out, "estimate.csv"), os.path.join(out, "precision.csv")]
    write_matrix(outputs[0], est, names, args.delimiter)
    write_matrix(outputs[1], prec, names, args.delimiter)
    write_manifest(out, args, argv, outputs)
    print(f"wrote {outputs[0]} and {outputs[1]}; cond={spectral_condition(est):.6g}")
    return EXIT_OK


def cmd_bench(args, argv):
    estimators = [EstimatorKind.parse(e) for e in args.estimators.split(",") if e.strip()]
    equivariance = {"both": (True, False), "equivariant": (True,), "non-equivariant": (False,)}[args.equivariance]
    if args.reps < 1 or any(p < 1 for p in args.p) or any(s < 3 for s in args.steps):
        raise UsageError("--reps and --p must be positive and --steps at least 3")
    rows = run_bench(args.p, args.steps, args.reps, estimators, equivariance, seed=args.seed, threads=args.threads)
    out = args.out
    outputs = [os.path.join(out, "bench.csv")]
    table = [
        (r.estimator, "true" if r.equivariant else "false", r.p, r.S, r.median_seconds, r.reps) for r in rows
    ]
    write_table(outputs[0], BENCH_COLUMNS, table)
    write_manifest(out, args, argv, outputs)
    for r in rows:
        kind = "equivariant" if r.equivariant else "non-equivariant"
        print(f"{r.estimator:5s} {kind:15s} p={r.p:5d} S={r.S:5d} median={r.median_seconds:.4f}s")
    return EXIT_OK


def _replace_out(argv, out):
    argv = list(argv)
    for i, tok in enumerate(argv):
        if tok == "--out" and i + 1 < len(argv):
            argv[i + 1] = out
            return argv
        if tok.startswith("--out="):
            argv[i] = f"--out={out}"
            return argv
    return argv + ["--out", out]


def cmd_replay(args, argv):
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    recorded = manifest.get("argv")
    if not recorded or recorded[0] == "replay":
        raise UsageError("manifest does not record a replayable command")
    digest = manifest.get("input_sha256")
    if digest and sha256_of(manifest["input"]) != digest:
        print("warning: input file changed since the manifest was written", file=sys.stderr)
    return main(_replace_out(recorded, args.out))


COMMANDS = {
    "cnplot": cmd_cnplot,
    "select": cmd_select,
    "estimate": cmd_estimate,
    "bench": cmd_bench,
    "replay": cmd_replay,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.command != "replay":
            os.makedirs(args.out, exist_ok=True)
        with np.errstate(all="ignore"):
            return COMMANDS[args.command](args, argv)
    except (ParseError, OSError) as exc:
        print(f"ridgecond {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvalidInput as exc:
        print(f"ridgecond {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, RidgeCondError) as exc:
        print(f"ridgecond {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
