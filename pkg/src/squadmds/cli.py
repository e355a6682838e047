"""Command-line front end: ``squadmds {embed,quality,bench,plot}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data or file
error, 3 numerical failure. Every failure prints one machine-readable
``kind:"error"`` record on stderr.
"""

import argparse
import os
import sys
import time

from . import __version__
from .bench import run_bench
from .core import DEFAULT_ITERATIONS, INITS, METHODS, RunConfig
from .errors import ConfigError, IoError, SquadError
from .io import FORMATS, fingerprint, format_record, load_matrix, read_records, write_matrix
from .plot import plot_svg
from .quality import quality_curve, write_curve
from .runner import embed

WORKERS_ENV = "SQUADMDS_WORKERS"


class UsageError(SquadError):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    """Argument parser that raises instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(message)


def default_workers():
    value = os.environ.get(WORKERS_ENV, "1")
    try:
        workers = int(value)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be a positive integer, got {value!r}") from None
    if workers < 1:
        raise ConfigError(f"{WORKERS_ENV} must be a positive integer, got {value!r}")
    return workers


def _float_list(text):
    try:
        values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _int_list(text):
    try:
        values = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _add_input_options(p, prefix="", dest_prefix=""):
    p.add_argument(f"--{prefix}format", dest=f"{dest_prefix}format", choices=FORMATS, default="delimited")
    p.add_argument(f"--{prefix}delimiter", dest=f"{dest_prefix}delimiter", default=None,
                   help="field separator (default: detect)")
    p.add_argument(f"--{prefix}skip-header", dest=f"{dest_prefix}skip_header", action="store_true")
    p.add_argument(f"--{prefix}label-column", dest=f"{dest_prefix}label_column", type=int, default=None,
                   help="column index holding labels (negative counts from the end)")


def build_parser():
    parser = _Parser(prog="squadmds", description="Quartet-based MDS, t-SNE hybrid and quality curves.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("embed", help="embed a data matrix in 2-D")
    p.add_argument("--input", help="data file (points in rows)")
    _add_input_options(p)
    p.add_argument("--method", choices=METHODS, default="squad-mds")
    p.add_argument("--iters", type=int, default=None,
                   help="iterations (default: " + ", ".join(f"{k} {v}" for k, v in DEFAULT_ITERATIONS.items()) + ")")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr-mds", type=float, default=None,
                   help="squad-mds: initial step as a fraction of the initial span (0.05); hybrid: MDS arm weight (0.5)")
    p.add_argument("--lr-tsne", type=float, default=1.0)
    p.add_argument("--perplexities", type=_float_list, default=(4.0, 50.0), help='comma list (default "4,50")')
    p.add_argument("--init", choices=INITS, default="pca")
    p.add_argument("--workers", type=int, default=None, help=f"threads (default: ${WORKERS_ENV} or 1)")
    p.add_argument("--sparse-similarities", action="store_true",
                   help="t-SNE similarities over 3 x max(perplexity) nearest neighbours only")
    p.add_argument("--exaggeration", type=float, default=1.0, help="early exaggeration factor (default off)")
    p.add_argument("--output", help="embedding file (delimited, two columns plus labels if any)")
    p.add_argument("--manifest", help="run manifest (default: OUTPUT.manifest)")
    p.add_argument("--telemetry", help="per-iteration records")
    p.add_argument("--replay", help="rerun the run described by a manifest")
    p.set_defaults(handler=embed_command)

    p = sub.add_parser("quality", help="R_NX curve and AUC of an embedding")
    p.add_argument("--hd", required=True, help="high-dimensional data file")
    _add_input_options(p, "hd-", "hd_")
    p.add_argument("--ld", required=True, help="embedding file")
    _add_input_options(p, "ld-", "ld_")
    p.add_argument("--output", help="curve file (K, Q_NX, R_NX per line)")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(handler=quality_command)

    p = sub.add_parser("bench", help="time runs on synthetic Gaussian data of growing size")
    p.add_argument("--sizes", type=_int_list, required=True, help="comma list of n")
    p.add_argument("--method", choices=METHODS, default="squad-mds")
    p.add_argument("--iters", type=int, default=None)
    p.add_argument("--dim", type=int, default=10, help="features per point (default 10)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--output", help="also write the table here")
    p.set_defaults(handler=bench_command)

    p = sub.add_parser("plot", help="SVG scatter of an embedding")
    p.add_argument("--input", required=True, help="embedding file")
    _add_input_options(p)
    p.add_argument("--output", required=True, help="SVG file")
    p.add_argument("--size", type=int, default=800)
    p.set_defaults(handler=plot_command)
    return parser


def _emit(stream, record):
    stream.write(format_record(record) + "\n")


def _load(args, prefix=""):
    path = getattr(args, f"{prefix}path", None) if prefix else args.input
    return load_matrix(
        path,
        getattr(args, f"{prefix}format"),
        getattr(args, f"{prefix}delimiter"),
        getattr(args, f"{prefix}skip_header"),
        getattr(args, f"{prefix}label_column"),
    )


def _config_from_args(args):
    return RunConfig(
        method=args.method,
        seed=args.seed,
        iterations=args.iters,
        lr_mds=args.lr_mds,
        lr_tsne=args.lr_tsne,
        perplexities=args.perplexities,
        init=args.init,
        workers=args.workers or default_workers(),
        sparse_similarities=args.sparse_similarities,
        exaggeration=args.exaggeration,
    ).resolved()


def _replay_args(args):
    """Fill ``args`` from a manifest; an explicit --output still wins."""
    records = [r for r in read_records(args.replay) if r.get("kind") == "manifest"]
    if not records:
        raise ConfigError(f"{args.replay} holds no manifest record")
    manifest = records[-1]
    source = manifest["input"]
    args.input = source["path"]
    args.format = source["format"]
    args.delimiter = source["delimiter"]
    args.skip_header = source["skip_header"]
    args.label_column = source["label_column"]
    args.output = args.output or manifest["output"]
    config = dict(manifest["config"])
    config["perplexities"] = tuple(config["perplexities"])
    return RunConfig(**config), manifest["dataset"]


def embed_command(args, stdout=sys.stdout):
    if args.replay:
        config, expected = _replay_args(args)
    else:
        config, expected = None, None
    if not args.input:
        raise UsageError("embed needs --input (or --replay)")
    if not args.output:
        raise UsageError("embed needs --output")
    timings = {}
    start = time.perf_counter()
    dataset = _load(args)
    timings["load"] = time.perf_counter() - start
    digest = fingerprint(dataset)
    if expected is not None and digest != expected:
        raise IoError(f"{args.input} changed since the manifest was written ({digest} != {expected})")
    if config is None:
        config = _config_from_args(args)

    telemetry_fh = None
    telemetry = None
    if args.telemetry:
        try:
            telemetry_fh = open(args.telemetry, "w", newline="")
        except OSError as exc:
            raise IoError(f"cannot open {args.telemetry}: {exc.strerror or exc}") from exc

        def telemetry(record):
            _emit(telemetry_fh, {"kind": "telemetry", **record})

    try:
        start = time.perf_counter()
        coords = embed(dataset, config, telemetry=telemetry)
        timings["embed"] = time.perf_counter() - start
    finally:
        if telemetry_fh is not None:
            telemetry_fh.close()
    start = time.perf_counter()
    write_matrix(args.output, coords, labels=dataset.labels)
    timings["write"] = time.perf_counter() - start

    manifest = {
        "kind": "manifest",
        "version": __version__,
        "seed": config.seed,
        "config": config.as_dict(),
        "input": {
            "path": os.path.abspath(args.input),
            "format": args.format,
            "delimiter": args.delimiter,
            "skip_header": args.skip_header,
            "label_column": args.label_column,
        },
        "dataset": digest,
        "n": dataset.n,
        "m": dataset.m,
        "output": os.path.abspath(args.output),
        "seconds": timings,
    }
    manifest_path = args.manifest or args.output + ".manifest"
    try:
        with open(manifest_path, "w", newline="") as fh:
            _emit(fh, manifest)
    except OSError as exc:
        raise IoError(f"cannot write {manifest_path}: {exc.strerror or exc}") from exc
    _emit(stdout, {"kind": "summary", "method": config.method, "n": dataset.n,
                   "output": args.output, "manifest": manifest_path, "seconds": timings["embed"]})
    return 0


def quality_command(args, stdout=sys.stdout):
    args.hd_path, args.ld_path = args.hd, args.ld
    hd = _load(args, "hd_")
    ld = _load(args, "ld_")
    if ld.m != 2:
        raise UsageError(f"{args.ld} has {ld.m} numeric columns; an embedding needs 2 "
                         "(use --ld-label-column for a label column)")
    curve = quality_curve(hd, ld.points, workers=args.workers or default_workers())
    if args.output:
        try:
            write_curve(args.output, curve)
        except OSError as exc:
            raise IoError(f"cannot write {args.output}: {exc.strerror or exc}") from exc
    _emit(stdout, {"kind": "quality", "n": hd.n, "auc": curve.auc})
    return 0


def bench_command(args, stdout=sys.stdout):
    result = run_bench(args.sizes, args.method, args.iters, args.seed, args.dim,
                       args.workers or default_workers(), args.repeats)
    lines = ["N\tseconds"]
    lines += [f"{n}\t{s:.6f}" for n, s in result.rows()]
    summary = {"kind": "summary", "method": result.method, "iterations": result.iterations}
    if result.slope is not None:
        summary["slope"] = result.slope
    lines.append("# " + format_record(summary))
    text = "\n".join(lines) + "\n"
    stdout.write(text)
    if args.output:
        try:
            with open(args.output, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoError(f"cannot write {args.output}: {exc.strerror or exc}") from exc
    return 0


def plot_command(args, stdout=sys.stdout):
    data = _load_embedding(args)
    plot_svg(data.points, data.labels, args.output, size=args.size)
    _emit(stdout, {"kind": "summary", "n": data.n, "output": args.output})
    return 0


def _load_embedding(args):
    data = _load(args)
    if data.m != 2:
        raise UsageError(f"{args.input} has {data.m} numeric columns; an embedding needs 2 "
                         "(use --label-column for a label column)")
    return data


def main(argv=None, stdout=None, stderr=None):
    """Run the command line; returns the exit code instead of exiting."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "handler", None) is None:
            raise UsageError("choose a command: embed, quality, bench or plot")
        return args.handler(args, stdout=stdout)
    except SquadError as exc:
        record = {"kind": "error", "type": type(exc).__name__, "exit_code": exc.exit_code, "message": str(exc)}
        for key in ("line", "col", "row", "iteration"):
            if hasattr(exc, key):
                record[key] = getattr(exc, key)
        _emit(stderr, record)
        return exc.exit_code


def main_exit():
    """Console-script entry point."""
    sys.exit(main())
