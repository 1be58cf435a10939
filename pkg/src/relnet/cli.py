"""Command-line entry point: ``relnet <command> ...``.

Exit status is 0 on success, 1 for usage errors and 2 for data errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiment, storage, vision
from .errors import (
    ConfigurationError,
    ConnectivityError,
    DataError,
    IncompleteFrameError,
    InputDomainError,
    NoSignalError,
    ParameterError,
    RelnetError,
    SizeError,
    StateError,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

USAGE_ERRORS = (ConfigurationError, ParameterError, ConnectivityError, StateError)
DATA_ERRORS = (DataError, IncompleteFrameError, InputDomainError, NoSignalError, SizeError)


class UsageError(RelnetError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(args):
    if not args.config:
        raise UsageError("--config is required")
    cfg = experiment.ExperimentConfig.load(args.config)
    if args.seed is not None:
        cfg = experiment.ExperimentConfig.from_dict({**cfg.to_dict(), "seed": args.seed})
    return cfg


def _parse_value(text):
    try:
        vals = [float(t) for t in text.split(";")]
    except ValueError:
        raise DataError(f"cannot parse value {text!r}") from None
    if not all(np.isfinite(vals)):
        raise DataError(f"non-finite value {text!r}")
    return np.array(vals)


def _parse_assignments(items, graph):
    observed = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"expected name=value, got {item!r}")
        if name not in graph.nodes:
            raise UsageError(f"unknown stream {name!r}")
        observed[name] = _parse_value(value)
    return observed


def _format_value(v):
    v = np.asarray(v).reshape(-1)
    return ";".join(repr(float(x)) for x in v)


def _print_results(results, out):
    out.write("name,value,confidence\n")
    for name, res in results.items():
        out.write(f"{name},{_format_value(res.value)},{res.confidence!r}\n")


def _edge_arg(text):
    a, sep, b = text.partition(":")
    if not sep or not a or not b:
        raise UsageError(f"edges are written source:target, got {text!r}")
    return a, b


def cmd_gen(args, out):
    cfg = _load_config(args)
    if cfg.is_vision:
        raise UsageError("gen works on synthetic topologies; use vision-extract for frames")
    storage.write_table(args.output, experiment.generate_table(cfg))


def cmd_train(args, out):
    cfg = _load_config(args)
    columns = storage.read_table(args.data) if args.data else None

    def report(step, qe):
        cells = " ".join(f"{n}={e:.6g}" for n, e in qe.items())
        out.write(f"step {step} quantization_error {cells}\n")

    graph = experiment.train(cfg, columns, report=report)
    storage.save_model(args.model, graph, cfg.to_dict())


def cmd_infer(args, out):
    graph, _ = storage.load_model(args.model)
    observed = _parse_assignments(args.observed, graph)
    query = [q for item in args.query for q in item.split(",") if q]
    for q in query:
        if q not in graph.nodes:
            raise UsageError(f"unknown stream {q!r}")
        if q in observed:
            raise UsageError(f"stream {q!r} is both observed and queried")
    _print_results(graph.infer(observed, query), out)


def cmd_denoise(args, out):
    graph, _ = storage.load_model(args.model)
    observed = _parse_assignments(args.observed, graph)
    _print_results(graph.denoise(observed), out)


def cmd_export(args, out):
    graph, _ = storage.load_model(args.model)
    if args.what in ("wcross", "relation"):
        if not args.edge:
            raise UsageError(f"export {args.what} needs --edge source:target")
        a, b = _edge_arg(args.edge)
        for n in (a, b):
            if n not in graph.nodes:
                raise UsageError(f"unknown stream {n!r}")
        e = graph.edge(a, b)
        if args.what == "wcross":
            w = e.link.w_cross if (e.source, e.target) == (a, b) else e.link.w_cross.T
            text = storage.format_matrix(w)
        else:
            probes, decoded = graph.relation_sweep(a, b, args.probes)
            lines = ["probe,decoded"]
            lines += [f"{float(x)!r},{float(y)!r}" for x, y in zip(probes, decoded)]
            text = "\n".join(lines) + "\n"
    else:
        if not args.node:
            raise UsageError("export tuning needs --node")
        if args.node not in graph.nodes:
            raise UsageError(f"unknown stream {args.node!r}")
        som = graph.som(args.node)
        if som.input_dim != 1:
            raise UsageError("tuning export covers one-dimensional maps")
        lines = ["index,preferred,xi"]
        for i, (w, v) in enumerate(zip(som.preferred[:, 0], som.tuning_var)):
            lines.append(f"{i},{float(w)!r},{float(np.sqrt(v))!r}")
        text = "\n".join(lines) + "\n"
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_vision_extract(args, out):
    if args.frames:
        frames = [vision.read_pgm(p) for p in sorted(Path(args.frames).glob("*.pgm"))]
        seq = vision.FrameSequence(frames)
        seed = args.seed or 0
        window = args.window
    else:
        cfg = _load_config(args)
        if not cfg.is_vision:
            raise UsageError("vision-extract needs a vision configuration or --frames")
        p = cfg.vision_params()
        seq = vision.synth_sequence(p["kind"], p["velocity"], p["frames"], tuple(p["size"]),
                                    p["wavelength"])
        seed, window = cfg.seed, p["window"]
    rows = vision.extract_streams(seq, sampling=args.sampling, k=args.k, seed=seed, window=window)
    storage.write_table(args.output, rows)


def build_parser():
    p = _Parser(prog="relnet", description="Learn, query and export multimodal relation networks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, config=False, model=False):
        if config:
            sp.add_argument("--config", help="experiment configuration (JSON)")
            sp.add_argument("--seed", type=int, help="override the configuration seed")
        if model:
            sp.add_argument("--model", required=True, help="model file (JSON)")

    sp = sub.add_parser("gen", help="write synthetic streams as CSV")
    common(sp, config=True)
    sp.add_argument("--output", "-o", required=True)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("train", help="train a model")
    common(sp, config=True)
    sp.add_argument("--data", help="CSV streams; generated from the configuration if omitted")
    sp.add_argument("--model", required=True, help="output model file")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("infer", help="infer missing streams")
    common(sp, model=True)
    sp.add_argument("observed", nargs="+", help="name=value (vectors as a;b)")
    sp.add_argument("--query", "-q", action="append", required=True)
    sp.set_defaults(func=cmd_infer)

    sp = sub.add_parser("denoise", help="denoise a full set of observations")
    common(sp, model=True)
    sp.add_argument("observed", nargs="+", help="name=value for every stream")
    sp.set_defaults(func=cmd_denoise)

    sp = sub.add_parser("export", help="export plot-ready CSV")
    common(sp, model=True)
    sp.add_argument("--what", choices=("wcross", "tuning", "relation"), required=True)
    sp.add_argument("--edge")
    sp.add_argument("--node")
    sp.add_argument("--probes", type=int, default=200)
    sp.add_argument("--output", "-o", required=True)
    sp.set_defaults(func=cmd_export)

    sp = sub.add_parser("vision-extract", help="extract (i, g_mag, v, f_par) rows from frames")
    common(sp, config=True)
    sp.add_argument("--frames", help="directory of P5 PGM frames, read in name order")
    sp.add_argument("--window", type=int, default=5)
    sp.add_argument("--sampling", choices=("all_pixels", "random_k"), default="all_pixels")
    sp.add_argument("--k", type=int)
    sp.add_argument("--output", "-o", required=True)
    sp.set_defaults(func=cmd_vision_extract)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args, out)
    except (UsageError, *USAGE_ERRORS) as exc:
        print(f"relnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (*DATA_ERRORS, OSError) as exc:
        print(f"relnet: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
