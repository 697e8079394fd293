"""``dangsim`` command line: run traces, generate workloads, dump the corpus."""

import argparse
import sys
from pathlib import Path

from dangsim import traceio
from dangsim.corpus import write_corpus
from dangsim.engine import Engine, EngineConfig
from dangsim.errors import DangSimError
from dangsim.logstore import CompressionMode
from dangsim.simspace import Placement


def _compression(text):
    try:
        return CompressionMode.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser():
    parser = argparse.ArgumentParser(prog="dangsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replay a trace file")
    run.add_argument("file", type=Path)
    run.add_argument("--compression", type=_compression, default=CompressionMode.parse("off"),
                     help="off | block:<words> | full (default: off)")
    run.add_argument("--cache-bits", type=int, default=20)
    run.add_argument("--direct-bits", type=int, default=32)
    run.add_argument("--hash-bits", type=int, default=20)
    run.add_argument("--period-threshold", type=int, default=1000)
    run.add_argument("--placement", choices=[p.value for p in Placement], default="low")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--oracle-check", action="store_true",
                     help="audit every release against a full memory sweep")
    run.add_argument("--stats-out", type=Path, help="write key=value stats here")
    run.add_argument("--no-final-flush", action="store_true")

    gen = sub.add_parser("gen", help="generate a synthetic workload trace")
    gen.add_argument("--pattern", choices=traceio.PATTERNS, required=True)
    gen.add_argument("--objects", type=int, required=True)
    gen.add_argument("--stores", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--output", type=Path, help="default: stdout")

    corpus = sub.add_parser("corpus", help="write the use-after-free trace corpus")
    corpus.add_argument("--out", type=Path, required=True)
    return parser


def _run(args):
    config = EngineConfig(
        compression=args.compression,
        cache_bits=args.cache_bits,
        direct_bits=args.direct_bits,
        hash_bits=args.hash_bits,
        period_threshold=args.period_threshold,
        placement=Placement(args.placement),
        seed=args.seed,
        oracle_check=args.oracle_check,
        final_flush=not args.no_final_flush,
    )
    try:
        events = traceio.parse(args.file.read_text())
        report = Engine(config).run(events)
    except (DangSimError, ValueError) as exc:
        print(f"dangsim: {args.file}: {exc}", file=sys.stderr)
        return 1
    if args.stats_out:
        args.stats_out.write_text(report.to_text())
    print(report.to_json())
    return 0


def _gen(args):
    try:
        spec = traceio.WorkloadSpec(args.pattern, args.objects, args.stores, args.seed)
    except ValueError as exc:
        print(f"dangsim: {exc}", file=sys.stderr)
        return 2
    text = traceio.generate(spec)
    if args.output:
        args.output.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _corpus(args):
    paths = write_corpus(args.out)
    print(f"wrote {len(paths)} traces to {args.out}")
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    return {"run": _run, "gen": _gen, "corpus": _corpus}[args.command](args)
