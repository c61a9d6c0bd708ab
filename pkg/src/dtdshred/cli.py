"""Command line: ``dtdshred schema|shred|generate|bench``.

Exit codes: 0 success, 1 input or pipeline error, 2 a queue-count invariant
failed (an internal bug, not bad input).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bench import BenchConfig, format_summary, parse_size, run_bench
from .dom import load_file
from .dtd import load_graph
from .emitters import format_report, open_sink
from .engine import check_lemmas, xinsert
from .errors import ShredError
from .generator import generate_document
from .schema import Strategy, describe_mappings, emit_ddl, map_schema

EXIT_OK, EXIT_ERROR, EXIT_INVARIANT = 0, 1, 2

log = logging.getLogger("dtdshred")


def _graph(args):
    return load_graph(Path(args.dtd).read_text(encoding="utf-8"), args.root)


def cmd_schema(args):
    schema = map_schema(_graph(args), args.strategy)
    ddl = emit_ddl(schema)
    if args.out:
        Path(args.out).write_text(ddl, encoding="utf-8")
    else:
        sys.stdout.write(ddl)
        sys.stdout.write("\n")
    sys.stdout.write(describe_mappings(schema))
    return EXIT_OK


def cmd_shred(args):
    g = _graph(args)
    schema = map_schema(g, args.strategy)
    tree = load_file(args.xml)
    sink = open_sink(schema, args.format, args.out, emit_empty=args.emit_empty)
    try:
        stats = xinsert(tree, g, schema, sink)
    finally:
        report = sink.finalize()
    print("rows written:")
    sys.stdout.write(format_report(report))
    print(f"files: {len(report.files)} in {args.out}")
    print(f"elements={tree.element_count} attributes={tree.attr_count} "
          f"q_enqueues={stats.q_enqueues} r_enqueues={stats.r_enqueues} "
          f"tuples={stats.tuples_emitted} edge_rows={stats.edge_rows} "
          f"elapsed={stats.elapsed:.6f}s")
    ok = True
    for name, (expected, observed, passed) in check_lemmas(stats, tree, schema).items():
        print(f"{'PASS' if passed else 'FAIL'}  {name}: expected {expected}, observed {observed}")
        ok = ok and passed
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_generate(args):
    doc = generate_document(_graph(args), parse_size(args.size), args.seed)
    if args.out:
        Path(args.out).write_text(doc, encoding="utf-8")
    else:
        sys.stdout.write(doc)
    return EXIT_OK


def cmd_bench(args):
    strategies = (tuple(Strategy) if args.strategy == "both" else (Strategy(args.strategy),))
    cfg = BenchConfig(
        graph=_graph(args),
        sizes=tuple(parse_size(s) for s in args.sizes.split(",") if s.strip()),
        repetitions=args.reps,
        strategies=strategies,
        seed=args.seed,
        dtd_path=args.dtd,
    )
    report = run_bench(cfg, progress=lambda c: log.info(
        "%s %d bytes: mean %.4fs", c.strategy, c.target_size, c.mean))
    sys.stdout.write(format_summary(report))
    if args.report:
        Path(args.report).write_text(report.to_json(), encoding="utf-8")
    if not all(c.lemmas_ok for c in report.cells):
        return EXIT_INVARIANT
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # exit status 2 is reserved for invariant failures
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="dtdshred", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("dtd", help="DTD file")
        sp.add_argument("--root", help="root element (default: inferred)")

    def strategy(sp, choices=("dtdmap", "shared")):
        sp.add_argument("--strategy", choices=choices, default="dtdmap")

    sp = sub.add_parser("schema", help="map a DTD to DDL and print the mappings")
    common(sp)
    strategy(sp)
    sp.add_argument("--out", help="DDL output file (default: stdout)")
    sp.set_defaults(func=cmd_schema)

    sp = sub.add_parser("shred", help="shred an XML document into CSV or SQL")
    common(sp)
    sp.add_argument("xml", help="XML document")
    strategy(sp)
    sp.add_argument("--format", choices=("csv", "sql"), default="csv")
    sp.add_argument("--out", required=True, help="output directory (or .sql file)")
    sp.add_argument("--emit-empty", action="store_true",
                    help="write header-only CSV files for tables with no rows")
    sp.set_defaults(func=cmd_shred)

    sp = sub.add_parser("generate", help="generate a synthetic document for a DTD")
    common(sp)
    sp.add_argument("--size", default="64k")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("bench", help="time shredding across document sizes")
    common(sp)
    strategy(sp, ("dtdmap", "shared", "both"))
    sp.add_argument("--sizes", default="1m,2m,4m,8m,16m")
    sp.add_argument("--reps", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--report", help="write the JSON report here")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ShredError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
