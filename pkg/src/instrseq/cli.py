"""Command-line front end.

Exit codes: 0 success, 1 bad input or configuration, 2 a checked property
does not hold, 3 a resource limit was hit.
"""

from __future__ import annotations

import argparse
import random
import sys
from concurrent.futures import ProcessPoolExecutor

from . import pga, projections, syntax, threads
from .errors import InstrSeqError, StateSpaceExceeded
from .projections import ProjectionConfig
from .syntax import Dialect

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_PROPERTY = 2
EXIT_RESOURCE = 3

DIALECTS = [d.value for d in Dialect]


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load(path: str, dialect: Dialect) -> syntax.SourceProgram:
    return syntax.parse_program(_read(path), dialect)


def _load_pga(path: str) -> pga.CanonicalProgram:
    return pga.canonicalize(pga.parse_term(_read(path)))


def _config(args) -> ProjectionConfig:
    return ProjectionConfig(args.maxr, args.maxn)


def _emit_thread(t: threads.Thread, fmt: str) -> str:
    return threads.to_dot(t) if fmt == "dot" else threads.to_json(t)


def _behaviour(path: str, dialect: Dialect, args, alt: bool) -> threads.Thread:
    if dialect is Dialect.PGA:
        return pga.extract_thread(_load_pga(path))
    prog = _load(path, dialect)
    if dialect is Dialect.PGLD:
        return projections.pgld_behaviour(prog)
    cfg = _config(args)
    if alt:
        return projections.pglddii_behaviour_alt(prog, cfg, args.literal)
    return projections.pglddii_behaviour(prog, cfg)


# -- subcommands -------------------------------------------------------------------------

def cmd_parse(args) -> int:
    dialect = Dialect(args.dialect)
    if dialect is Dialect.PGA:
        print(_load_pga(args.file))
    else:
        print(syntax.render_program(_load(args.file, dialect)))
    return EXIT_OK


def cmd_project(args) -> int:
    source, target = Dialect(args.source), Dialect(args.target)
    if (source, target) == (Dialect.PGLD, Dialect.PGA):
        print(pga.render_term(projections.pgld_to_pga(_load(args.file, source))))
        return EXIT_OK
    if (source, target) != (Dialect.PGLDDII, Dialect.PGLD):
        raise InstrSeqError(f"no projection from {source.value} to {target.value}")
    prog = _load(args.file, source)
    if args.alt:
        out = projections.pglddii_to_pgld_alt(prog, _config(args), args.literal)
    else:
        out = projections.pglddii_to_pgld(prog)
    print(syntax.render_program(out))
    return EXIT_OK


def cmd_extract(args) -> int:
    t = _behaviour(args.file, Dialect(args.dialect), args, alt=False)
    print(_emit_thread(t, args.format))
    return EXIT_OK


def cmd_behaviour(args) -> int:
    t = _behaviour(args.file, Dialect.PGLDDII, args, alt=args.alt)
    print(_emit_thread(t, args.format))
    return EXIT_OK


def cmd_equiv(args) -> int:
    dialect_a = Dialect(args.dialect)
    dialect_b = Dialect(args.dialect_b) if args.dialect_b else dialect_a
    a = _behaviour(args.file_a, dialect_a, args, alt=args.alt_a)
    b = _behaviour(args.file_b, dialect_b, args, alt=args.alt_b)
    path = threads.distinguishing_path(a, b)
    if path is None:
        print("BISIMILAR")
        return EXIT_OK
    print("NOT BISIMILAR")
    steps = " ".join(f"{act}{'+' if ok else '-'}" for act, ok in path)
    print(f"path: {steps or '(root)'}")
    return EXIT_PROPERTY


def _check_one(job):
    label, text, maxr, maxn, literal = job
    prog = syntax.parse_program(text, Dialect.PGLDDII)
    return label, text, projections.behaviours_coincide(prog, ProjectionConfig(maxr, maxn), literal)


def cmd_check_theorem(args) -> int:
    cfg = _config(args)
    jobs = []
    for path in args.files:
        text = syntax.render_program(_load(path, Dialect.PGLDDII))
        jobs.append((path, text, cfg.maxr, cfg.maxn, args.literal))
    rng = random.Random(args.seed)
    for i in range(args.count):
        prog = projections.random_pglddii_program(rng, cfg)
        jobs.append((f"random-{i}", syntax.render_program(prog, " ; "), cfg.maxr, cfg.maxn, args.literal))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_check_one, jobs, chunksize=8))
    else:
        results = [_check_one(job) for job in jobs]
    failed = 0
    for label, text, ok in results:
        print(f"{'PASS' if ok else 'FAIL'} {label}")
        if not ok:
            failed += 1
            print(text)
    print(f"{len(results) - failed} passed, {failed} failed")
    return EXIT_PROPERTY if failed else EXIT_OK


def cmd_stats(args) -> int:
    print(projections.expansion_size(args.maxr, args.maxn))
    return EXIT_OK


def cmd_fixtures(args) -> int:
    dii, expanded = projections.password_examples(args.n)
    print(syntax.render_program(expanded if args.expanded else dii))
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------------------

def _registers(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--maxr", type=int, required=required, default=None if required else 1)
    p.add_argument("--maxn", type=int, required=required, default=None if required else 1)


def _literal(p: argparse.ArgumentParser) -> None:
    p.add_argument("--literal", action="store_true",
                   help="expand without trailers after tests that precede a proto-instruction")


class _Parser(argparse.ArgumentParser):
    """Usage errors are bad input, so they share the domain-error exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DOMAIN, f"error: usage: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="instrseq", description="Instruction sequence toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and re-render a program")
    p.add_argument("--dialect", choices=DIALECTS, required=True)
    p.add_argument("file")
    p.set_defaults(run=cmd_parse)

    p = sub.add_parser("project", help="translate a program to a lower notation")
    p.add_argument("--from", dest="source", choices=DIALECTS, default="pglddii")
    p.add_argument("--to", dest="target", choices=DIALECTS, default="pgld")
    p.add_argument("--alt", action="store_true", help="expand proto-instructions in place")
    _literal(p)
    _registers(p, required=False)
    p.add_argument("file")
    p.set_defaults(run=cmd_project)

    p = sub.add_parser("extract", help="extract the thread of a PGA or PGLD program")
    p.add_argument("--dialect", choices=["pga", "pgld"], required=True)
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.add_argument("file")
    p.set_defaults(run=cmd_extract)

    p = sub.add_parser("behaviour", help="behaviour of a PGLDdii program")
    _registers(p)
    p.add_argument("--alt", action="store_true", help="use the register-file expansion")
    _literal(p)
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.add_argument("file")
    p.set_defaults(run=cmd_behaviour)

    p = sub.add_parser("equiv", help="decide bisimilarity of two behaviours")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--dialect", choices=DIALECTS, required=True)
    p.add_argument("--dialect-b", choices=DIALECTS, help="dialect of FILE_B if different")
    _registers(p, required=False)
    p.add_argument("--alt-a", action="store_true")
    p.add_argument("--alt-b", action="store_true")
    _literal(p)
    p.set_defaults(run=cmd_equiv)

    p = sub.add_parser("check-theorem", help="compare both PGLDdii behaviours on a corpus")
    _registers(p)
    p.add_argument("--count", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    _literal(p)
    p.add_argument("files", nargs="*")
    p.set_defaults(run=cmd_check_theorem)

    p = sub.add_parser("stats", help="size of the block replacing one proto-instruction")
    _registers(p)
    p.set_defaults(run=cmd_stats)

    p = sub.add_parser("fixtures", help="emit example programs")
    fx = p.add_subparsers(dest="fixture", required=True)
    pw = fx.add_parser("password", help="password checker reading N bits")
    pw.add_argument("--n", type=int, required=True)
    pw.add_argument("--expanded", action="store_true", help="emit the hand-expanded PGLD program")
    pw.set_defaults(run=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except StateSpaceExceeded as exc:
        print(f"error: resource: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InstrSeqError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
