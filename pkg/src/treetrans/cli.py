"""Command-line front end.

Exit status: 0 on success, 1 for a counterexample or a failed transduction,
2 for usage and parse errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from . import examples
from .bta import IncompleteAutomatonError
from .dot import RunTrace, export_dot
from .fuzz import KINDS, fuzz
from .mtt import MacroTT, eliminate_lookahead, mtt_unary_to_tdtts, run_bottomup as mtt_run_bottomup, tdtts_to_mtt_unary
from .pipeline import PipelineError, check_equiv, from_stages, run_pipeline, stage
from .rules import UNDEFINED, IllFormedError, TransductionError
from .sharing import dedup, growth_report, quadratic_input, run_shared
from .sst import tdtts_unary_to_sst
from .syntax import format_definition, parse_definition
from .tdtt import TopDownTT, run_bottomup, to_register_machine
from .terms import Context, TermError, Tree, format_dag, format_term, parse_term

ADAPTERS = ("encode", "decode", "yield")
OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def load(spec: str):
    """A definition from a file, ``-`` (stdin), or ``builtin:NAME``."""
    if spec == "-":
        return parse_definition(sys.stdin.read())
    if spec.startswith("builtin:"):
        name = spec[len("builtin:"):]
        try:
            return examples.builtin(name)
        except KeyError as e:
            raise UsageError(e.args[0]) from None
    if not os.path.exists(spec) and spec in examples.names():
        return examples.builtin(spec)
    try:
        with open(spec, encoding="utf-8") as f:
            return parse_definition(f.read())
    except OSError as e:
        raise UsageError(f"cannot read {spec}: {e.strerror}") from None


def load_pipeline(specs: Sequence[str]):
    items = [s if s in ADAPTERS else load(s) for s in specs]
    if len(items) == 1:
        return items[0], from_stages(items)
    return None, from_stages(items)


def _show(v) -> str:
    if v is UNDEFINED:
        return "undefined"
    if isinstance(v, Context):
        return format_term(v.body)
    if isinstance(v, Tree):
        return format_term(v)
    return v


def _read_input(args, pipe):
    if (args.input is None) == (args.string is None):
        raise UsageError("give exactly one of -i TERM or -s STRING")
    if args.string is not None:
        return args.string
    alphabet = pipe.in_alphabet if pipe.in_kind == "tree" else None
    return parse_term(args.input, alphabet)


def cmd_run(args, out) -> int:
    single, pipe = load_pipeline(args.transducer)
    x = _read_input(args, pipe)
    if isinstance(x, str) and pipe.in_kind == "tree" and pipe.in_alphabet is not None:
        pipe = from_stages(["encode"] + list(pipe.stages))
    if args.shared or args.bottom_up:
        if single is None:
            raise UsageError("--shared and --bottom-up take a single transducer")
        if isinstance(x, str):
            x = pipe.stages[0](x)
    if args.shared:
        if not isinstance(single, TopDownTT) or single.string_output:
            raise UsageError("--shared needs a tree-output top-down transducer")
        d = run_shared(single, x)
        out.write(format_dag(dedup(d) if args.dedup else d).rstrip("\n") + "\n")
        return OK
    if args.bottom_up:
        if isinstance(single, TopDownTT):
            res = run_bottomup(single, x)
            regs, result = res.registers, res.output
        elif isinstance(single, MacroTT):
            regs = mtt_run_bottomup(single, x)
            result = regs[single.initial]
        else:
            raise UsageError("--bottom-up needs a top-down or macro tree transducer")
        for q, v in regs.items():
            out.write(f"{q} = {_show(v)}\n")
        if result is UNDEFINED:
            raise TransductionError("undefined: the initial state has no value at the root")
        out.write(f"output = {_show(result)}\n")
        return OK
    out.write(_show(run_pipeline(pipe, x)) + "\n")
    return OK


CONVERSIONS = {
    "to_register_machine": (to_register_machine, TopDownTT),
    "eliminate_lookahead": (eliminate_lookahead, MacroTT),
    "tdtts_to_mtt": (tdtts_to_mtt_unary, TopDownTT),
    "mtt_to_tdtts": (mtt_unary_to_tdtts, MacroTT),
    "tdtts_to_sst": (tdtts_unary_to_sst, TopDownTT),
}


def cmd_convert(args, out) -> int:
    obj = load(args.transducer)
    fn, expected = CONVERSIONS[args.conversion]
    if not isinstance(obj, expected):
        raise UsageError(f"this conversion needs a {expected.__name__}, got {type(obj).__name__}")
    text = format_definition(fn(obj))
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        out.write(text)
    return OK


def cmd_check_equiv(args, out) -> int:
    left = from_stages([s if s in ADAPTERS else load(s) for s in args.left.split(",")])
    right = from_stages([s if s in ADAPTERS else load(s) for s in args.right.split(",")])
    verdict = check_equiv(left, right, args.max_size)
    out.write(("PASS " if verdict.passed else "FAIL ") + str(verdict) + "\n")
    return OK if verdict.passed else FAILED


def cmd_fuzz(args, out) -> int:
    start, count = (args.index, 1) if args.index is not None else (0, args.count)
    report = fuzz(args.kind, args.seed, count, args.max_size, args.random_inputs, args.random_size, start)
    out.write(report.text())
    return OK if report.passed else FAILED


STATS_EXAMPLES = {"quadratic": quadratic_input}


def cmd_stats(args, out) -> int:
    if args.n_from > args.n_to or args.n_from < 0:
        raise UsageError("need 0 <= --n-from <= --n-to")
    tt = examples.builtin(args.example)
    report = growth_report(tt, STATS_EXAMPLES[args.example], range(args.n_from, args.n_to + 1))
    text = report.to_csv()
    if args.csv and args.csv != "-":
        with open(args.csv, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        out.write(text)
    return OK


def cmd_dot(args, out) -> int:
    if args.transducer is None:
        if args.input is None:
            raise UsageError("dot needs -t FILE, -i TERM or both")
        out.write(export_dot(parse_term(args.input)))
        return OK
    obj = load(args.transducer)
    if args.lookahead:
        if getattr(obj, "lookahead", None) is None:
            raise UsageError("this transducer has no lookahead automaton")
        out.write(export_dot(obj.lookahead))
        return OK
    if args.input is None:
        raise UsageError("dot -t FILE needs -i TERM (or --lookahead)")
    t = parse_term(args.input, getattr(obj, "input", None))
    if args.trace:
        if not isinstance(obj, (TopDownTT, MacroTT)):
            raise UsageError("--trace needs a top-down or macro tree transducer")
        out.write(export_dot(RunTrace(obj, t)))
        return OK
    if args.shared:
        if not isinstance(obj, TopDownTT) or obj.string_output:
            raise UsageError("--shared needs a tree-output top-down transducer")
        d = run_shared(obj, t)
        out.write(export_dot(dedup(d) if args.dedup else d))
        return OK
    result = stage(obj)(t)
    if not isinstance(result, Tree):
        raise UsageError("only tree outputs can be drawn; this transducer produces strings")
    out.write(export_dot(result))
    return OK


def cmd_examples(args, out) -> int:
    if args.name is None:
        for name in examples.names():
            out.write(name + "\n")
        return OK
    obj = load("builtin:" + args.name)
    out.write(format_definition(obj))
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="treetrans",
        description="Run, convert and cross-check tree transducers.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="apply a transducer or a pipeline to one input")
    r.add_argument("-t", "--transducer", action="append", required=True, metavar="FILE",
                   help="definition file, '-' for stdin, builtin:NAME, or an adapter "
                        "(encode, decode, yield); repeat to build a pipeline")
    r.add_argument("-i", "--input", metavar="TERM", help="input tree")
    r.add_argument("-s", "--string", metavar="STRING", help="input string")
    r.add_argument("--shared", action="store_true", help="evaluate with sharing and print the term DAG")
    r.add_argument("--dedup", action="store_true", help="with --shared, merge identical sub-DAGs")
    r.add_argument("--bottom-up", action="store_true", help="bottom-up semantics; print every register at the root")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("convert", help="translate a definition into another model")
    c.add_argument("-t", "--transducer", required=True, metavar="FILE")
    c.add_argument("-o", "--output", metavar="OUT", help="write here instead of stdout")
    g = c.add_mutually_exclusive_group(required=True)
    for flag in CONVERSIONS:
        g.add_argument("--" + flag.replace("_", "-"), dest="conversion", action="store_const", const=flag)
    c.set_defaults(func=cmd_convert)

    e = sub.add_parser("check-equiv", help="compare two runnables on all small inputs")
    e.add_argument("left", help="definition or comma-separated pipeline")
    e.add_argument("right", help="definition or comma-separated pipeline")
    e.add_argument("--max-size", type=int, required=True, metavar="N",
                   help="maximum tree nodes (or string length) to enumerate")
    e.set_defaults(func=cmd_check_equiv)

    f = sub.add_parser("fuzz", help="differential testing on random models")
    f.add_argument("--kind", choices=KINDS, required=True)
    f.add_argument("--seed", type=int, required=True)
    f.add_argument("--count", type=int, default=10)
    f.add_argument("--max-size", type=int, default=6, metavar="N")
    f.add_argument("--random-inputs", type=int, default=0, metavar="K",
                   help="extra random input trees per model")
    f.add_argument("--random-size", type=int, default=30, metavar="N")
    f.add_argument("--index", type=int, metavar="I", help="replay only model I")
    f.set_defaults(func=cmd_fuzz)

    s = sub.add_parser("stats", help="output growth of the shared evaluation")
    s.add_argument("--example", choices=sorted(STATS_EXAMPLES), required=True)
    s.add_argument("--n-from", type=int, required=True, metavar="A")
    s.add_argument("--n-to", type=int, required=True, metavar="B")
    s.add_argument("--csv", metavar="OUT", default="-")
    s.set_defaults(func=cmd_stats)

    d = sub.add_parser("dot", help="Graphviz rendering")
    d.add_argument("-t", "--transducer", metavar="FILE")
    d.add_argument("-i", "--input", metavar="TERM")
    d.add_argument("--shared", action="store_true", help="draw the shared output DAG")
    d.add_argument("--dedup", action="store_true")
    d.add_argument("--trace", action="store_true", help="draw the bottom-up run on the input")
    d.add_argument("--lookahead", action="store_true", help="draw the lookahead automaton")
    d.set_defaults(func=cmd_dot)

    x = sub.add_parser("examples", help="list built-ins or print one")
    x.add_argument("name", nargs="?")
    x.set_defaults(func=cmd_examples)
    return p


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args, out)
    except TransductionError as e:
        print(f"error: {e}", file=sys.stderr)
        return FAILED
    except (UsageError, TermError, IllFormedError, PipelineError, IncompleteAutomatonError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
