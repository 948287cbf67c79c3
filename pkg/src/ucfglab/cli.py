"""Command-line front end.  Every command prints one JSON report on stdout.

Exit codes: 0 definitive answer, 2 bounded or unknown answer, 1 error,
64 usage error.
"""

from __future__ import annotations

import argparse
import decimal
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .convrec import AllZeroUpTo, emit_reals_sentence, parse_system, zeroness_falsify
from .counting import (
    DEFAULT_BOUND,
    counts_from_system,
    ucfg_universal,
    ufa_universal,
    universality_difference_system,
)
from .lang.automaton import FiniteAutomaton, parse_automaton, serialize_automaton
from .lang.enumerate import enumerate_words
from .lang.grammar import Grammar, parse_grammar, serialize_grammar
from .lang.parsing import Ambiguous, check_unambiguous_up_to
from .lang.regex import Regex, format_regex, parse_regex, regex_to_nfa, serialize_regex
from .measure import (
    automaton_measure,
    compare_measure,
    decide_on_enclosure,
    measure_regex,
    measure_regex_compositional,
    measure_ucfg_enclosure,
    normalize_cmp,
)
from .reductions import Included, IncludedUpTo, include_nfa_ucfg, include_nfa_ufa
from .sqrtsum import (
    SqrtSumInstance,
    build_sqrtsum_grammar,
    letter_names,
    normalize_instance,
    regex_from_task,
    regex_size_audit,
    repr_task,
    verify_instance,
)

EXIT_OK, EXIT_ERROR, EXIT_BOUNDED, EXIT_USAGE = 0, 1, 2, 64
DEFAULT_WIDTH = Fraction(1, 2**40)


class UsageError(Exception):
    pass


class InputFileError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- rendering ---------------------------------------------------------------------


def rational(q) -> dict:
    q = Fraction(q)
    with decimal.localcontext() as ctx:
        ctx.prec = 40
        dec = decimal.Decimal(q.numerator) / decimal.Decimal(q.denominator)
    return {"value": f"{q.numerator}/{q.denominator}", "decimal": str(dec)}


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational p/q: {text!r}") from None


def word_text(w) -> str | None:
    return None if w is None else " ".join(w)


def enclosure_json(enc) -> dict | None:
    if enc is None:
        return None
    return {
        "lo": rational(enc.lo),
        "hi": rational(enc.hi),
        "width": rational(enc.width),
        "terms": enc.terms_used,
    }


def jsonable(x):
    if isinstance(x, Fraction):
        return rational(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "lo") and hasattr(x, "hi"):
        return enclosure_json(x)
    return x


# -- inputs ----------------------------------------------------------------------------


class Inputs:
    def __init__(self):
        self.seen: list[dict] = []

    def read(self, path: str) -> str:
        p = Path(path)
        try:
            data = p.read_bytes()
        except OSError as exc:
            raise InputFileError(f"cannot read {path}: {exc.strerror}") from None
        self.seen.append({"path": str(p), "sha256": hashlib.sha256(data).hexdigest()})
        return data.decode("utf-8")

    def grammar(self, path: str) -> Grammar:
        return parse_grammar(self.read(path))

    def automaton(self, path: str) -> FiniteAutomaton:
        return parse_automaton(self.read(path))

    def any(self, path: str):
        kind = Path(path).suffix.lower()
        if kind == ".gnf":
            return self.grammar(path)
        if kind == ".aut":
            return self.automaton(path)
        if kind == ".rx":
            return parse_regex(self.read(path))
        raise UsageError(f"{path}: expected a .gnf, .aut or .rx file")


def write_text(path: str | Path, text: str) -> None:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True)
    p.write_text(text, encoding="utf-8")


# -- commands ------------------------------------------------------------------------
# each returns (exit code, result payload)


def cmd_parse(args, io: Inputs):
    g = io.grammar(args.grammar)
    out = {
        "alphabet": list(g.alphabet),
        "nonterminals": len(g.nonterminals),
        "productions": len(g.productions),
        "start": g.start,
        "text": serialize_grammar(g),
    }
    if args.check_unambiguous_up_to is None:
        return EXIT_OK, out
    lint = check_unambiguous_up_to(g, args.check_unambiguous_up_to)
    if isinstance(lint, Ambiguous):
        out["lint"] = {"verdict": "Ambiguous", "word": word_text(lint.word), "derivations": lint.derivations}
        return EXIT_OK, out
    out["lint"] = {"verdict": "OkUpTo", "bound": lint.bound}
    return EXIT_BOUNDED, out


def cmd_count(args, io: Inputs):
    g = io.grammar(args.grammar)
    return EXIT_OK, {"upto": args.upto, "counts": counts_from_system(g, args.upto)}


def universality_json(v) -> dict:
    return {
        "verdict": v.kind,
        "bound": v.bound,
        "witness_length": v.witness_length,
        "witness": word_text(v.witness_word),
    }


def cmd_universal(args, io: Inputs):
    g = io.grammar(args.grammar)
    v = ucfg_universal(g, args.bound, emit_sentence=bool(args.emit_reals))
    if args.emit_reals:
        write_text(args.emit_reals, v.sentence)
    return (EXIT_OK if v.definitive else EXIT_BOUNDED), universality_json(v)


def cmd_universal_ufa(args, io: Inputs):
    v = ufa_universal(io.automaton(args.aut))
    return EXIT_OK, universality_json(v)


def cmd_zeroness(args, io: Inputs):
    s = parse_system(io.read(args.system))
    z = zeroness_falsify(s, args.bound)
    if args.emit_reals:
        write_text(args.emit_reals, emit_reals_sentence(s))
    if isinstance(z, AllZeroUpTo):
        return EXIT_BOUNDED, {"verdict": "AllZeroUpTo", "bound": z.bound}
    return EXIT_OK, {"verdict": "NonZero", "n": z.n, "value": rational(z.value)}


def _dump(obj) -> tuple[str, str]:
    if isinstance(obj, FiniteAutomaton):
        return ".aut", serialize_automaton(obj)
    return ".gnf", serialize_grammar(obj)


def cmd_include(args, io: Inputs):
    a = io.automaton(args.lhs)
    rhs = io.any(args.rhs)
    if isinstance(rhs, FiniteAutomaton):
        run = include_nfa_ufa(a, rhs)
    elif isinstance(rhs, Grammar):
        run = include_nfa_ucfg(a, rhs, args.bound, emit_sentence=bool(args.emit_reals))
    else:
        raise UsageError("the right-hand side must be a .aut or .gnf file")
    v = run.verdict
    out: dict = {"universality": universality_json(run.universality)}
    if isinstance(v, Included):
        out["verdict"] = "Included"
    elif isinstance(v, IncludedUpTo):
        out.update(verdict="IncludedUpTo", bound=v.bound)
    else:
        out.update(verdict="NotIncluded", witness=word_text(v.word), witness_length=v.length)
    if args.emit_reals:
        sentence = getattr(v, "sentence", None) or run.universality.sentence
        if sentence is None:
            sentence = emit_reals_sentence(universality_difference_system(run.artifacts["union"]))
        write_text(args.emit_reals, sentence)
    if args.dump_dir:
        files = {}
        for name, obj in run.artifacts.items():
            ext, text = _dump(obj)
            path = Path(args.dump_dir) / f"{name}{ext}"
            write_text(path, text)
            files[name] = str(path)
        out["artifacts"] = files
    return (EXIT_BOUNDED if isinstance(v, IncludedUpTo) else EXIT_OK), out


def cmd_measure(args, io: Inputs):
    obj = io.any(args.input)
    if (args.cmp is None) != (args.threshold is None):
        raise UsageError("--cmp and --threshold go together")
    op = normalize_cmp(args.cmp) if args.cmp else None
    if isinstance(obj, Grammar):
        if op is None:
            enc = measure_ucfg_enclosure(obj, args.width)
            return EXIT_OK, {"kind": "enclosure", "enclosure": enclosure_json(enc)}
        c = compare_measure(obj, op, args.threshold, args.width)
        out = {
            "kind": "comparison",
            "op": op,
            "threshold": rational(args.threshold),
            "result": c.result,
            "enclosure": enclosure_json(c.enclosure),
        }
        return (EXIT_OK if c.result is not None else EXIT_BOUNDED), out
    if isinstance(obj, Regex):
        value = measure_regex_compositional(obj)
        out = {"kind": "exact", "path": "compositional", "measure": rational(value)}
        check = measure_regex(obj)
        if check != value:
            raise RuntimeError(f"measure paths disagree: {value} vs {check}")
    else:
        res = automaton_measure(obj)
        if res.value is None:
            out = {"kind": "enclosure", "path": res.path, "enclosure": enclosure_json(res.enclosure)}
            if op is None:
                return EXIT_OK, out
            enc = res.enclosure
            verdict = decide_on_enclosure(enc.lo, enc.hi, op, args.threshold)
            out.update(op=op, threshold=rational(args.threshold), result=verdict)
            return (EXIT_OK if verdict is not None else EXIT_BOUNDED), out
        value = res.value
        out = {"kind": "exact", "path": res.path, "measure": rational(value)}
    if op is not None:
        out.update(op=op, threshold=rational(args.threshold))
        out["result"] = decide_on_enclosure(value, value, op, args.threshold)
    return EXIT_OK, out


def cmd_gen_repr(args, io: Inputs):
    task = repr_task(args.n, args.m, args.c, args.mode)
    e = regex_from_task(task)
    r = Regex(letter_names(args.n), e)
    if args.out:
        write_text(args.out, serialize_regex(r))
    audit = regex_size_audit(e, task)
    out = {
        "n": args.n,
        "m": args.m,
        "c": rational(args.c),
        "kind": task.kind,
        "k": task.k,
        "c_k": task.c_k,
        "digits": list(task.digits),
        "preperiod": task.j1,
        "period": list(task.period),
        "gamma": task.gamma,
        "regex": format_regex(e),
        "measure": rational(measure_regex_compositional(r, check=False)),
        "audit": {
            "nodes": audit.nodes,
            "bound_expression": audit.bound_expression,
            "size_ok": audit.size_ok,
            "k_bound": audit.k_bound,
            "k_ok": audit.k_ok,
        },
        "automaton_states": len(regex_to_nfa(r).states),
    }
    if args.out:
        out["output"] = args.out
    return EXIT_OK, out


def cmd_gen_sqrtsum(args, io: Inputs):
    try:
        ds = tuple(int(v) for v in args.ds.split(","))
    except ValueError:
        raise UsageError(f"--ds expects comma-separated naturals, got {args.ds!r}") from None
    inst = SqrtSumInstance(args.d0, ds, args.cmp)
    ni = normalize_instance(inst)
    con = build_sqrtsum_grammar(ni)
    write_text(args.out, serialize_grammar(con.grammar))
    out: dict = {
        "instance": {"d0": inst.d0, "ds": list(inst.ds), "cmp": inst.cmp},
        "normalized": {
            "d0": ni.instance.d0,
            "ds": list(ni.instance.ds),
            "n": ni.instance.n,
            "d": ni.d,
            "h": ni.h,
        },
        "eps": rational(con.eps),
        "grammar": {
            "output": args.out,
            "nonterminals": len(con.grammar.nonterminals),
            "productions": len(con.grammar.productions),
        },
        "parts": [],
    }
    for i, (c, task, e) in enumerate(zip(con.cs, con.tasks, con.regexes), 1):
        audit = regex_size_audit(e, task)
        part = {
            "index": i,
            "c": rational(c),
            "kind": task.kind,
            "k": task.k,
            "nodes": audit.nodes,
            "size_ok": audit.size_ok,
            "k_ok": audit.k_ok,
        }
        if args.regex_dir:
            path = Path(args.regex_dir) / f"C{i}.rx"
            write_text(path, serialize_regex(Regex(con.alphabet, e)))
            part["regex_file"] = str(path)
        out["parts"].append(part)
    code = EXIT_OK
    if not args.no_verify:
        rep = verify_instance(con, args.width)
        out["verification"] = jsonable(
            {k: v for k, v in rep.items() if k not in ("parts", "n", "d", "h", "eps")}
        )
        for part, checked in zip(out["parts"], rep["parts"]):
            part["measure"] = rational(checked["measure"])
            part["exact"] = checked["exact"]
        out["verdict"] = rep["verdict"]
        code = EXIT_OK if rep["verdict"] is not None else EXIT_BOUNDED
    if args.report:
        write_text(args.report, json.dumps(out, indent=2) + "\n")
    return code, out


def cmd_oracle(args, io: Inputs):
    obj = io.any(args.input)
    words = enumerate_words(obj, args.upto)
    return EXIT_OK, {
        "upto": args.upto,
        "counts": [len(ws) for ws in words],
        "words": [[word_text(w) for w in ws] for ws in words],
    }


# -- argument parsing -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ucfglab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--quiet", action="store_true", help="suppress the JSON report")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("parse", help="parse a grammar, optionally lint it for ambiguity")
    s.add_argument("--grammar", required=True)
    s.add_argument("--check-unambiguous-up-to", type=int, metavar="L")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("count", help="f_S(0..N) from the counting recurrence")
    s.add_argument("--grammar", required=True)
    s.add_argument("--upto", type=int, required=True)
    s.set_defaults(func=cmd_count)

    s = sub.add_parser("universal", help="universality of an unambiguous grammar")
    s.add_argument("--grammar", required=True)
    s.add_argument("--bound", type=int, default=DEFAULT_BOUND)
    s.add_argument("--emit-reals", metavar="OUT")
    s.set_defaults(func=cmd_universal)

    s = sub.add_parser("universal-ufa", help="universality of an unambiguous automaton")
    s.add_argument("--aut", required=True)
    s.set_defaults(func=cmd_universal_ufa)

    s = sub.add_parser("include", help="inclusion of an automaton in an automaton or grammar")
    s.add_argument("--lhs", required=True)
    s.add_argument("--rhs", required=True)
    s.add_argument("--bound", type=int, default=DEFAULT_BOUND)
    s.add_argument("--dump-dir", metavar="D")
    s.add_argument("--emit-reals", metavar="OUT")
    s.set_defaults(func=cmd_include)

    s = sub.add_parser("measure", help="coin-flip measure of an automaton, grammar or regex")
    s.add_argument("--input", required=True)
    s.add_argument("--width", type=parse_rational, default=DEFAULT_WIDTH)
    s.add_argument("--cmp", choices=["<=", "<", ">=", ">", "le", "lt", "ge", "gt"])
    s.add_argument("--threshold", type=parse_rational)
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("gen-sqrtsum", help="grammar and threshold for a square-root-sum instance")
    s.add_argument("--d0", type=int, required=True)
    s.add_argument("--ds", required=True, help="comma-separated d_1..d_n")
    s.add_argument("--cmp", default="<=", choices=["<=", "<", ">=", ">", "le", "lt", "ge", "gt"])
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.add_argument("--regex-dir", metavar="D", help="also write each C_i as D/C<i>.rx")
    s.add_argument("--width", type=parse_rational, default=DEFAULT_WIDTH)
    s.add_argument("--no-verify", action="store_true")
    s.set_defaults(func=cmd_gen_sqrtsum)

    s = sub.add_parser("gen-repr", help="unambiguous regex of a prescribed measure")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--c", type=parse_rational, required=True)
    s.add_argument("--mode", default="auto", choices=["auto", "finite", "periodic"])
    s.add_argument("--out")
    s.set_defaults(func=cmd_gen_repr)

    s = sub.add_parser("oracle", help="enumerate the language up to a length")
    s.add_argument("--input", required=True)
    s.add_argument("--upto", type=int, required=True)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("zeroness", help="prefix zeroness test of a conv-rec system (.crs)")
    s.add_argument("--system", required=True)
    s.add_argument("--bound", type=int, default=DEFAULT_BOUND)
    s.add_argument("--emit-reals", metavar="OUT")
    s.set_defaults(func=cmd_zeroness)
    return p


def error_code(exc: BaseException) -> str:
    module = type(exc).__module__.removeprefix("ucfglab.")
    return f"{module}.{type(exc).__name__}"


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    io = Inputs()
    report: dict = {"schema": 1, "command": args.command, "argv": argv}
    start = time.perf_counter()
    try:
        code, result = args.func(args, io)
        report["result"] = result
    except UsageError as exc:
        code = EXIT_USAGE
        report["error"] = {"code": "usage", "message": str(exc)}
    except InputFileError as exc:
        code = EXIT_ERROR
        report["error"] = {"code": "io", "message": str(exc)}
    except Exception as exc:  # reported, never swallowed silently
        code = EXIT_ERROR
        report["error"] = {"code": error_code(exc), "message": str(exc)}
    report["inputs"] = io.seen
    report["exit_code"] = code
    report["seconds"] = round(time.perf_counter() - start, 6)
    if "error" in report:
        print(f"ucfglab {args.command}: {report['error']['message']}", file=sys.stderr)
    if not args.quiet:
        print(json.dumps(report, indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
