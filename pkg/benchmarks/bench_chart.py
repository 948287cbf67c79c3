"""Compiled vs pure-Python derivation-count chart.

    python benchmarks/bench_chart.py [--repeat 3] [--max-len 9]

Both backends must return identical tables; the script stops otherwise.
"""

import argparse
import statistics
import time

from ucfglab import kernels
from ucfglab.lang.fixtures import dyck_grammar, marked_palindrome_grammar, universal_grammar
from ucfglab.lang.grammar import encode_short_gnf, trim_grammar
from ucfglab.lang.parsing import as_short_gnf
from ucfglab.sqrtsum import generate


def cases(max_len):
    yield "universal3", universal_grammar(("a", "b", "c")), min(max_len, 8)
    yield "dyck", dyck_grammar(), max_len + 3
    yield "palindrome", marked_palindrome_grammar(), max_len
    yield "sqrtsum(9;16,9,4)", generate(9, (16, 9, 4)).grammar, min(max_len, 8)


def timed(fn, args, repeat):
    runs, out = [], None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        runs.append(time.perf_counter() - t)
    return statistics.median(runs), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--max-len", type=int, default=9)
    args = ap.parse_args()
    if kernels.compiled_start_counts is None:
        raise SystemExit("compiled chart not built; run `pip install -e . --no-build-isolation` first")
    print(f"{'grammar':<20}{'len':>4}{'nts':>6}{'python s':>12}{'cython s':>12}{'speedup':>9}")
    for name, g, length in cases(args.max_len):
        sg = trim_grammar(as_short_gnf(g))
        t = encode_short_gnf(sg)
        call = (len(sg.nonterminals), sg.n_letters, t.prods, t.eps, t.nt_index[sg.start], length)
        tp, rp = timed(kernels.python_start_counts, call, args.repeat)
        tc, rc = timed(kernels.compiled_start_counts, call, args.repeat)
        if rp != rc:
            raise SystemExit(f"backends disagree on {name}")
        print(f"{name:<20}{length:>4}{len(sg.nonterminals):>6}{tp:>12.4f}{tc:>12.4f}{tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
