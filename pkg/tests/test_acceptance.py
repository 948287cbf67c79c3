"""Acceptance criteria 1-12, one PASS/FAIL line each.

    pytest tests/test_acceptance.py -v      # lines appear between the test results
    python3 tests/test_acceptance.py        # lines only
"""

import itertools
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import language, random_nfa, random_ufa, words_upto  # noqa: E402

from ucfglab.convrec import (  # noqa: E402
    AllZeroUpTo,
    ConvPolynomial,
    ConvRecSystem,
    NonZero,
    emit_reals_sentence,
    eval_prefix,
    gf_system,
    growth_ratio,
    iter_component,
    make_system,
    zeroness_falsify,
)
from ucfglab.counting import (  # noqa: E402
    counts_from_system,
    ucfg_universal,
    universality_difference_system,
)
from ucfglab.lang.automaton import (  # noqa: E402
    ambiguity_witness,
    is_deterministic,
    is_unambiguous,
)
from ucfglab.lang.enumerate import enumerate_words  # noqa: E402
from ucfglab.lang.fixtures import (  # noqa: E402
    a_only_grammar,
    a_star_dfa,
    exponential_x,
    grammar_fixtures,
    universal_grammar,
    y2_chain_grammar,
)
from ucfglab.lang.parsing import (  # noqa: E402
    OkUpTo,
    check_unambiguous_up_to,
    count_derivations,
    derivation_counts_by_length,
)
from ucfglab.lang.regex import (  # noqa: E402
    EPS,
    Letter,
    Regex,
    RegexShapeError,
    concat,
    letters_used,
    parse_regex,
    regex_to_nfa,
    star,
    union,
)
from ucfglab.measure import (  # noqa: E402
    equation_enclosure,
    measure_automaton_exact,
    measure_regex,
    measure_regex_compositional,
    measure_sigma_upto,
    measure_sigma_upto_closed,
    measure_ucfg_enclosure,
)
from ucfglab.reductions import (  # noqa: E402
    IncludedUpTo,
    NotIncluded,
    include_nfa_ucfg,
    include_nfa_ufa,
    lhs_determinize,
    lift_automaton,
    lift_grammar,
    right_linear_grammar,
)
from ucfglab.sqrtsum import (  # noqa: E402
    generate,
    is_admissible,
    letter_names,
    regex_size_audit,
    repr_regex,
    repr_task,
    sigma_upto,
    verify_instance,
)

CRITERIA = {}


def criterion(number, title, limit):
    def register(fn):
        CRITERIA[number] = (title, limit, fn)
        return fn

    return register


class Failed(AssertionError):
    pass


def check(cond, message):
    if not cond:
        raise Failed(message)


# -- 1 ---------------------------------------------------------------------------------


def _binary_trees(size, memo={0: 1}):
    # plain recursion on root splits, memoised
    if size not in memo:
        memo[size] = sum(_binary_trees(i) * _binary_trees(size - 1 - i) for i in range(size))
    return memo[size]


def _fib_pair(n):
    f, g = 1, 0
    for _ in range(n):
        f, g = f + g, f
    return f


@criterion(1, "conv-rec engine: Catalan and Fibonacci prefixes", 1)
def c1():
    cat = make_system(["c"], {"c": {("c", "c"): 1}}, {"c": 1})
    got = [int(v) for v in itertools.islice(iter_component(cat), 11)]
    check(got[:7] == [1, 1, 2, 5, 14, 42, 132], f"Catalan prefix {got[:7]}")
    check(got == [_binary_trees(s) for s in range(11)], "Catalan differs from tree counter")
    fib = make_system(["f", "g"], {"f": {("f",): 1, ("g",): 1}, "g": {("f",): 1}}, {"f": 1})
    got = [int(v) for v in itertools.islice(iter_component(fib), 31)]
    check(got == [_fib_pair(n) for n in range(31)], "Fibonacci pair differs")
    return "sizes 0-10 and n <= 30 exact"


# -- 2 ---------------------------------------------------------------------------------


@criterion(2, "growth of Fuss-Catalan ratios at n = 1000", 30)
def c2():
    out = []
    for d in (2, 3):
        s = make_system(["f"], {"f": {("f",) * d: 1}}, {"f": 1})
        ratio = growth_ratio(s, 1001)[1000]
        limit = Fraction(d**d, (d - 1) ** (d - 1))
        rel = abs(ratio - limit) / limit
        check(rel < Fraction(1, 100), f"d={d}: ratio {float(ratio):.5f} vs {limit}")
        out.append(f"d={d}: {float(ratio):.4f} vs {limit} ({float(rel) * 100:.2f}%)")
    return "; ".join(out)


# -- 3 ---------------------------------------------------------------------------------


def _random_system(rng):
    k = rng.randint(1, 3)
    polys = []
    for _ in range(k):
        terms = {}
        for _ in range(rng.randint(0, 3)):
            deg = rng.randint(1, 3)
            e = [0] * k
            for _ in range(deg):
                e[rng.randrange(k)] += 1
            terms[tuple(e)] = terms.get(tuple(e), 0) + rng.choice([-2, -1, 1, 1, 2, 3])
        polys.append(ConvPolynomial.from_dict(k, terms))
    init = [Fraction(rng.randint(-2, 3), rng.choice([1, 1, 2, 3])) for _ in range(k)]
    return ConvRecSystem(tuple(f"v{i}" for i in range(k)), tuple(polys), tuple(init))


@criterion(3, "generating-function iteration reproduces the prefix", 30)
def c3():
    rng = random.Random(3)
    for trial in range(50):
        s = _random_system(rng)
        series = gf_system(s).iterate_series(20)
        table = eval_prefix(s, 20)
        for i in range(s.k):
            check(series[i] == list(table[i]), f"system {trial} component {i} differs")
    return "50 systems, coefficients 0..20 exact"


# -- 4 ---------------------------------------------------------------------------------


@criterion(4, "counting recurrence equals enumeration on every fixture", 60)
def c4():
    for name, (g, unambiguous) in grammar_fixtures().items():
        if unambiguous:
            words = [len(ws) for ws in enumerate_words(g, 10)]
            check(counts_from_system(g, 10) == words, f"{name}: word counts differ")
            # independent spot check with the per-word parser
            small = [sum(1 for w in words_upto(g.alphabet, m) if len(w) == m and count_derivations(g, w)) for m in range(6)]
            check(words[:6] == small, f"{name}: enumeration differs from per-word parsing")
        trees = [sum(row) for row in derivation_counts_by_length(g, 8)]
        check(counts_from_system(g, 8) == trees, f"{name}: derivation counts differ")
    return f"{len(grammar_fixtures())} fixtures"


# -- 5 ---------------------------------------------------------------------------------


@criterion(5, "universality verdicts", 5)
def c5():
    g = universal_grammar()
    v = ucfg_universal(g, 200)
    check(v.kind == "UniversalUpTo" and v.bound == 200, f"universal grammar gave {v}")
    counts = counts_from_system(g, 200)
    check(counts == [2**n for n in range(201)], "f_S(n) != 2^n")
    v = ucfg_universal(a_only_grammar(), 200)
    check(v.kind == "NotUniversal" and v.witness_word == ("b",), f"a-only gave {v}")
    v = ucfg_universal(y2_chain_grammar(), 200)
    check(v.witness_length == 4, f"{{eps,a,a^2,a^3}} gave {v}")
    return "UniversalUpTo(200); witness 'b'; witness_length 4"


# -- 6 ---------------------------------------------------------------------------------


@criterion(6, "NFA in unambiguous automaton: 300 random pairs", 60)
def c6():
    rng = random.Random(6)
    agree = 0
    for _ in range(300):
        a = random_nfa(rng, ("a", "b"), 4)
        b = random_ufa(rng, ("a", "b"), 4)
        verdict = include_nfa_ufa(a, b).verdict
        brute = language(a, 8) <= language(b, 8)
        if brute == (not isinstance(verdict, NotIncluded)):
            agree += 1
    check(agree == 300, f"{agree}/300 agree")
    return "300/300 agree"


# -- 7 ---------------------------------------------------------------------------------


@criterion(7, "determinise and lift: 200 random instances", 60)
def c7():
    rng = random.Random(7)
    L = 5
    for trial in range(200):
        a = random_nfa(rng, ("a", "b"), 3)
        b = random_ufa(rng, ("a", "b"), 3)
        a2, hmap = lhs_determinize(a)
        b2 = lift_automaton(b, hmap)
        check(is_deterministic(a2), f"instance {trial}: a' not deterministic")
        words2 = [w for ws in enumerate_words(a2, L) for w in ws]
        check({hmap.project(w) for w in words2} == language(a, L), f"instance {trial}: h(L(a')) != L(a)")
        check(all(b2.accepts(w) == b.accepts(hmap.project(w)) for w in words2), f"instance {trial}: lift")
        inc = language(a, L) <= language(b, L)
        inc2 = all(b2.accepts(w) for w in words2)
        check(inc == inc2, f"instance {trial}: inclusion not preserved")
        check(is_unambiguous(b2), f"instance {trial}: lifted automaton ambiguous")
        g, _ = right_linear_grammar(b)
        check(check_unambiguous_up_to(g, 6) == OkUpTo(6), f"instance {trial}: grammar lint")
        g2 = lift_grammar(g, hmap)
        lint_len = 3 if len(hmap.new_alphabet) > 12 else 4
        check(check_unambiguous_up_to(g2, lint_len) == OkUpTo(lint_len), f"instance {trial}: lifted grammar lint")
    return "200 instances"


# -- 8 ---------------------------------------------------------------------------------


@criterion(8, "NFA in grammar: 100 random pairs, bound 64", 120)
def c8():
    rng = random.Random(8)
    fixtures = [(n, g) for n, (g, u) in sorted(grammar_fixtures().items()) if u]
    confirmed = upto = 0
    for trial in range(100):
        name, g = fixtures[trial % len(fixtures)]
        a = random_nfa(rng, g.alphabet, 3)
        verdict = include_nfa_ucfg(a, g, N=64).verdict
        if isinstance(verdict, NotIncluded):
            w = verdict.word
            check(w is not None and a.accepts(w) and count_derivations(g, w) == 0, f"pair {trial} ({name}): bad witness {w}")
            confirmed += 1
        else:
            check(isinstance(verdict, IncludedUpTo), f"pair {trial}: {verdict}")
            extra = language(a, 8) - language(g, 8)
            check(not extra, f"pair {trial} ({name}): IncludedUpTo but {min(extra, default=None)} missing")
            upto += 1
    return f"{confirmed} NotIncluded confirmed, {upto} IncludedUpTo consistent"


# -- 9 ---------------------------------------------------------------------------------


def _random_regex(rng, letters, depth=3):
    if depth == 0 or rng.random() < 0.3:
        return rng.choice([Letter(x) for x in letters] + [EPS])
    kind = rng.choice(["union", "concat", "star"])
    if kind == "star":
        return star(_random_regex(rng, letters, depth - 1))
    parts = [_random_regex(rng, letters, depth - 1) for _ in range(2)]
    return union(*parts) if kind == "union" else concat(*parts)


def _unambiguous(r):
    try:
        return ambiguity_witness(regex_to_nfa(r)) is None
    except RegexShapeError:
        return False


@criterion(9, "coin-flip measures", 60)
def c9():
    check(measure_automaton_exact(a_star_dfa()) == Fraction(1, 2), "a* over two letters")
    check(measure_regex(parse_regex("alphabet a b c\n(a | b)*")) == Fraction(1, 2), "Σ2* in Σ3")
    for n in range(1, 5):
        for m in range(1, n + 1):
            for k in range(7):
                closed = measure_sigma_upto_closed(n, m, k)
                check(measure_sigma_upto(n, m, k) == closed, f"sum vs closed at {n},{m},{k}")
                r = Regex(letter_names(n), sigma_upto(m, k))
                check(measure_regex(r) == closed, f"regex measure at {n},{m},{k}")
    rng = random.Random(9)
    done = 0
    while done < 50:
        n = rng.choice([2, 3])
        letters = letter_names(n)
        e, f = _random_regex(rng, letters), _random_regex(rng, letters)
        re_, rf, ref = Regex(letters, e), Regex(letters, f), Regex(letters, concat(e, f))
        if not (_unambiguous(re_) and _unambiguous(rf) and _unambiguous(ref)):
            continue
        done += 1
        lhs = measure_regex(ref)
        check(lhs == (n + 1) * measure_regex(re_) * measure_regex(rf), f"product law on {e} . {f}")
    enc = measure_ucfg_enclosure(exponential_x(2), Fraction(1, 2**40))
    check(Fraction(1, 32) in enc and enc.width <= Fraction(1, 2**40), f"X value enclosure {enc}")
    return "exact values, identity n<=4 m<=n k<=6, 50 product fixtures, 1/32 enclosed"


# -- 10 --------------------------------------------------------------------------------


@criterion(10, "representation: 200 admissible samples", 120)
def c10():
    rng = random.Random(10)
    accepted = rejected = 0
    while accepted < 200:
        n = rng.randint(2, 5)
        m = rng.randint(1, n - 1)
        ell = rng.randint(1, 12)
        q = (n + 1) ** ell
        c = Fraction(rng.randint(0, q), q)
        if c > Fraction(1, n - m + 1):
            continue
        if not is_admissible(n, m, c):
            rejected += 1
            continue
        accepted += 1
        e = repr_regex(n, m, c)
        r = Regex(letter_names(n), e)
        check(letters_used(e) <= set(letter_names(m)), f"{c} over Σ_{m}: stray letters")
        check(ambiguity_witness(regex_to_nfa(r), 8) is None, f"{c} (n={n}, m={m}): ambiguous")
        a, b = measure_regex_compositional(r, check=False), measure_regex(r)
        check(a == c == b, f"{c} (n={n}, m={m}): measures {a}, {b}")
        audit = regex_size_audit(e, repr_task(n, m, c))
        check(audit.size_ok, f"{c} (n={n}, m={m}): {audit.nodes} nodes over bound")
    return f"200 admissible ({rejected} inadmissible draws skipped)"


# -- 11 --------------------------------------------------------------------------------


@criterion(11, "square-root-sum construction for (9; 16, 9, 4)", 60)
def c11():
    problems = []
    con = generate(9, (16, 9, 4))
    want = (Fraction(15, 32), Fraction(247, 512), Fraction(63, 128))
    measured = tuple(measure_regex(Regex(con.alphabet, e)) for e in con.regexes)
    if not (con.cs == want == measured):
        problems.append(f"C_i measures {measured}")
    lint = check_unambiguous_up_to(con.grammar, 8)
    if lint != OkUpTo(8):
        problems.append(f"lint {lint}")
    enc = equation_enclosure(con.grammar, Fraction(1, 2**40))
    if not (Fraction(39, 64) in enc and enc.width <= Fraction(1, 2**40)):
        problems.append(f"enclosure {enc}")
    for d0, truth in ((10, True), (8, False)):
        v = verify_instance(generate(d0, (16, 9, 4)))["verdict"]
        if v is not truth:
            problems.append(f"d0={d0} verdict {v}")
    check(not problems, "; ".join(problems))
    return "C_i exact, lint OkUpTo(8), 39/64 enclosed, verdicts True/False"


# -- 12 --------------------------------------------------------------------------------


@criterion(12, "zeroness tooling", 10)
def c12():
    z = zeroness_falsify(universality_difference_system(universal_grammar()), 500)
    check(z == AllZeroUpTo(500), f"universal: {z}")
    z = zeroness_falsify(universality_difference_system(a_only_grammar()), 500)
    check(isinstance(z, NonZero) and z.n == 1, f"a-only: {z}")
    try:
        import z3
    except ImportError:
        raise Failed("no SMT-LIB reader available (install z3-solver)") from None
    for g in (universal_grammar(), a_only_grammar()):
        text = emit_reals_sentence(universality_difference_system(g))
        try:
            z3.parse_smt2_string(text)
        except z3.Z3Exception as exc:
            raise Failed(f"SMT-LIB parse error: {exc}") from None
    return "AllZeroUpTo(500), NonZero(1), both sentences parse"


# -- runner ----------------------------------------------------------------------------


def run_criterion(number):
    title, limit, fn = CRITERIA[number]
    start = time.perf_counter()
    try:
        detail, ok = fn(), True
    except Failed as exc:
        detail, ok = str(exc), False
    elapsed = time.perf_counter() - start
    if ok and elapsed > limit:
        ok, detail = False, f"{detail}; took {elapsed:.1f}s > {limit}s"
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title} [{elapsed:.2f}s] {detail}"
    return ok, line


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, line = run_criterion(number)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
