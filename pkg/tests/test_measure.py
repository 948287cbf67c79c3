from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from ucfglab.counting import AmbiguityDetected
from ucfglab.lang.automaton import AmbiguousAutomaton, make_automaton
from ucfglab.lang.fixtures import (
    a_only_grammar,
    a_star_dfa,
    ambiguous_grammar,
    dyck_grammar,
    even_odd_ufa,
    tree_grammar,
    two_run_nfa,
    universal_grammar,
)
from ucfglab.lang.grammar import make_grammar
from ucfglab.lang.regex import EPS, Letter, Regex, RegexShapeError, concat, language_by_length, parse_regex, star, union
from ucfglab.measure import (
    AmbiguousRegex,
    EquationNotPinned,
    automaton_measure,
    compare_equation_value,
    compare_measure,
    decide_on_enclosure,
    equation_enclosure,
    measure_automaton_exact,
    measure_enclosures,
    measure_regex,
    measure_regex_compositional,
    measure_sigma_upto,
    measure_sigma_upto_closed,
    measure_ucfg_enclosure,
    terms_for_width,
    word_measure,
)

DYCK_LO_OK = lambda v: (3 - 2 * v) ** 2 >= 5  # noqa: E731  v <= (3 - √5)/2
DYCK_HI_OK = lambda v: (3 - 2 * v) ** 2 <= 5  # noqa: E731


def test_word_measure():
    assert word_measure(("a", "b"), 2) == Fraction(1, 27)
    assert word_measure((), 1) == Fraction(1, 2)


@pytest.mark.parametrize("n,m,k", [(3, 1, 0), (3, 2, 5), (5, 4, 7), (2, 2, 3)])
def test_sigma_upto_closed_form(n, m, k):
    assert measure_sigma_upto(n, m, k) == measure_sigma_upto_closed(n, m, k)


def test_automaton_measures():
    assert measure_automaton_exact(even_odd_ufa()) == 1
    assert measure_automaton_exact(a_star_dfa()) == Fraction(1, 2)
    assert automaton_measure(make_automaton(("a",), [], 0, [])).value == 0
    with pytest.raises(AmbiguousAutomaton):
        automaton_measure(two_run_nfa())


def test_automaton_measure_by_direct_summation():
    # a (a|b)* b : μ = Σ_k (k-2 letters free) ... computed by summing word measures to length 40
    m = make_automaton(("a", "b"), [(0, "a", 1), (1, "a", 1), (1, "b", 1), (1, "b", 2)], 0, [2])
    exact = measure_automaton_exact(m)
    partial = sum(Fraction(2 ** (k - 2), 3 ** (k + 1)) for k in range(2, 60))
    assert 0 <= exact - partial < Fraction(1, 10**9)


def test_grammar_series_enclosures():
    enc = measure_ucfg_enclosure(universal_grammar(), Fraction(1, 1000))
    assert 1 in enc and enc.width <= Fraction(1, 1000)
    enc = measure_ucfg_enclosure(a_only_grammar(), Fraction(1, 10**6))
    assert Fraction(1, 2) in enc
    encs = measure_enclosures(dyck_grammar(), 30)
    for outer, inner in zip(encs, encs[1:]):
        assert outer.lo <= inner.lo and inner.hi <= outer.hi
    assert DYCK_LO_OK(encs[-1].lo) and DYCK_HI_OK(encs[-1].hi)


def test_terms_for_width():
    N = terms_for_width(2, Fraction(1, 100))
    assert Fraction(2, 3) ** (N + 1) <= Fraction(1, 100) < Fraction(2, 3) ** N


def test_series_detects_ambiguity():
    with pytest.raises(AmbiguityDetected):
        measure_ucfg_enclosure(tree_grammar(), Fraction(1, 100))


def test_compare_measure():
    assert compare_measure(dyck_grammar(), "<", Fraction(2, 5)).result is True
    assert compare_measure(dyck_grammar(), ">=", Fraction(2, 5)).result is False
    c = compare_measure(a_only_grammar(), "<=", Fraction(1, 2), width_floor=Fraction(1, 2**20))
    assert c.result is None and c.width <= Fraction(1, 2**20)
    with pytest.raises(ValueError):
        compare_measure(dyck_grammar(), "!=", Fraction(1, 2))


@pytest.mark.parametrize(
    "lo,hi,op,eps,want",
    [
        (0, Fraction(1, 4), "<=", Fraction(1, 4), True),
        (0, Fraction(1, 4), "<", Fraction(1, 4), None),
        (Fraction(1, 2), 1, ">", Fraction(1, 4), True),
        (0, Fraction(1, 8), ">=", Fraction(1, 4), False),
    ],
)
def test_decide_on_enclosure(lo, hi, op, eps, want):
    assert decide_on_enclosure(Fraction(lo), Fraction(hi), op, eps) is want


def test_equation_enclosure_dyck():
    enc = equation_enclosure(dyck_grammar(), Fraction(1, 2**60))
    assert enc.width <= Fraction(1, 2**60)
    assert DYCK_LO_OK(enc.lo) and DYCK_HI_OK(enc.hi)


def test_equation_value_exceeds_measure_when_ambiguous():
    # L = {a} with two trees for a: μ(L) = 1/9, the derivation-weighted value is 2/9
    g = ambiguous_grammar(("a", "b"))
    enc = equation_enclosure(g, Fraction(1, 2**30))
    assert Fraction(2, 9) in enc
    assert enc.lo > Fraction(1, 9)


def test_equation_enclosure_failures():
    with pytest.raises(EquationNotPinned):
        equation_enclosure(tree_grammar(), Fraction(1, 2**20))
    critical = make_grammar(("a", "b", "c"), "S", [("S", ()), ("S", ("a", "S", "S"))])
    with pytest.raises(EquationNotPinned):
        equation_enclosure(critical, Fraction(1, 2**40))


def test_compare_equation_value():
    verdict, enc = compare_equation_value(dyck_grammar(), "<", Fraction(2, 5))
    assert verdict is True and enc.hi < Fraction(2, 5)
    verdict, _ = compare_equation_value(a_only_grammar(), "<=", Fraction(1, 2), Fraction(1, 2**60))
    assert verdict is None


def test_regex_measures():
    r = parse_regex("alphabet a b\n(a | b)*")
    assert measure_regex(r) == measure_regex_compositional(r) == 1
    r = parse_regex("alphabet a b c\na* b")
    assert measure_regex_compositional(r) == Fraction(1, 12)
    with pytest.raises(AmbiguousRegex):
        measure_regex_compositional(parse_regex("alphabet a\na* a*"))


def _asts():
    leaf = st.sampled_from([Letter("a"), Letter("b"), EPS])
    return st.recursive(
        leaf,
        lambda inner: st.one_of(
            st.tuples(inner, inner).map(lambda p: union(*p)),
            st.tuples(inner, inner).map(lambda p: concat(*p)),
            inner.map(star),
        ),
        max_leaves=5,
    )


@settings(max_examples=120, deadline=None)
@given(_asts())
def test_two_measure_paths_agree(e):
    r = Regex(("a", "b", "c"), e)
    try:
        a = measure_regex_compositional(r)
        b = measure_regex(r)
    except (AmbiguousRegex, AmbiguousAutomaton, RegexShapeError):
        assume(False)
    assert a == b
    # and both dominate the measure of the words up to length 6
    words = set().union(*language_by_length(e, 6))
    assert sum(word_measure(w, 3) for w in words) <= a


def test_exponential_family_values():
    from ucfglab.lang.fixtures import exponential_x, exponential_y

    # Y_2 = {a^k : k < 4}: Σ_{k<4} 2^-(k+1) = 15/16;  X_2 = {a^4}: 2^-5
    enc = measure_ucfg_enclosure(exponential_y(2), Fraction(1, 2**40))
    assert Fraction(15, 16) in enc
    enc = measure_ucfg_enclosure(exponential_x(2), Fraction(1, 2**40))
    assert Fraction(1, 32) in enc
    assert equation_enclosure(exponential_y(3), Fraction(1, 2**40)).lo <= Fraction(255, 256)
