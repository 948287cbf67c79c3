"""Cross-module properties on randomly drawn objects."""

import random
from fractions import Fraction

from hypothesis import HealthCheck, assume, given, settings, strategies as st

from ucfglab.counting import AmbiguityDetected, counts_from_system, ucfg_universal, ufa_counts
from ucfglab.lang.automaton import is_unambiguous, totalize
from ucfglab.lang.grammar import ShortGnfGrammar, parse_grammar, serialize_grammar
from ucfglab.lang.parsing import count_derivations, derivation_counts_by_length
from ucfglab.measure import EquationNotPinned, automaton_measure, equation_enclosure, measure_enclosures
from ucfglab.reductions import include_nfa_ufa, right_linear_grammar, ucfg_dfa_product

from oracles import language, random_dfa, random_nfa, random_ufa, words_upto

AB = ("a", "b")
NTS = ("S", "X", "Y")


@st.composite
def short_gnf(draw):
    prods = set()
    for x in NTS:
        if draw(st.booleans()):
            prods.add((x, ()))
    bodies = st.tuples(st.sampled_from(AB), st.sampled_from(NTS), st.sampled_from(NTS))
    for lhs, body in draw(st.lists(st.tuples(st.sampled_from(NTS), bodies), max_size=5)):
        prods.add((lhs, body))
    return ShortGnfGrammar(AB, NTS, "S", tuple(sorted(prods)))


@settings(max_examples=80, deadline=None)
@given(short_gnf())
def test_counting_system_sums_derivations(g):
    rows = derivation_counts_by_length(g, 6)
    assert counts_from_system(g, 6) == [sum(r) for r in rows]


@settings(max_examples=80, deadline=None)
@given(short_gnf())
def test_text_round_trip(g):
    h = parse_grammar(serialize_grammar(g))
    for w in words_upto(AB, 4):
        assert count_derivations(h, w) == count_derivations(g, w)


@settings(max_examples=60, deadline=None)
@given(short_gnf())
def test_universality_verdict_consistent_with_words(g):
    try:
        v = ucfg_universal(g, 30)
    except AmbiguityDetected as exc:
        assert exc.count > 2**exc.n
        return
    if v.kind == "NotUniversal":
        assert v.witness_length <= 30
        if v.witness_word is not None:
            assert count_derivations(g, v.witness_word) == 0
    else:
        assert all(count_derivations(g, w) >= 1 for w in words_upto(AB, 5))


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(short_gnf())
def test_series_never_exceeds_equation_value(g):
    try:
        encs = measure_enclosures(g, 12)
    except AmbiguityDetected:
        assume(False)
    try:
        eq = equation_enclosure(g, Fraction(1, 2**30))
    except EquationNotPinned:
        assume(False)
    # the truncated sum counts a subset of the weighted derivations
    assert encs[-1].lo <= eq.hi


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_product_grammar_is_intersection(seed):
    rng = random.Random(seed)
    g, _ = right_linear_grammar(random_ufa(rng, AB, 3))
    d = totalize(random_dfa(rng, AB, 3))
    p = ucfg_dfa_product(g, d)
    assert language(p, 5) == language(g, 5) & language(d, 5)
    for w in words_upto(AB, 5):
        assert count_derivations(p, w) <= 1


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_ufa_measure_is_sum_of_word_measures(seed):
    rng = random.Random(seed)
    m = random_ufa(rng, AB, 3)
    assume(is_unambiguous(m))
    value = automaton_measure(m).value
    counts = ufa_counts(m, 40)
    partial = sum(Fraction(c, 3 ** (k + 1)) for k, c in enumerate(counts))
    assert partial <= value <= partial + Fraction(2, 3) ** 41


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_inclusion_artifacts_are_unambiguous(seed):
    rng = random.Random(seed)
    a = random_nfa(rng, AB, 3)
    b = random_ufa(rng, AB, 3)
    run = include_nfa_ufa(a, b)
    assert is_unambiguous(run.artifacts["union"])
    assert is_unambiguous(run.artifacts["lifted"])
