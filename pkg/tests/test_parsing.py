import pytest
from hypothesis import given, settings, strategies as st

from ucfglab import kernels
from ucfglab.lang.fixtures import (
    a_only_grammar,
    ambiguous_grammar,
    dyck_grammar,
    grammar_fixtures,
    universal_grammar,
)
from ucfglab.lang.grammar import encode_short_gnf, make_grammar, trim_grammar
from ucfglab.lang.parsing import (
    Ambiguous,
    BudgetExceeded,
    OkUpTo,
    accepts,
    check_budget,
    check_unambiguous_up_to,
    count_derivations,
    derivation_counts_by_length,
    word_from_index,
    words_of_length,
)

from oracles import words_upto

FIXTURES = grammar_fixtures()


def test_words_of_length_is_lexicographic():
    assert list(words_of_length(("a", "b"), 2)) == [("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")]
    for i, w in enumerate(words_of_length(("x", "y", "z"), 3)):
        assert word_from_index(("x", "y", "z"), i, 3) == w


def test_universal_counts_every_word_once():
    g = universal_grammar(("a", "b"))
    assert all(c == 1 for row in derivation_counts_by_length(g, 6) for c in row)


def test_a_only():
    g = a_only_grammar()
    assert accepts(g, ("a", "a", "a"))
    assert not accepts(g, ("a", "b"))
    assert count_derivations(g, ()) == 1


def test_dyck_membership():
    g = dyck_grammar()
    assert accepts(g, tuple("aabb"))
    assert accepts(g, tuple("abab"))
    assert not accepts(g, tuple("abba"))


def test_letters_outside_alphabet_are_rejected():
    assert count_derivations(universal_grammar(), ("c",)) == 0


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_lint_matches_fixture_label(name):
    g, unambiguous = FIXTURES[name]
    verdict = check_unambiguous_up_to(g, 6)
    if unambiguous:
        assert verdict == OkUpTo(6)
    else:
        assert isinstance(verdict, Ambiguous)
        assert count_derivations(g, verdict.word) == verdict.derivations >= 2


def test_lint_reports_the_first_ambiguous_word():
    g = ambiguous_grammar(("a", "b"))
    verdict = check_unambiguous_up_to(g, 6)
    rows = derivation_counts_by_length(g, 6)
    first = next(
        word_from_index(g.alphabet, i, m)
        for m, row in enumerate(rows)
        for i, c in enumerate(row)
        if c >= 2
    )
    assert verdict.word == first


def test_budget_is_enforced():
    with pytest.raises(BudgetExceeded):
        check_budget(3, 20, 1000)
    with pytest.raises(BudgetExceeded):
        derivation_counts_by_length(universal_grammar(("a", "b", "c")), 12, budget=1000)


def test_general_chart_handles_non_gnf_grammars():
    # S -> S S | a | ε has infinitely many trees for the empty word;
    # the unit-free variant below stays finite and ambiguous
    g = make_grammar(("a",), "S", [("S", ("S", "S", "a")), ("S", ("a",))])
    # "a a a" = (a a) a only; 5 letters already has two bracketings
    assert count_derivations(g, ("a",) * 3) == 1
    assert count_derivations(g, ("a",) * 5) == 2


def _encoded(g, max_len):
    sg = trim_grammar(g)
    t = encode_short_gnf(sg)
    return (len(sg.nonterminals), sg.n_letters, t.prods, t.eps, t.nt_index[sg.start], max_len)


@pytest.mark.skipif(kernels.compiled_start_counts is None, reason="compiled chart not built")
@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_backends_agree(name):
    g, _ = FIXTURES[name]
    args = _encoded(g, 7)
    assert kernels.compiled_start_counts(*args) == kernels.python_start_counts(*args)


@pytest.mark.skipif(kernels.compiled_start_counts is None, reason="compiled chart not built")
def test_compiled_overflow_falls_back():
    g, _ = FIXTURES["trees"]
    args = _encoded(g, 40)
    try:
        kernels.compiled_start_counts(*args)
    except OverflowError:
        pass
    big = kernels.start_counts(*args)
    assert big == kernels.python_start_counts(*args)


@pytest.mark.parametrize("name", ["dyck", "palindrome", "anbn", "ambiguous"])
def test_chart_agrees_with_word_by_word(name):
    g, _ = FIXTURES[name]
    rows = derivation_counts_by_length(g, 6)
    for m, row in enumerate(rows):
        assert row == [count_derivations(g, w) for w in words_of_length(g.alphabet, m)]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from("ab"), max_size=8))
def test_dyck_is_balanced_prefix_condition(word):
    depth, ok = 0, True
    for x in word:
        depth += 1 if x == "a" else -1
        ok &= depth >= 0
    assert accepts(dyck_grammar(), tuple(word)) == (ok and depth == 0)


def test_oracle_words_upto_counts():
    assert sum(1 for _ in words_upto("ab", 3)) == 15
