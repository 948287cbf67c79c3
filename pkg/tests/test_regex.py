import pytest
from hypothesis import assume, given, settings, strategies as st

from ucfglab.lang.automaton import run_multiplicity
from ucfglab.lang.grammar import FormatError
from ucfglab.lang.regex import (
    EPS,
    Letter,
    Regex,
    RegexShapeError,
    concat,
    format_regex,
    language_by_length,
    match_count,
    nullable,
    parse_regex,
    power,
    regex_to_nfa,
    serialize_regex,
    size,
    star,
    union,
)

from oracles import language, words_upto

AB = ("a", "b")


def test_parse_with_header():
    r = parse_regex("alphabet a b c\n(a | b)* a\n")
    assert r.alphabet == ("a", "b", "c")
    assert language_by_length(r.expr, 2)[2] == {("a", "a"), ("b", "a")}


def test_alphabet_inferred_in_order_of_first_use():
    assert parse_regex("b a* b").alphabet == ("b", "a")


def test_multi_character_letters():
    r = parse_regex("alphabet a1 a2\na1 a2* | eps")
    assert match_count(r.expr, ("a1", "a2", "a2")) == 1


@pytest.mark.parametrize(
    "text", ["(a | b", "a |", "alphabet a\nb", "alphabet a\nalphabet a\na", "eps", "a )"]
)
def test_parse_errors(text):
    with pytest.raises(FormatError):
        parse_regex(text)


def test_round_trip_precedence():
    r = parse_regex("alphabet a b\n(a b | b)* (a | eps) b")
    again = parse_regex(serialize_regex(r))
    assert language_by_length(again.expr, 5) == language_by_length(r.expr, 5)
    assert format_regex(concat(Letter("a"), star(union(Letter("a"), Letter("b"))))) == "a (a | b)*"


def test_smart_constructors():
    assert star(EPS) == EPS
    assert concat(EPS, Letter("a")) == Letter("a")
    assert size(power(Letter("a"), 3)) == 4
    assert nullable(star(Letter("a")))


def test_match_count_sees_ambiguity():
    e = parse_regex("(a | a b) (b | eps)").expr
    assert match_count(e, ("a", "b")) == 2


def test_nullable_star_is_rejected():
    e = parse_regex("alphabet a\n(a | eps)*").expr
    with pytest.raises(RegexShapeError):
        match_count(e, ("a",))
    with pytest.raises(RegexShapeError):
        regex_to_nfa(Regex(("a",), e))


def test_multiplicity_two_is_rejected():
    with pytest.raises(RegexShapeError):
        regex_to_nfa(parse_regex("alphabet a\n(eps | eps) a"))


def _asts():
    leaf = st.sampled_from([Letter("a"), Letter("b"), EPS])
    return st.recursive(
        leaf,
        lambda inner: st.one_of(
            st.tuples(inner, inner).map(lambda p: union(*p)),
            st.tuples(inner, inner).map(lambda p: concat(*p)),
            inner.map(star),
        ),
        max_leaves=6,
    )


@settings(max_examples=150, deadline=None)
@given(_asts())
def test_position_automaton_runs_equal_parses(e):
    try:
        m = regex_to_nfa(Regex(AB, e))
    except RegexShapeError:
        assume(False)
    by_len = language_by_length(e, 5)
    assert language(m, 5) == set().union(*by_len)
    for w in words_upto(AB, 4):
        assert run_multiplicity(m, w) == match_count(e, w)
