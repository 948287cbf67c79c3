import pytest

from ucfglab.lang.fixtures import ambiguous_grammar, dyck_grammar, grammar_fixtures, universal_grammar
from ucfglab.lang.grammar import (
    FormatError,
    GrammarShapeError,
    ShortGnfGrammar,
    binarize_prefixed,
    encode_short_gnf,
    make_grammar,
    parse_grammar,
    serialize_grammar,
    trim_grammar,
    validate_short_gnf,
)
from ucfglab.lang.parsing import derivation_counts_by_length

DYCK_TEXT = """\
alphabet a b
start S
S ->
S -> a S B
B -> b E S
E ->
"""


def test_parse_infers_nonterminals_in_order():
    g = parse_grammar(DYCK_TEXT)
    assert g.alphabet == ("a", "b")
    assert g.nonterminals == ("S", "B", "E")
    assert len(g.productions) == 4


@pytest.mark.parametrize("name", sorted(grammar_fixtures()))
def test_round_trip(name):
    g, _ = grammar_fixtures()[name]
    again = parse_grammar(serialize_grammar(g))
    assert again.alphabet == g.alphabet
    assert again.start == g.start
    assert set(again.productions) == set(g.productions)


def test_comments_and_blank_lines_are_ignored():
    g = parse_grammar("# header\n\n" + DYCK_TEXT.replace("S ->\n", "S ->   # empty\n"))
    assert ("S", ()) in g.productions


@pytest.mark.parametrize(
    "text",
    [
        "start S\nS ->\n",  # no alphabet
        "alphabet a\nS ->\n",  # no start
        "alphabet a\nstart S\nS => a\n",  # no arrow
        "alphabet a a\nstart S\nS ->\n",  # repeated letter
        "alphabet a\nstart S\nS -> a\nS -> a\n",  # duplicate production
    ],
)
def test_format_errors(text):
    with pytest.raises((FormatError, ValueError)):
        parse_grammar(text)


def test_letters_and_nonterminals_must_not_clash():
    with pytest.raises(ValueError):
        make_grammar(("a", "S"), "S", [("S", ())])


def test_validate_short_gnf_reports_offenders():
    g = make_grammar(("a",), "S", [("S", ("a",)), ("S", ())])
    with pytest.raises(GrammarShapeError):
        validate_short_gnf(g)
    assert isinstance(validate_short_gnf(dyck_grammar()), ShortGnfGrammar)


def test_binarize_preserves_derivation_counts():
    g = make_grammar(
        ("a", "b", "c"),
        "S",
        [("S", ()), ("S", ("a", "S", "B", "C")), ("S", ("a", "S", "S")), ("B", ("b",)), ("C", ("c",))],
    )
    sg = binarize_prefixed(g)
    assert isinstance(sg, ShortGnfGrammar)
    # reference: direct enumeration of leftmost derivations on the prefixed grammar
    from ucfglab.lang.parsing import count_derivations

    for w, c in _prefixed_counts(g, 6).items():
        assert count_derivations(sg, w) == c, w


def test_binarize_gives_up_on_growing_tails():
    g = make_grammar(("a",), "S", [("S", ()), ("S", ("a", "S", "S", "S"))])
    with pytest.raises(GrammarShapeError):
        binarize_prefixed(g, max_helpers=50)


def _prefixed_counts(g, max_len):
    """Leftmost derivations of every word up to max_len, by sentential-form search."""
    letters = set(g.alphabet)
    by_lhs = {}
    for lhs, rhs in g.productions:
        by_lhs.setdefault(lhs, []).append(rhs)
    counts = {}
    stack = [((), (g.start,))]
    while stack:
        done, form = stack.pop()
        if len(done) > max_len:
            continue
        if not form:
            counts[done] = counts.get(done, 0) + 1
            continue
        head, rest = form[0], form[1:]
        if head in letters:
            stack.append((done + (head,), rest))
            continue
        for rhs in by_lhs.get(head, ()):
            # every non-empty body starts with a letter, so forms never stall
            stack.append((done, rhs + rest))
    return counts


def test_binarize_rejects_non_prefixed():
    g = make_grammar(("a",), "S", [("S", ("S", "a")), ("S", ())])
    with pytest.raises(GrammarShapeError):
        binarize_prefixed(g)


def test_trim_drops_useless_nonterminals():
    g = make_grammar(
        ("a",), "S", [("S", ()), ("S", ("a", "S", "S")), ("U", ("a", "U", "U")), ("R", ())]
    )
    t = trim_grammar(g)
    assert t.nonterminals == ("S",)
    assert derivation_counts_by_length(t, 5) == derivation_counts_by_length(g, 5)


def test_encode_short_gnf_indices():
    g = universal_grammar(("a", "b"))
    table = encode_short_gnf(g)
    assert set(table.letter_index) == {"a", "b"}
    assert len(table.prods) == 2
    assert sum(table.eps) == 2


def test_ambiguous_fixture_is_still_a_grammar():
    g = ambiguous_grammar(("a", "b"))
    assert parse_grammar(serialize_grammar(g)).productions == g.productions
