"""Named grammars and automata used across tests, docs and the CLI."""

from __future__ import annotations

from typing import Sequence

from .automaton import FiniteAutomaton, make_automaton
from .grammar import ShortGnfGrammar, make_grammar


def _gnf(alphabet, start, prods) -> ShortGnfGrammar:
    return make_grammar(alphabet, start, prods, cls=ShortGnfGrammar)


def universal_grammar(alphabet: Sequence[str] = ("a", "b")) -> ShortGnfGrammar:
    prods = [("S", ())] + [("S", (a, "E", "S")) for a in alphabet] + [("E", ())]
    return _gnf(alphabet, "S", prods)


def a_only_grammar(alphabet: Sequence[str] = ("a", "b")) -> ShortGnfGrammar:
    """a* over a larger alphabet."""
    return _gnf(alphabet, "S", [("S", ()), ("S", (alphabet[0], "E", "S")), ("E", ())])


def ambiguous_grammar(alphabet: Sequence[str] = ("a", "b")) -> ShortGnfGrammar:
    """``a`` has two derivation trees."""
    a = alphabet[0]
    return _gnf(alphabet, "S", [("S", (a, "E", "E")), ("S", (a, "F", "F")), ("E", ()), ("F", ())])


def tree_grammar() -> ShortGnfGrammar:
    """S -> eps | a S S over {a}: a^n has Catalan(n) trees."""
    return _gnf(("a",), "S", [("S", ()), ("S", ("a", "S", "S"))])


def chain_grammar(length: int = 3) -> ShortGnfGrammar:
    """{eps, a, ..., a^length} as a right-leaning chain; length 3 is the Y2 shape."""
    names = ["S"] + [f"N{i}" for i in range(1, length + 1)]
    prods = []
    for i, x in enumerate(names):
        prods.append((x, ()))
        if i < length:
            prods.append((x, ("a", names[i + 1], "E")))
    prods.append(("E", ()))
    return _gnf(("a",), "S", prods)


def y2_chain_grammar() -> ShortGnfGrammar:
    return _gnf(
        ("a",),
        "S",
        [
            ("S", ()), ("S", ("a", "T", "E")),
            ("T", ()), ("T", ("a", "U", "E")),
            ("U", ()), ("U", ("a", "V", "E")),
            ("V", ()),
            ("E", ()),
        ],
    )


def _z_productions(n: int) -> list:
    prods = [("Z0", ())]
    for i in range(1, n + 1):
        prods.append((f"Z{i}", ("a", f"Z{i-1}", f"Z{i-1}")))
    return prods


def exponential_x(n: int) -> ShortGnfGrammar:
    """Single word a^(2^n); Z_i derives a^(2^i - 1)."""
    prods = [("X", ("a", f"Z{n}", "E"))] + _z_productions(n) + [("E", ())]
    return _gnf(("a",), "X", prods)


def exponential_y(n: int) -> ShortGnfGrammar:
    """{a^k : k < 2^n}; all words up to the exponentially long gap."""
    prods = []
    for i in range(n + 1):
        prods.append((f"Y{i}", ()))
        for j in range(i):
            prods.append((f"Y{i}", ("a", f"Z{j}", f"Y{j}")))
    prods += _z_productions(max(n - 1, 0))
    return _gnf(("a",), f"Y{n}", prods)


def anbn_grammar() -> ShortGnfGrammar:
    return _gnf(("a", "b"), "S", [("S", ()), ("S", ("a", "S", "B")), ("B", ("b", "E", "E")), ("E", ())])


def dyck_grammar() -> ShortGnfGrammar:
    return _gnf(
        ("a", "b"), "S", [("S", ()), ("S", ("a", "S", "B")), ("B", ("b", "E", "S")), ("E", ())]
    )


def marked_palindrome_grammar() -> ShortGnfGrammar:
    return _gnf(
        ("a", "b", "c"),
        "S",
        [
            ("S", ("c", "E", "E")),
            ("S", ("a", "S", "A")),
            ("S", ("b", "S", "B")),
            ("A", ("a", "E", "E")),
            ("B", ("b", "E", "E")),
            ("E", ()),
        ],
    )


def empty_grammar(alphabet: Sequence[str] = ("a", "b")) -> ShortGnfGrammar:
    return _gnf(alphabet, "S", [("S", (alphabet[0], "S", "S"))])


def grammar_fixtures() -> dict[str, tuple[ShortGnfGrammar, bool]]:
    """name -> (grammar, unambiguous)."""
    return {
        "universal": (universal_grammar(), True),
        "universal3": (universal_grammar(("a", "b", "c")), True),
        "a_only": (a_only_grammar(), True),
        "y2_chain": (y2_chain_grammar(), True),
        "chain5": (chain_grammar(5), True),
        "exp_x2": (exponential_x(2), True),
        "exp_x3": (exponential_x(3), True),
        "exp_y2": (exponential_y(2), True),
        "exp_y3": (exponential_y(3), True),
        "anbn": (anbn_grammar(), True),
        "dyck": (dyck_grammar(), True),
        "palindrome": (marked_palindrome_grammar(), True),
        "empty": (empty_grammar(), True),
        "ambiguous": (ambiguous_grammar(), False),
        "trees": (tree_grammar(), False),
    }


# -- automata ------------------------------------------------------------------


def sigma_star_dfa(alphabet: Sequence[str] = ("a", "b")) -> FiniteAutomaton:
    return make_automaton(alphabet, [("q", a, "q") for a in alphabet], "q", ["q"])


def a_star_dfa(alphabet: Sequence[str] = ("a", "b")) -> FiniteAutomaton:
    """Partial DFA for a*; complement_dfa totalises it."""
    return make_automaton(alphabet, [("q", alphabet[0], "q")], "q", ["q"])


def even_length_dfa(alphabet: Sequence[str] = ("a", "b")) -> FiniteAutomaton:
    trans = [(p, a, q) for p, q in (("e", "o"), ("o", "e")) for a in alphabet]
    return make_automaton(alphabet, trans, "e", ["e"])


def empty_automaton(alphabet: Sequence[str] = ("a", "b")) -> FiniteAutomaton:
    return make_automaton(alphabet, [], "q", [])


def even_odd_ufa(alphabet: Sequence[str] = ("a", "b")) -> FiniteAutomaton:
    """Nondeterministic, unambiguous automaton for all words.

    The first letter commits to a parity branch; only the branch that guessed
    the length's parity accepts, so every word has exactly one accepting run.
    """
    trans = []
    for a in alphabet:
        trans += [("i", a, "E1"), ("i", a, "O1")]
        trans += [("E1", a, "E0"), ("E0", a, "E1"), ("O1", a, "O0"), ("O0", a, "O1")]
    return make_automaton(alphabet, trans, "i", ["i", "E0", "O1"], states=["i", "E1", "E0", "O1", "O0"])


def two_run_nfa() -> FiniteAutomaton:
    """``a`` has two accepting runs."""
    return make_automaton(("a",), [("0", "a", "1"), ("0", "a", "2")], "0", ["1", "2"])
