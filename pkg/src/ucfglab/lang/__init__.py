"""Language objects: grammars, automata, regular expressions and their oracles."""

from .automaton import FiniteAutomaton, parse_automaton, serialize_automaton
from .enumerate import enumerate_words, word_counts
from .grammar import (
    FormatError,
    Grammar,
    GrammarShapeError,
    ShortGnfGrammar,
    binarize_prefixed,
    make_grammar,
    parse_grammar,
    serialize_grammar,
    validate_short_gnf,
)
from .parsing import Ambiguous, OkUpTo, check_unambiguous_up_to, count_derivations
from .regex import Regex, parse_regex, regex_to_nfa, serialize_regex

__all__ = [
    "Ambiguous", "FiniteAutomaton", "FormatError", "Grammar", "GrammarShapeError", "OkUpTo",
    "Regex", "ShortGnfGrammar", "binarize_prefixed", "check_unambiguous_up_to",
    "count_derivations", "enumerate_words", "make_grammar", "parse_automaton", "parse_grammar",
    "parse_regex", "regex_to_nfa", "serialize_automaton", "serialize_grammar", "serialize_regex",
    "validate_short_gnf", "word_counts",
]
