"""Brute-force word enumeration: the ground truth other modules are tested against."""

from __future__ import annotations

from typing import Sequence

from .automaton import FiniteAutomaton
from .grammar import Grammar, Word
from .parsing import (
    DEFAULT_WORD_BUDGET,
    check_budget,
    derivation_counts_by_length,
    word_from_index,
)
from .regex import Regex, language_by_length


def enumerate_words(
    obj: Grammar | FiniteAutomaton | Regex, max_len: int, budget: int = DEFAULT_WORD_BUDGET
) -> list[list[Word]]:
    """Accepted words of each length 0..max_len, each list in lexicographic order."""
    if isinstance(obj, Grammar):
        counts = derivation_counts_by_length(obj, max_len, budget)
        return [
            [word_from_index(obj.alphabet, i, m) for i, c in enumerate(row) if c]
            for m, row in enumerate(counts)
        ]
    if isinstance(obj, FiniteAutomaton):
        check_budget(len(obj.alphabet), max_len, budget)
        return _automaton_words(obj, max_len)
    if isinstance(obj, Regex):
        check_budget(len(obj.alphabet), max_len, budget)
        rank = {a: i for i, a in enumerate(obj.alphabet)}
        return [
            sorted(ws, key=lambda w: [rank[a] for a in w])
            for ws in language_by_length(obj.expr, max_len)
        ]
    raise TypeError(f"cannot enumerate {type(obj).__name__}")


def _automaton_words(m: FiniteAutomaton, max_len: int) -> list[list[Word]]:
    # frontier keeps only prefixes with a live state set, in lex order
    frontier: list[tuple[Word, frozenset[str]]] = [((), frozenset({m.initial}))]
    out = []
    for length in range(max_len + 1):
        out.append([w for w, s in frontier if s & m.accepting])
        if length == max_len:
            break
        nxt = []
        for w, s in frontier:
            for a in m.alphabet:
                t = m.step(s, a)
                if t:
                    nxt.append((w + (a,), frozenset(t)))
        frontier = nxt
    return out


def word_counts(obj, max_len: int, budget: int = DEFAULT_WORD_BUDGET) -> list[int]:
    return [len(ws) for ws in enumerate_words(obj, max_len, budget)]


def all_words(alphabet: Sequence[str], max_len: int) -> list[list[Word]]:
    out: list[list[Word]] = [[()]]
    for _ in range(max_len):
        out.append([w + (a,) for w in out[-1] for a in alphabet])
    return out
