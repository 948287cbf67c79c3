"""Counting functions of unambiguous automata and grammars, and universality tests.

For an unambiguous automaton with s useful states the run-count sequence
f(n) = u·M^n·v satisfies a linear recurrence of order <= s (Cayley-Hamilton
on the s x s transition-count matrix M).  |Σ|^n satisfies one of order 1, so
their difference satisfies one of order <= s + 1 and is identically zero iff
it vanishes at n = 0..s.  That makes ``ufa_universal`` a complete test.

For grammars the counting system is evaluated and compared with |Σ|^n up to
a bound; the answer is only ever "not universal" or "universal up to N".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .convrec import (
    AllZeroUpTo,
    ConvPolynomial,
    ConvRecSystem,
    combine,
    emit_reals_sentence,
    geometric_system,
    iter_component,
    zeroness_falsify,
)
from .lang.automaton import FiniteAutomaton, count_runs, require_unambiguous, trim
from .lang.grammar import Grammar, GrammarShapeError, ShortGnfGrammar, Word
from .lang.parsing import (
    DEFAULT_WORD_BUDGET,
    BudgetExceeded,
    as_short_gnf,
    check_budget,
    derivation_counts_by_length,
    word_from_index,
)

DEFAULT_BOUND = 512


class AmbiguityDetected(ValueError):
    """f_S(n) exceeded |Σ|^n, which no unambiguous grammar can do."""

    def __init__(self, n: int, count: int, alphabet_size: int):
        self.n, self.count = n, count
        super().__init__(
            f"f_S({n}) = {count} > {alphabet_size}^{n}: the grammar is ambiguous"
        )


@dataclass(frozen=True)
class UniversalityVerdict:
    kind: str  # NotUniversal | UniversalUpTo | Universal
    witness_length: int | None = None
    witness_word: Word | None = None
    bound: int | None = None
    sentence: str | None = None

    def __post_init__(self):
        if self.kind not in ("NotUniversal", "UniversalUpTo", "Universal"):
            raise ValueError(f"unknown verdict kind {self.kind!r}")

    @property
    def definitive(self) -> bool:
        return self.kind != "UniversalUpTo"

    def __str__(self):
        if self.kind == "NotUniversal":
            return f"NotUniversal({self.witness_length})"
        if self.kind == "UniversalUpTo":
            return f"UniversalUpTo({self.bound})"
        return "Universal"


# -- automata ------------------------------------------------------------------


def ufa_counts(m: FiniteAutomaton, N: int) -> list[int]:
    """Number of accepted words of each length 0..N of an unambiguous automaton."""
    t = trim(m)
    require_unambiguous(t)
    return count_runs(t, N)


def ufa_universal(m: FiniteAutomaton, budget: int = DEFAULT_WORD_BUDGET) -> UniversalityVerdict:
    t = trim(m)
    require_unambiguous(t)
    s = len(t.states)
    n_letters = len(t.alphabet)
    for n, c in enumerate(count_runs(t, s)):
        if c != n_letters**n:
            return UniversalityVerdict(
                "NotUniversal", n, first_rejected_word(t, n, budget), bound=s
            )
    return UniversalityVerdict("Universal", bound=s)


def first_rejected_word(m: FiniteAutomaton, n: int, budget: int = DEFAULT_WORD_BUDGET) -> Word | None:
    """Lexicographically first word of length n rejected by ``m`` (None if all accepted)."""
    calls = 0

    @lru_cache(maxsize=None)
    def can_reject(states: frozenset, r: int) -> bool:
        nonlocal calls
        calls += 1
        if calls > budget:
            raise BudgetExceeded("subset search for a rejected word exceeded its budget")
        if r == 0:
            return not (states & m.accepting)
        if not states:
            return True
        return any(can_reject(frozenset(m.step(states, a)), r - 1) for a in m.alphabet)

    try:
        current = frozenset({m.initial})
        if not can_reject(current, n):
            return None
        word = []
        for r in range(n, 0, -1):
            for a in m.alphabet:
                nxt = frozenset(m.step(current, a))
                if can_reject(nxt, r - 1):
                    word.append(a)
                    current = nxt
                    break
        return tuple(word)
    except BudgetExceeded:
        return None


# -- grammars ------------------------------------------------------------------


def require_short_gnf(g: Grammar) -> ShortGnfGrammar:
    sg = as_short_gnf(g)
    if sg is None:
        raise GrammarShapeError("grammar is neither in short GNF nor Greibach-prefixed")
    return sg


def ucfg_counting_system(g: Grammar) -> ConvRecSystem:
    """σf_X = Σ_{X -> aYZ} f_Y * f_Z with f_X(0) = [X -> ε]; start symbol first."""
    g = require_short_gnf(g)
    names = [g.start] + [x for x in g.nonterminals if x != g.start]
    idx = {x: i for i, x in enumerate(names)}
    k = len(names)
    terms: list[dict] = [{} for _ in range(k)]
    init = [0] * k
    for lhs, rhs in g.productions:
        i = idx[lhs]
        if not rhs:
            init[i] = 1
            continue
        e = [0] * k
        e[idx[rhs[1]]] += 1
        e[idx[rhs[2]]] += 1
        key = tuple(e)
        terms[i][key] = terms[i].get(key, 0) + 1
    polys = tuple(ConvPolynomial.from_dict(k, t) for t in terms)
    return ConvRecSystem(tuple(names), polys, tuple(init))


def universality_difference_system(g: Grammar) -> ConvRecSystem:
    """First component |Σ|^n - f_S(n); identically zero iff g is universal (given unambiguity)."""
    g = require_short_gnf(g)
    return combine(geometric_system(g.n_letters, name="h"), ucfg_counting_system(g), "sub")


def ucfg_universal(
    g: Grammar,
    N: int = DEFAULT_BOUND,
    emit_sentence: bool = False,
    budget: int = DEFAULT_WORD_BUDGET,
) -> UniversalityVerdict:
    g = require_short_gnf(g)
    diff = universality_difference_system(g)
    sentence = emit_reals_sentence(diff) if emit_sentence else None
    z = zeroness_falsify(diff, N)
    if isinstance(z, AllZeroUpTo):
        return UniversalityVerdict("UniversalUpTo", bound=N, sentence=sentence)
    n = z.n
    if z.value < 0:
        raise AmbiguityDetected(n, int(g.n_letters**n - z.value), g.n_letters)
    try:
        word = shortest_missing_word(g, n, budget)
    except BudgetExceeded:
        word = None
    return UniversalityVerdict("NotUniversal", n, word, bound=N, sentence=sentence)


def shortest_missing_word(g: Grammar, n: int, budget: int = DEFAULT_WORD_BUDGET) -> Word:
    """Lexicographically first word of length n outside L(g)."""
    check_budget(g.n_letters, n, budget)
    row = derivation_counts_by_length(g, n, budget)[n]
    for i, c in enumerate(row):
        if c == 0:
            return word_from_index(g.alphabet, i, n)
    raise ValueError(f"every word of length {n} is in the language")


def counts_from_system(g: Grammar, N: int) -> list[int]:
    """f_S(0..N) from the counting system (derivation counts if g is ambiguous)."""
    return [int(v) for v in itertools.islice(iter_component(ucfg_counting_system(g)), N + 1)]
