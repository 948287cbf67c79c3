"""Inclusion problems reduced to universality of unambiguous objects.

Pipeline for L(A) ⊆ L(B):

1. relabel A over its own transitions so that it becomes deterministic (A');
2. lift B through the inverse of the relabelling projection h (B');
3. L(A) ⊆ L(B) iff L(A') ⊆ L(B') iff (L(B') ∩ L(A')) ∪ (Σ'* minus L(A')) is
   everything, and the left side is an unambiguous object whenever B is.

Inclusion of a context-free language in a regular one would additionally
need deterministic pushdown complementation and is not provided.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .counting import (
    DEFAULT_BOUND,
    UniversalityVerdict,
    require_short_gnf,
    ucfg_universal,
    ufa_universal,
)
from .lang.automaton import (
    FiniteAutomaton,
    complement_dfa,
    disjoint_union,
    is_total,
    product,
    require_deterministic,
    require_unambiguous,
    totalize,
)
from .lang.grammar import (
    Grammar,
    ShortGnfGrammar,
    Word,
    fresh_name,
    trim_grammar,
)
from .lang.parsing import (
    DEFAULT_WORD_BUDGET,
    Ambiguous,
    BudgetExceeded,
    check_unambiguous_up_to,
    count_derivations,
)


@dataclass(frozen=True)
class TransitionAlphabetMap:
    """New letters (one per transition of the relabelled machine) and their projection."""

    original: tuple[str, ...]
    new_alphabet: tuple[str, ...]
    h: dict[str, str] = field(hash=False)

    def preimage(self, letter: str) -> list[str]:
        return [d for d in self.new_alphabet if self.h[d] == letter]

    def project(self, word: Sequence[str]) -> Word:
        return tuple(self.h[d] for d in word)


class AlphabetMismatch(ValueError):
    pass


class OverlapError(ValueError):
    def __init__(self, word: Word):
        self.word = word
        super().__init__(f"languages overlap on {' '.join(word)!r}")


class AmbiguousGrammar(ValueError):
    def __init__(self, word: Word, derivations: int):
        self.word, self.derivations = word, derivations
        super().__init__(f"word {' '.join(word)!r} has {derivations} derivation trees")


# -- left-hand-side determinisation -------------------------------------------


def lhs_determinize(a: FiniteAutomaton) -> tuple[FiniteAutomaton, TransitionAlphabetMap]:
    """Relabel the (totalised) automaton so every transition reads its own letter."""
    t = totalize(a)
    letters = [f"{p}.{x}.{q}" for p, x, q in t.transitions]
    if len(set(letters)) != len(letters) or set(letters) & set(t.states):
        letters = [f"t{i}.{x}" for i, (_, x, _) in enumerate(t.transitions)]
    h = {d: x for d, (_, x, _) in zip(letters, t.transitions)}
    trans = tuple((p, d, q) for d, (p, _, q) in zip(letters, t.transitions))
    a2 = FiniteAutomaton(tuple(letters), t.states, t.initial, t.accepting, trans)
    return a2, TransitionAlphabetMap(t.alphabet, tuple(letters), h)


def _check_alphabet(alphabet: Sequence[str], hmap: TransitionAlphabetMap) -> None:
    if set(alphabet) != set(hmap.original):
        raise AlphabetMismatch(
            f"alphabet {list(alphabet)} differs from the map's original alphabet {list(hmap.original)}"
        )


def lift_automaton(b: FiniteAutomaton, hmap: TransitionAlphabetMap) -> FiniteAutomaton:
    """Automaton for h^-1(L(b)); each x-transition is copied for every letter over x."""
    _check_alphabet(b.alphabet, hmap)
    pre = {x: hmap.preimage(x) for x in hmap.original}
    trans = tuple((p, d, q) for p, x, q in b.transitions for d in pre[x])
    return FiniteAutomaton(hmap.new_alphabet, b.states, b.initial, b.accepting, trans)


def lift_grammar(g: Grammar, hmap: TransitionAlphabetMap) -> ShortGnfGrammar:
    g = require_short_gnf(g)
    _check_alphabet(g.alphabet, hmap)
    pre = {x: hmap.preimage(x) for x in hmap.original}
    prods = []
    for lhs, rhs in g.productions:
        if not rhs:
            prods.append((lhs, rhs))
        else:
            prods.extend((lhs, (d,) + rhs[1:]) for d in pre[rhs[0]])
    return ShortGnfGrammar(hmap.new_alphabet, g.nonterminals, g.start, tuple(prods))


# -- grammar constructions -----------------------------------------------------


def ucfg_dfa_product(g: Grammar, d: FiniteAutomaton) -> ShortGnfGrammar:
    """Short-GNF grammar for L(g) ∩ L(d) built from triples (p, X, q).

    Only triples reachable from the start are generated; the result is trimmed.
    Since d is deterministic, each word reaches a single accepting state, so
    the fresh start's alternatives are disjoint and unambiguity is preserved.
    """
    g = require_short_gnf(g)
    require_deterministic(d)
    if not is_total(d):
        raise ValueError("ucfg_dfa_product needs a total automaton (use totalize)")
    if set(g.alphabet) != set(d.alphabet):
        raise AlphabetMismatch("grammar and automaton alphabets differ")
    by_lhs: dict[str, list[tuple[str, ...]]] = {}
    for lhs, rhs in g.productions:
        by_lhs.setdefault(lhs, []).append(rhs)
    step = {(p, a): qs[0] for (p, a), qs in d.delta.items()}
    taken = set(g.alphabet)

    def name(p: str, x: str, q: str) -> str:
        return f"[{p},{x},{q}]"

    prods: list[tuple[str, tuple[str, ...]]] = []
    seen: dict[tuple[str, str, str], None] = {}
    queue: deque[tuple[str, str, str]] = deque()

    def visit(t):
        if t not in seen:
            seen[t] = None
            queue.append(t)

    for qf in d.states:
        if qf in d.accepting:
            visit((d.initial, g.start, qf))
    while queue:
        p, x, r = queue.popleft()
        for rhs in by_lhs.get(x, ()):
            if not rhs:
                if p == r:
                    prods.append((name(p, x, r), ()))
                continue
            a, y, z = rhs
            p2 = step[(p, a)]
            for q in d.states:
                visit((p2, y, q))
                visit((q, z, r))
                prods.append((name(p, x, r), (a, name(p2, y, q), name(q, z, r))))
    taken.update(name(*t) for t in seen)
    start = fresh_name("S", taken)
    starts = [name(d.initial, g.start, qf) for qf in d.states if qf in d.accepting]
    own = {}
    for lhs, rhs in prods:
        own.setdefault(lhs, []).append(rhs)
    start_prods = [(start, rhs) for s in starts for rhs in own.get(s, ())]
    nts = [start] + [name(*t) for t in seen]
    out = ShortGnfGrammar(g.alphabet, tuple(nts), start, tuple(start_prods + prods))
    return trim_grammar(out)


def right_linear_grammar(
    d: FiniteAutomaton, taken: set[str] | None = None
) -> tuple[ShortGnfGrammar, dict[str, str]]:
    """Q -> a Q' E per transition, Q -> ε for accepting Q; derivations = runs."""
    taken = set(taken or ()) | set(d.alphabet)
    names = {q: fresh_name(f"<{q}>", taken) for q in d.states}
    eps = fresh_name("E", taken)
    prods = [(names[p], (a, names[q], eps)) for p, a, q in d.transitions]
    prods += [(names[q], ()) for q in d.states if q in d.accepting]
    prods.append((eps, ()))
    g = ShortGnfGrammar(
        d.alphabet, tuple(names.values()) + (eps,), names[d.initial], tuple(prods)
    )
    return g, names


def shortest_common_word(g: Grammar, d: FiniteAutomaton) -> Word | None:
    """A shortest word of L(g) ∩ L(d) for deterministic d, or None if disjoint."""
    p = ucfg_dfa_product(g, totalize(d))
    return shortest_word(p)


def shortest_word(g: Grammar) -> Word | None:
    """A shortest word derivable from the start symbol (None for the empty language)."""
    g = require_short_gnf(g)
    best: dict[str, tuple[int, tuple]] = {}
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.productions:
            if not rhs:
                cand = (0, ())
            elif rhs[1] in best and rhs[2] in best:
                cand = (1 + best[rhs[1]][0] + best[rhs[2]][0], rhs)
            else:
                continue
            if lhs not in best or cand[0] < best[lhs][0]:
                best[lhs] = cand
                changed = True
    if g.start not in best:
        return None

    def build(x: str) -> list[str]:
        _, rhs = best[x]
        if not rhs:
            return []
        return [rhs[0]] + build(rhs[1]) + build(rhs[2])

    return tuple(build(g.start))


def union_ucfg_dfa(g: Grammar, d: FiniteAutomaton, check_overlap: bool = True) -> ShortGnfGrammar:
    """Grammar for L(g) ∪ L(d), unambiguous when both are and the languages are disjoint.

    With ``check_overlap`` the disjointness promise is verified: exactly via
    the product grammar when d is deterministic, otherwise on all words up to
    length 6.
    """
    g = require_short_gnf(g)
    if set(g.alphabet) != set(d.alphabet):
        raise AlphabetMismatch("grammar and automaton alphabets differ")
    if check_overlap:
        if d.alphabet != g.alphabet:
            d = FiniteAutomaton(g.alphabet, d.states, d.initial, d.accepting, d.transitions)
        witness = _overlap_witness(g, d)
        if witness is not None:
            raise OverlapError(witness)
    taken = set(g.nonterminals)
    rl, _ = right_linear_grammar(d, taken)
    start = fresh_name("U", taken | set(rl.nonterminals))
    start_prods = [(start, rhs) for lhs, rhs in g.productions if lhs == g.start]
    start_prods += [(start, rhs) for lhs, rhs in rl.productions if lhs == rl.start]
    return ShortGnfGrammar(
        g.alphabet,
        (start,) + g.nonterminals + rl.nonterminals,
        start,
        tuple(dict.fromkeys(start_prods + list(g.productions) + list(rl.productions))),
    )


def _overlap_witness(g: ShortGnfGrammar, d: FiniteAutomaton, max_len: int = 6) -> Word | None:
    from .lang.automaton import is_deterministic
    from .lang.enumerate import enumerate_words

    if is_deterministic(d):
        return shortest_common_word(g, d)
    in_g = enumerate_words(g, max_len)
    for words in enumerate_words(d, max_len):
        for w in words:
            if w in set(in_g[len(w)]):
                return w
    return None


# -- inclusion pipelines ---------------------------------------------------------


@dataclass(frozen=True)
class Included:
    def __str__(self):
        return "Included"


@dataclass(frozen=True)
class IncludedUpTo:
    bound: int
    sentence: str | None = None

    def __str__(self):
        return f"IncludedUpTo({self.bound})"


@dataclass(frozen=True)
class NotIncluded:
    word: Word | None
    length: int

    def __str__(self):
        shown = " ".join(self.word) if self.word is not None else f"<length {self.length}>"
        return f"NotIncluded({shown!r})"


@dataclass
class InclusionRun:
    """Verdict plus the intermediate objects, for inspection or dumping."""

    verdict: Included | IncludedUpTo | NotIncluded
    universality: UniversalityVerdict
    artifacts: dict[str, object]


def include_nfa_ufa(a: FiniteAutomaton, b: FiniteAutomaton) -> InclusionRun:
    """Complete decision of L(a) ⊆ L(b) for unambiguous b."""
    require_unambiguous(b)
    if set(a.alphabet) != set(b.alphabet):
        raise AlphabetMismatch("automata alphabets differ")
    a2, hmap = lhs_determinize(a)
    b2 = lift_automaton(b, hmap)
    inter = product(b2, a2)
    comp = complement_dfa(a2)
    n_machine = disjoint_union(inter, comp)
    v = ufa_universal(n_machine)
    artifacts = {"lhs_det": a2, "lifted": b2, "product": inter, "complement": comp, "union": n_machine}
    if v.kind == "Universal":
        return InclusionRun(Included(), v, artifacts)
    word = first_difference_automata(a, b, v.witness_length)
    return InclusionRun(NotIncluded(word, v.witness_length), v, artifacts)


def first_difference_automata(
    a: FiniteAutomaton, b: FiniteAutomaton, n: int, budget: int = DEFAULT_WORD_BUDGET
) -> Word | None:
    """Lexicographically first word of length n in L(a) but not L(b)."""
    calls = 0

    @lru_cache(maxsize=None)
    def possible(sa: frozenset, sb: frozenset, r: int) -> bool:
        nonlocal calls
        calls += 1
        if calls > budget:
            raise BudgetExceeded("witness search exceeded its budget")
        if not sa:
            return False
        if r == 0:
            return bool(sa & a.accepting) and not (sb & b.accepting)
        return any(
            possible(frozenset(a.step(sa, x)), frozenset(b.step(sb, x)), r - 1) for x in a.alphabet
        )

    try:
        sa, sb = frozenset({a.initial}), frozenset({b.initial})
        if not possible(sa, sb, n):
            return None
        word = []
        for r in range(n, 0, -1):
            for x in a.alphabet:
                na, nb = frozenset(a.step(sa, x)), frozenset(b.step(sb, x))
                if possible(na, nb, r - 1):
                    word.append(x)
                    sa, sb = na, nb
                    break
        return tuple(word)
    except BudgetExceeded:
        return None


def lint_grammar(g: Grammar, max_len: int = 6, budget: int = DEFAULT_WORD_BUDGET) -> int:
    """Bounded unambiguity lint; shrinks the length to fit the budget.  Returns the length used."""
    while max_len > 0 and sum(g.n_letters**m for m in range(max_len + 1)) > budget:
        max_len -= 1
    verdict = check_unambiguous_up_to(g, max_len, budget)
    if isinstance(verdict, Ambiguous):
        raise AmbiguousGrammar(verdict.word, verdict.derivations)
    return max_len


def include_nfa_ucfg(
    a: FiniteAutomaton,
    g: Grammar,
    N: int = DEFAULT_BOUND,
    lint_len: int = 6,
    emit_sentence: bool = False,
    budget: int = DEFAULT_WORD_BUDGET,
) -> InclusionRun:
    """Bounded falsification of L(a) ⊆ L(g); never answers a plain "included"."""
    g = require_short_gnf(g)
    if set(a.alphabet) != set(g.alphabet):
        raise AlphabetMismatch("automaton and grammar alphabets differ")
    lint_grammar(g, lint_len, budget)
    a2, hmap = lhs_determinize(a)
    g2 = lift_grammar(g, hmap)
    prod = ucfg_dfa_product(g2, totalize(a2))
    comp = complement_dfa(a2)
    union = union_ucfg_dfa(prod, comp, check_overlap=False)
    v = ucfg_universal(union, N, emit_sentence=emit_sentence, budget=0)
    artifacts = {"lhs_det": a2, "lifted": g2, "product": prod, "complement": comp, "union": union}
    if v.kind == "UniversalUpTo":
        return InclusionRun(IncludedUpTo(N, v.sentence), v, artifacts)
    word = first_difference_grammar(a, g, v.witness_length, budget)
    return InclusionRun(NotIncluded(word, v.witness_length), v, artifacts)


def first_difference_grammar(
    a: FiniteAutomaton, g: Grammar, n: int, budget: int = DEFAULT_WORD_BUDGET
) -> Word | None:
    """Lexicographically first word of length n accepted by a and rejected by g."""
    examined = 0

    def walk(prefix: list[str], states: frozenset):
        nonlocal examined
        if not states:
            return None
        if len(prefix) == n:
            examined += 1
            if examined > budget:
                raise BudgetExceeded("witness search exceeded its budget")
            if states & a.accepting and count_derivations(g, prefix) == 0:
                return tuple(prefix)
            return None
        for x in a.alphabet:
            prefix.append(x)
            found = walk(prefix, frozenset(a.step(states, x)))
            prefix.pop()
            if found is not None:
                return found
        return None

    try:
        return walk([], frozenset({a.initial}))
    except BudgetExceeded:
        return None


__all__ = [
    "AlphabetMismatch", "AmbiguousGrammar", "Included", "IncludedUpTo", "InclusionRun",
    "NotIncluded", "OverlapError", "TransitionAlphabetMap", "include_nfa_ucfg", "include_nfa_ufa",
    "lhs_determinize", "lift_automaton", "lift_grammar", "right_linear_grammar", "shortest_word",
    "ucfg_dfa_product", "union_ucfg_dfa",
]
