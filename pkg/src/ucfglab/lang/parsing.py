"""Chart parsing with derivation multiplicities, and the bounded ambiguity lint."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

from .. import kernels
from .grammar import (
    Grammar,
    GrammarShapeError,
    ShortGnfGrammar,
    Word,
    binarize_prefixed,
    encode_short_gnf,
    trim_grammar,
    validate_short_gnf,
)

DEFAULT_WORD_BUDGET = 2_000_000


class BudgetExceeded(RuntimeError):
    pass


class InfiniteAmbiguity(ValueError):
    """Some word has infinitely many derivation trees (a cyclic unit chain)."""


@dataclass(frozen=True)
class OkUpTo:
    bound: int

    def __str__(self):
        return f"OkUpTo({self.bound})"


@dataclass(frozen=True)
class Ambiguous:
    word: Word
    derivations: int

    def __str__(self):
        return f"Ambiguous({' '.join(self.word)!r})"


def words_of_length(alphabet: Sequence[str], length: int) -> Iterator[Word]:
    """All words of one length in lexicographic order (alphabet order)."""
    if length == 0:
        yield ()
        return
    for prefix in words_of_length(alphabet, length - 1):
        for a in alphabet:
            yield prefix + (a,)


def word_from_index(alphabet: Sequence[str], index: int, length: int) -> Word:
    n = len(alphabet)
    letters = []
    for _ in range(length):
        index, d = divmod(index, n)
        letters.append(alphabet[d])
    return tuple(reversed(letters))


def check_budget(n_letters: int, max_len: int, budget: int) -> None:
    total = sum(n_letters**m for m in range(max_len + 1))
    if total > budget:
        raise BudgetExceeded(
            f"{total} words up to length {max_len} over {n_letters} letters exceeds budget {budget}"
        )


def as_short_gnf(g: Grammar) -> ShortGnfGrammar | None:
    """Short-GNF view of ``g`` (binarising prefixed grammars), or None."""
    try:
        return validate_short_gnf(g)
    except GrammarShapeError:
        pass
    try:
        return binarize_prefixed(g)
    except GrammarShapeError:
        return None


def derivation_counts_by_length(
    g: Grammar, max_len: int, budget: int = DEFAULT_WORD_BUDGET
) -> list[list[int]]:
    """``result[m][i]``: number of derivation trees of the i-th word of length m."""
    check_budget(g.n_letters, max_len, budget)
    sg = as_short_gnf(g)
    if sg is None:
        return [
            [count_derivations(g, w) for w in words_of_length(g.alphabet, m)]
            for m in range(max_len + 1)
        ]
    sg = trim_grammar(sg)
    table = encode_short_gnf(sg)
    return kernels.start_counts(
        len(sg.nonterminals),
        sg.n_letters,
        table.prods,
        table.eps,
        table.nt_index[sg.start],
        max_len,
    )


def count_derivations(g: Grammar, word: Sequence[str]) -> int:
    """Number of distinct derivation trees of ``word`` from the start symbol."""
    word = tuple(word)
    letters = set(g.alphabet)
    if any(a not in letters for a in word):
        return 0
    try:
        sg = validate_short_gnf(g)
    except GrammarShapeError:
        return _general_chart(g, word)
    return _short_gnf_count(sg, word)


def _short_gnf_count(g: ShortGnfGrammar, word: Word) -> int:
    by_lhs: dict[str, list[tuple[str, ...]]] = defaultdict(list)
    for lhs, rhs in g.productions:
        by_lhs[lhs].append(rhs)

    @lru_cache(maxsize=None)
    def count(x: str, i: int, j: int) -> int:
        total = 0
        for rhs in by_lhs[x]:
            if not rhs:
                total += i == j
            elif i < j and word[i] == rhs[0]:
                for k in range(i + 1, j + 1):
                    left = count(rhs[1], i + 1, k)
                    if left:
                        total += left * count(rhs[2], k, j)
        return total

    return count(g.start, 0, len(word))


def _unit_order(g: Grammar) -> list[str]:
    """Topological order of the nullable-context unit graph (dependencies first)."""
    letters = set(g.alphabet)
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.productions:
            if lhs not in nullable and all(s in nullable for s in rhs):
                nullable.add(lhs)
                changed = True
    deps: dict[str, set[str]] = {nt: set() for nt in g.nonterminals}
    for lhs, rhs in g.productions:
        for pos, s in enumerate(rhs):
            if s in letters:
                continue
            if all(t in nullable for t in rhs[:pos]) and all(t in nullable for t in rhs[pos + 1 :]):
                deps[lhs].add(s)
    order: list[str] = []
    state: dict[str, int] = {}

    def visit(x: str, path: list[str]) -> None:
        mark = state.get(x)
        if mark == 2:
            return
        if mark == 1:
            cycle = path[path.index(x) :] + [x]
            raise InfiniteAmbiguity("cyclic unit derivation " + " => ".join(cycle))
        state[x] = 1
        path.append(x)
        for y in sorted(deps[x]):
            visit(y, path)
        path.pop()
        state[x] = 2
        order.append(x)

    for nt in g.nonterminals:
        visit(nt, [])
    return order


def _general_chart(g: Grammar, word: Word) -> int:
    g = trim_grammar(g)
    order = _unit_order(g)
    letters = set(g.alphabet)
    n = len(word)
    by_lhs: dict[str, list[tuple[str, ...]]] = defaultdict(list)
    for lhs, rhs in g.productions:
        by_lhs[lhs].append(rhs)
    chart: dict[tuple[str, int, int], int] = defaultdict(int)
    for length in range(n + 1):
        for i in range(n - length + 1):
            j = i + length
            for x in order:
                total = 0
                for rhs in by_lhs[x]:
                    ways = {i: 1}
                    for s in rhs:
                        nxt: dict[int, int] = defaultdict(int)
                        for k, c in ways.items():
                            if s in letters:
                                if k < j and word[k] == s:
                                    nxt[k + 1] += c
                            else:
                                for k2 in range(k, j + 1):
                                    v = chart.get((s, k, k2), 0)
                                    if v:
                                        nxt[k2] += c * v
                        ways = nxt
                        if not ways:
                            break
                    total += ways.get(j, 0)
                if total:
                    chart[(x, i, j)] = total
    return chart.get((g.start, 0, n), 0)


def check_unambiguous_up_to(
    g: Grammar, max_len: int, budget: int = DEFAULT_WORD_BUDGET
) -> OkUpTo | Ambiguous:
    """Bounded lint: the first word (length-lex) with two or more trees, if any."""
    counts = derivation_counts_by_length(g, max_len, budget)
    for m, row in enumerate(counts):
        for idx, c in enumerate(row):
            if c >= 2:
                return Ambiguous(word_from_index(g.alphabet, idx, m), c)
    return OkUpTo(max_len)


def accepts(g: Grammar, word: Sequence[str]) -> bool:
    return count_derivations(g, word) > 0
