"""Regular expression trees, the ``.rx`` text format, and the position automaton.

Syntax: letter tokens separated by whitespace, ``eps``, ``empty``, ``|`` for
union, juxtaposition for concatenation, postfix ``*`` and parentheses.  An
optional first line ``alphabet a b c`` fixes the ambient alphabet.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence, Union as TUnion

from .grammar import FormatError, Word, check_alphabet

KEYWORDS = ("eps", "empty")


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Eps:
    pass


@dataclass(frozen=True)
class Letter:
    symbol: str


@dataclass(frozen=True)
class Union:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValueError("Union needs at least two children")


@dataclass(frozen=True)
class Concat:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValueError("Concat needs at least two children")


@dataclass(frozen=True)
class Star:
    child: object


RegexAst = TUnion[Empty, Eps, Letter, Union, Concat, Star]

EMPTY = Empty()
EPS = Eps()


class RegexShapeError(ValueError):
    """The expression is outside the fragment an operation supports."""


# -- smart constructors (flatten, drop neutral elements) ---------------------


def union(*parts: RegexAst) -> RegexAst:
    flat: list[RegexAst] = []
    for p in parts:
        if isinstance(p, Union):
            flat.extend(p.children)
        elif not isinstance(p, Empty):
            flat.append(p)
    if not flat:
        return EMPTY
    return flat[0] if len(flat) == 1 else Union(tuple(flat))


def concat(*parts: RegexAst) -> RegexAst:
    flat: list[RegexAst] = []
    for p in parts:
        if isinstance(p, Empty):
            return EMPTY
        if isinstance(p, Concat):
            flat.extend(p.children)
        elif not isinstance(p, Eps):
            flat.append(p)
    if not flat:
        return EPS
    return flat[0] if len(flat) == 1 else Concat(tuple(flat))


def star(e: RegexAst) -> RegexAst:
    if isinstance(e, (Empty, Eps)):
        return EPS
    return Star(e)


def letters_union(letters: Iterable[str]) -> RegexAst:
    return union(*(Letter(a) for a in letters))


def power(e: RegexAst, k: int) -> RegexAst:
    return concat(*([e] * k))


# -- structural queries --------------------------------------------------------


def size(e: RegexAst) -> int:
    """Number of AST nodes."""
    if isinstance(e, (Union, Concat)):
        return 1 + sum(size(c) for c in e.children)
    if isinstance(e, Star):
        return 1 + size(e.child)
    return 1


def letters_used(e: RegexAst) -> set[str]:
    if isinstance(e, Letter):
        return {e.symbol}
    if isinstance(e, (Union, Concat)):
        return set().union(*(letters_used(c) for c in e.children))
    if isinstance(e, Star):
        return letters_used(e.child)
    return set()


def nullable(e: RegexAst) -> bool:
    if isinstance(e, Eps) or isinstance(e, Star):
        return True
    if isinstance(e, Union):
        return any(nullable(c) for c in e.children)
    if isinstance(e, Concat):
        return all(nullable(c) for c in e.children)
    return False


def _first_letters(e: RegexAst) -> list[str]:
    order: dict[str, None] = {}

    def walk(x):
        if isinstance(x, Letter):
            order.setdefault(x.symbol, None)
        elif isinstance(x, (Union, Concat)):
            for c in x.children:
                walk(c)
        elif isinstance(x, Star):
            walk(x.child)

    walk(e)
    return list(order)


# -- text format ---------------------------------------------------------------


@dataclass(frozen=True)
class Regex:
    """An expression together with its ambient alphabet."""

    alphabet: tuple[str, ...]
    expr: RegexAst

    def __post_init__(self):
        object.__setattr__(self, "alphabet", check_alphabet(self.alphabet))
        bad = [a for a in self.alphabet if a in KEYWORDS or _TOKEN.fullmatch(a) is None]
        if bad:
            raise ValueError(f"letters unusable in regex text: {bad}")
        stray = letters_used(self.expr) - set(self.alphabet)
        if stray:
            raise ValueError(f"letters outside the alphabet: {sorted(stray)}")

    @property
    def n_letters(self) -> int:
        return len(self.alphabet)

    def to_text(self) -> str:
        return serialize_regex(self)


_TOKEN = re.compile(r"[^\s()|*]+")
_LEX = re.compile(r"\s*(?:([()|*])|([^\s()|*]+))")


def _tokenize(text: str) -> list[str]:
    tokens, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _LEX.match(text, pos)
        if m is None:
            raise FormatError(f"unexpected character at offset {pos}")
        tokens.append(m.group(1) or m.group(2))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[str], letters: set[str] | None):
        self.tokens, self.pos, self.letters = tokens, 0, letters

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> RegexAst:
        if not self.tokens:
            raise FormatError("empty expression (write 'empty' or 'eps')")
        e = self.alternation()
        if self.peek() is not None:
            raise FormatError(f"unexpected token {self.peek()!r}")
        return e

    def alternation(self) -> RegexAst:
        parts = [self.sequence()]
        while self.peek() == "|":
            self.take()
            parts.append(self.sequence())
        return parts[0] if len(parts) == 1 else Union(tuple(parts))

    def sequence(self) -> RegexAst:
        parts = []
        while self.peek() not in (None, "|", ")"):
            parts.append(self.postfix())
        if not parts:
            raise FormatError("missing operand")
        return parts[0] if len(parts) == 1 else Concat(tuple(parts))

    def postfix(self) -> RegexAst:
        e = self.atom()
        while self.peek() == "*":
            self.take()
            e = Star(e)
        return e

    def atom(self) -> RegexAst:
        tok = self.take()
        if tok == "(":
            e = self.alternation()
            if self.peek() != ")":
                raise FormatError("unbalanced parenthesis")
            self.take()
            return e
        if tok in (")", "|", "*"):
            raise FormatError(f"unexpected {tok!r}")
        if tok == "eps":
            return EPS
        if tok == "empty":
            return EMPTY
        if self.letters is not None and tok not in self.letters:
            raise FormatError(f"letter {tok!r} not in the declared alphabet")
        return Letter(tok)


def parse_regex(text: str, alphabet: Sequence[str] | None = None) -> Regex:
    """Parse ``.rx`` text.  Without a header or ``alphabet`` argument the
    alphabet is the letters in order of first occurrence."""
    lines = [ln.split("#", 1)[0] for ln in text.splitlines()]
    body_lines = []
    for ln in lines:
        stripped = ln.strip()
        if stripped.startswith("alphabet ") or stripped == "alphabet":
            if alphabet is not None:
                raise FormatError("repeated alphabet declaration")
            alphabet = stripped.split()[1:]
        elif stripped:
            body_lines.append(stripped)
    try:
        letters = set(check_alphabet(alphabet)) if alphabet is not None else None
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    expr = _Parser(_tokenize(" ".join(body_lines)), letters).parse()
    if alphabet is None:
        alphabet = _first_letters(expr)
        if not alphabet:
            raise FormatError("cannot infer an alphabet from a letter-free expression")
    try:
        return Regex(tuple(alphabet), expr)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def format_regex(e: RegexAst) -> str:
    return _fmt(e, 0)


def _fmt(e: RegexAst, level: int) -> str:
    # level 0: union context, 1: concatenation operand, 2: star operand
    if isinstance(e, Empty):
        return "empty"
    if isinstance(e, Eps):
        return "eps"
    if isinstance(e, Letter):
        return e.symbol
    if isinstance(e, Union):
        s = " | ".join(_fmt(c, 1) if not isinstance(c, Union) else f"({_fmt(c, 0)})" for c in e.children)
        return s if level == 0 else f"({s})"
    if isinstance(e, Concat):
        s = " ".join(_fmt(c, 2) if not isinstance(c, Concat) else f"({_fmt(c, 0)})" for c in e.children)
        return s if level <= 1 else f"({s})"
    if isinstance(e, Star):
        return _fmt(e.child, 2) + "*"
    raise TypeError(f"not a regex node: {e!r}")


def serialize_regex(r: Regex) -> str:
    return f"alphabet {' '.join(r.alphabet)}\n{format_regex(r.expr)}\n"


# -- direct semantics (oracles independent of the automaton path) -------------


def language_by_length(e: RegexAst, max_len: int) -> list[set[Word]]:
    """Words matched by ``e`` grouped by length, up to ``max_len``."""
    if isinstance(e, Empty):
        return [set() for _ in range(max_len + 1)]
    if isinstance(e, Eps):
        return [{()}] + [set() for _ in range(max_len)]
    if isinstance(e, Letter):
        out = [set() for _ in range(max_len + 1)]
        if max_len >= 1:
            out[1].add((e.symbol,))
        return out
    if isinstance(e, Union):
        parts = [language_by_length(c, max_len) for c in e.children]
        return [set().union(*(p[m] for p in parts)) for m in range(max_len + 1)]
    if isinstance(e, Concat):
        return reduce(
            lambda x, y: _concat_sets(x, y, max_len),
            (language_by_length(c, max_len) for c in e.children),
        )
    if isinstance(e, Star):
        inner = language_by_length(e.child, max_len)
        inner[0] = set()
        out = [{()}] + [set() for _ in range(max_len)]
        for m in range(1, max_len + 1):
            for k in range(1, m + 1):
                for u in inner[k]:
                    for v in out[m - k]:
                        out[m].add(u + v)
        return out
    raise TypeError(f"not a regex node: {e!r}")


def _concat_sets(x: list[set[Word]], y: list[set[Word]], max_len: int) -> list[set[Word]]:
    out = [set() for _ in range(max_len + 1)]
    for i, xs in enumerate(x):
        if not xs:
            continue
        for j in range(max_len - i + 1):
            for u in xs:
                for v in y[j]:
                    out[i + j].add(u + v)
    return out


def match_count(e: RegexAst, word: Sequence[str]) -> int:
    """Number of distinct ways ``e`` matches ``word`` (parse trees).

    A star over a nullable child has infinitely many parses of some words and
    is rejected.
    """
    word = tuple(word)
    n = len(word)

    def spans(x) -> dict[tuple[int, int], int]:
        if isinstance(x, Empty):
            return {}
        if isinstance(x, Eps):
            return {(i, i): 1 for i in range(n + 1)}
        if isinstance(x, Letter):
            return {(i, i + 1): 1 for i in range(n) if word[i] == x.symbol}
        if isinstance(x, Union):
            acc: Counter = Counter()
            for c in x.children:
                acc.update(spans(c))
            return dict(acc)
        if isinstance(x, Concat):
            return reduce(_compose, (spans(c) for c in x.children))
        if isinstance(x, Star):
            if nullable(x.child):
                raise RegexShapeError("star over a nullable expression")
            body = spans(x.child)
            # ways[i][j]: sequences of non-empty iterations covering i..j
            ways: dict[tuple[int, int], int] = {}
            for i in range(n, -1, -1):
                ways[(i, i)] = 1
                for j in range(i + 1, n + 1):
                    total = 0
                    for k in range(i + 1, j + 1):
                        b = body.get((i, k))
                        if b:
                            total += b * ways.get((k, j), 0)
                    if total:
                        ways[(i, j)] = total
            return ways
        raise TypeError(f"not a regex node: {x!r}")

    return spans(e).get((0, n), 0)


def _compose(x: dict, y: dict) -> dict:
    out: Counter = Counter()
    by_start: dict[int, list[tuple[int, int]]] = {}
    for (k, j), c in y.items():
        by_start.setdefault(k, []).append((j, c))
    for (i, k), c in x.items():
        for j, d in by_start.get(k, ()):
            out[(i, j)] += c * d
    return dict(out)


# -- position (Glushkov) automaton --------------------------------------------


def regex_to_nfa(r: Regex | RegexAst, alphabet: Sequence[str] | None = None):
    """Position automaton whose accepting runs on w correspond one-to-one to
    the parses of w by the expression.

    Rejected: stars over nullable expressions, and expressions where the
    correspondence would need a transition or acceptance of multiplicity two
    (e.g. ``(eps | eps) a``), which a plain automaton cannot carry.
    """
    from .automaton import FiniteAutomaton

    if isinstance(r, Regex):
        e, alphabet = r.expr, r.alphabet
    else:
        e = r
        if alphabet is None:
            raise ValueError("an alphabet is required for a bare expression")
    positions: list[str] = []

    def walk(x) -> tuple[int, Counter, Counter, Counter]:
        # (nullable multiplicity, first, last, follow)
        if isinstance(x, Empty):
            return 0, Counter(), Counter(), Counter()
        if isinstance(x, Eps):
            return 1, Counter(), Counter(), Counter()
        if isinstance(x, Letter):
            positions.append(x.symbol)
            p = len(positions)
            return 0, Counter({p: 1}), Counter({p: 1}), Counter()
        if isinstance(x, Union):
            nul, first, last, follow = 0, Counter(), Counter(), Counter()
            for c in x.children:
                n2, f2, l2, fo2 = walk(c)
                nul += n2
                first.update(f2)
                last.update(l2)
                follow.update(fo2)
            return nul, first, last, follow
        if isinstance(x, Concat):
            nul, first, last, follow = walk(x.children[0])
            for c in x.children[1:]:
                n2, f2, l2, fo2 = walk(c)
                follow.update(fo2)
                for p, cp in last.items():
                    for q, cq in f2.items():
                        follow[(p, q)] += cp * cq
                first = first + _scale(f2, nul)
                last = l2 + _scale(last, n2)
                nul *= n2
            return nul, first, last, follow
        if isinstance(x, Star):
            n2, f2, l2, fo2 = walk(x.child)
            if n2:
                raise RegexShapeError("star over a nullable expression is not supported")
            follow = Counter(fo2)
            for p, cp in l2.items():
                for q, cq in f2.items():
                    follow[(p, q)] += cp * cq
            return 1, f2, l2, follow
        raise TypeError(f"not a regex node: {x!r}")

    nul, first, last, follow = walk(e)
    multi = [k for k, v in list(first.items()) + list(last.items()) + list(follow.items()) if v > 1]
    if nul > 1 or multi:
        raise RegexShapeError(
            "expression matches some word along two parses that share a position path"
        )
    states = ["q0"] + [f"p{i}" for i in range(1, len(positions) + 1)]
    trans = [("q0", positions[q - 1], f"p{q}") for q in sorted(first)]
    trans += [(f"p{p}", positions[q - 1], f"p{q}") for p, q in sorted(follow)]
    accepting = {f"p{p}" for p in last}
    if nul:
        accepting.add("q0")
    return FiniteAutomaton(tuple(alphabet), tuple(states), "q0", frozenset(accepting), tuple(trans))


def _scale(c: Counter, k: int) -> Counter:
    return Counter({key: v * k for key, v in c.items() if v * k})
