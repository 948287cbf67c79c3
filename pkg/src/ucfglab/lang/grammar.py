"""Context-free grammars, the ``.gnf`` text format, and short-GNF normalisation.

A grammar file is line based::

    # universal language over {a, b}
    alphabet a b
    start S
    S ->
    S -> a E S
    S -> b E S
    E ->

Declared alphabet tokens are terminals; every other right-hand-side token is
a nonterminal.  An optional ``nonterminals X Y ...`` line fixes the order of
nonterminals (the serializer always writes it so round trips are exact).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

Word = tuple[str, ...]
Production = tuple[str, tuple[str, ...]]


class FormatError(ValueError):
    """Malformed input text; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class GrammarShapeError(ValueError):
    """A grammar does not have the production shape an operation requires."""

    def __init__(self, message: str, offending: Sequence[Production] = ()):
        self.offending = tuple(offending)
        if offending:
            message += ": " + "; ".join(format_production(p) for p in offending)
        super().__init__(message)


def format_word(word: Iterable[str]) -> str:
    """Render a word; single-character letters are juxtaposed, longer ones spaced."""
    word = tuple(word)
    if all(len(a) == 1 for a in word):
        return "".join(word)
    return " ".join(word)


def format_production(p: Production) -> str:
    lhs, rhs = p
    return f"{lhs} -> {' '.join(rhs)}".rstrip()


def check_alphabet(letters: Sequence[str]) -> tuple[str, ...]:
    letters = tuple(letters)
    if not letters:
        raise ValueError("alphabet must contain at least one letter")
    if len(set(letters)) != len(letters):
        raise ValueError(f"alphabet letters must be distinct: {letters}")
    for a in letters:
        if not a or any(ch.isspace() for ch in a):
            raise ValueError(f"invalid letter token {a!r}")
    return letters


@dataclass(frozen=True)
class Grammar:
    alphabet: tuple[str, ...]
    nonterminals: tuple[str, ...]
    start: str
    productions: tuple[Production, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphabet", check_alphabet(self.alphabet))
        object.__setattr__(self, "nonterminals", tuple(self.nonterminals))
        object.__setattr__(
            self, "productions", tuple((lhs, tuple(rhs)) for lhs, rhs in self.productions)
        )
        nts = set(self.nonterminals)
        if len(nts) != len(self.nonterminals):
            raise ValueError("duplicate nonterminal declaration")
        if nts & set(self.alphabet):
            raise ValueError(f"nonterminals clash with letters: {sorted(nts & set(self.alphabet))}")
        if self.start not in nts:
            raise ValueError(f"start symbol {self.start!r} is not a nonterminal")
        seen = set()
        symbols = nts | set(self.alphabet)
        for p in self.productions:
            lhs, rhs = p
            if lhs not in nts:
                raise ValueError(f"undeclared left-hand side {lhs!r}")
            for s in rhs:
                if s not in symbols:
                    raise ValueError(f"undeclared symbol {s!r} in {format_production(p)}")
            if p in seen:
                raise ValueError(f"duplicate production {format_production(p)}")
            seen.add(p)

    @property
    def n_letters(self) -> int:
        return len(self.alphabet)

    def productions_of(self, nt: str) -> list[tuple[str, ...]]:
        return [rhs for lhs, rhs in self.productions if lhs == nt]

    def is_terminal(self, symbol: str) -> bool:
        return symbol in self._letter_set

    @property
    def _letter_set(self) -> frozenset[str]:
        return frozenset(self.alphabet)

    def to_text(self) -> str:
        return serialize_grammar(self)


@dataclass(frozen=True)
class ShortGnfGrammar(Grammar):
    """Grammar whose productions are all ``X -> `` or ``X -> a Y Z``."""

    def __post_init__(self):
        super().__post_init__()
        bad = [p for p in self.productions if not _is_short_gnf(p, self.alphabet)]
        if bad:
            raise GrammarShapeError("not in short Greibach normal form", bad)


def _is_short_gnf(p: Production, alphabet: Sequence[str]) -> bool:
    rhs = p[1]
    if not rhs:
        return True
    return len(rhs) == 3 and rhs[0] in alphabet and rhs[1] not in alphabet and rhs[2] not in alphabet


def make_grammar(
    alphabet: Sequence[str],
    start: str,
    productions: Iterable[tuple[str, Sequence[str]]],
    nonterminals: Sequence[str] = (),
    cls: type[Grammar] = Grammar,
) -> Grammar:
    """Build a grammar, inferring nonterminals from productions (first-seen order)."""
    prods = [(lhs, tuple(rhs)) for lhs, rhs in productions]
    letters = set(alphabet)
    order: dict[str, None] = dict.fromkeys(nonterminals)
    order.setdefault(start, None)
    for lhs, rhs in prods:
        order.setdefault(lhs, None)
        for s in rhs:
            if s not in letters:
                order.setdefault(s, None)
    return cls(tuple(alphabet), tuple(order), start, tuple(prods))


def parse_grammar(text: str) -> Grammar:
    alphabet: tuple[str, ...] | None = None
    start: str | None = None
    declared: list[str] = []
    prods: list[Production] = []
    seen: dict[Production, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" in line:
            lhs_part, rhs_part = line.split("->", 1)
            lhs = lhs_part.split()
            if len(lhs) != 1:
                raise FormatError("production needs exactly one left-hand symbol", lineno)
            if alphabet is None:
                raise FormatError("production before 'alphabet' line", lineno)
            if lhs[0] in alphabet:
                raise FormatError(f"terminal {lhs[0]!r} on left-hand side", lineno)
            p = (lhs[0], tuple(rhs_part.split()))
            if p in seen:
                raise FormatError(
                    f"duplicate production {format_production(p)} (first on line {seen[p]})", lineno
                )
            seen[p] = lineno
            prods.append(p)
            continue
        head, *rest = line.split()
        if head == "alphabet":
            if alphabet is not None:
                raise FormatError("repeated 'alphabet' line", lineno)
            try:
                alphabet = check_alphabet(rest)
            except ValueError as exc:
                raise FormatError(str(exc), lineno) from None
        elif head == "start":
            if len(rest) != 1:
                raise FormatError("'start' takes exactly one symbol", lineno)
            start = rest[0]
        elif head == "nonterminals":
            declared.extend(rest)
        else:
            raise FormatError(f"unrecognised line {line!r}", lineno)
    if alphabet is None:
        raise FormatError("missing 'alphabet' line")
    if start is None:
        raise FormatError("missing 'start' line")
    if start in alphabet:
        raise FormatError(f"start symbol {start!r} is a terminal")
    try:
        return make_grammar(alphabet, start, prods, declared)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def serialize_grammar(g: Grammar) -> str:
    lines = [
        "alphabet " + " ".join(g.alphabet),
        "start " + g.start,
        "nonterminals " + " ".join(g.nonterminals),
    ]
    lines.extend(format_production(p) for p in g.productions)
    return "\n".join(lines) + "\n"


def validate_short_gnf(g: Grammar) -> ShortGnfGrammar:
    if isinstance(g, ShortGnfGrammar):
        return g
    bad = [p for p in g.productions if not _is_short_gnf(p, g.alphabet)]
    if bad:
        raise GrammarShapeError("not in short Greibach normal form", bad)
    return ShortGnfGrammar(g.alphabet, g.nonterminals, g.start, g.productions)


def fresh_name(base: str, taken: set[str]) -> str:
    name, i = base, 1
    while name in taken:
        name = f"{base}{i}"
        i += 1
    taken.add(name)
    return name


# Helpers for long bodies are cut off here; beyond it the left-factoring does
# not close (e.g. X -> a X X X needs unboundedly many sequence helpers).
MAX_SEQUENCE_HELPERS = 2000


def binarize_prefixed(g: Grammar, max_helpers: int = MAX_SEQUENCE_HELPERS) -> ShortGnfGrammar:
    """Rewrite a Greibach-prefixed grammar into short GNF.

    Accepted bodies are empty or ``a N1 ... Nj``.  Padding uses a fresh
    nonterminal with the single production ``E ->``; bodies with j >= 3 are
    left-factored through sequence helpers standing for ``N2 ... Nj``.  Every
    rewrite is a bijection on derivation trees, so word counts and ambiguity
    are preserved.
    """
    letters = set(g.alphabet)
    bad = [
        p
        for p in g.productions
        if p[1] and (p[1][0] not in letters or any(s in letters for s in p[1][1:]))
    ]
    if bad:
        raise GrammarShapeError(
            "expected bodies of the form 'a N1 ... Nj' (general GNF conversion is not supported)",
            bad,
        )
    if all(_is_short_gnf(p, g.alphabet) for p in g.productions):
        return validate_short_gnf(g)

    taken = set(g.nonterminals) | letters
    eps = fresh_name("E", taken)
    # output productions per nonterminal, as (letter, Y, Z) or None for epsilon
    out: dict[str, list[tuple[str, str, str] | None]] = {nt: [] for nt in g.nonterminals}
    helpers: dict[tuple[str, tuple[str, ...]], str] = {}
    pending: list[tuple[str, str, tuple[str, ...]]] = []

    def seq(head: str, rest: tuple[str, ...]) -> str:
        # nonterminal deriving exactly head . rest[0] ... rest[-1]
        if not rest:
            return head
        key = (head, rest)
        if key not in helpers:
            if len(helpers) >= max_helpers:
                raise GrammarShapeError(
                    f"left-factoring of long bodies did not close after {max_helpers} helpers"
                )
            name = fresh_name("Q" + str(len(helpers)), taken)
            helpers[key] = name
            out[name] = []
            pending.append((name, head, rest))
        return helpers[key]

    for lhs, rhs in g.productions:
        if not rhs:
            out[lhs].append(None)
            continue
        a, body = rhs[0], rhs[1:]
        if len(body) == 0:
            out[lhs].append((a, eps, eps))
        elif len(body) == 1:
            out[lhs].append((a, body[0], eps))
        else:
            out[lhs].append((a, body[0], seq(body[1], body[2:])))

    def expand(head: str, rest: tuple[str, ...]) -> list[tuple[str, str, str] | None]:
        result: list[tuple[str, str, str] | None] = []
        for prod in out[head] if head != eps else [None]:
            if prod is None:
                if rest:
                    result.extend(expand(rest[0], rest[1:]))
                else:
                    result.append(None)
            else:
                a, y, z = prod
                result.append((a, y, seq(z, rest)))
        return result

    # FIFO: a helper's head is always created before the helper itself
    i = 0
    while i < len(pending):
        name, head, rest = pending[i]
        out[name] = expand(head, rest)
        i += 1

    prods: list[Production] = []
    for nt, bodies in out.items():
        for b in bodies:
            prods.append((nt, () if b is None else b))
    prods.append((eps, ()))
    order = list(g.nonterminals) + [n for n in out if n not in g.nonterminals] + [eps]
    return ShortGnfGrammar(g.alphabet, tuple(order), g.start, tuple(dict.fromkeys(prods)))


def trim_grammar(g: Grammar) -> Grammar:
    """Drop unproductive and unreachable nonterminals (the start always stays)."""
    letters = set(g.alphabet)
    productive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.productions:
            if lhs not in productive and all(s in letters or s in productive for s in rhs):
                productive.add(lhs)
                changed = True
    useful_prods = [
        (lhs, rhs)
        for lhs, rhs in g.productions
        if lhs in productive and all(s in letters or s in productive for s in rhs)
    ]
    reach = {g.start}
    stack = [g.start]
    by_lhs: dict[str, list[tuple[str, ...]]] = {}
    for lhs, rhs in useful_prods:
        by_lhs.setdefault(lhs, []).append(rhs)
    while stack:
        x = stack.pop()
        for rhs in by_lhs.get(x, ()):
            for s in rhs:
                if s not in letters and s not in reach:
                    reach.add(s)
                    stack.append(s)
    prods = tuple(p for p in useful_prods if p[0] in reach)
    nts = tuple(nt for nt in g.nonterminals if nt in reach)
    return type(g)(g.alphabet, nts, g.start, prods)


@dataclass(frozen=True)
class SymbolTable:
    """Integer encoding of a short-GNF grammar used by the chart kernels."""

    nt_index: dict[str, int]
    letter_index: dict[str, int]
    prods: list[tuple[int, int, int, int]] = field(default_factory=list)
    eps: list[int] = field(default_factory=list)


def encode_short_gnf(g: ShortGnfGrammar) -> SymbolTable:
    nt_index = {nt: i for i, nt in enumerate(g.nonterminals)}
    letter_index = {a: i for i, a in enumerate(g.alphabet)}
    prods, eps = [], [0] * len(nt_index)
    for lhs, rhs in g.productions:
        if rhs:
            prods.append((nt_index[lhs], letter_index[rhs[0]], nt_index[rhs[1]], nt_index[rhs[2]]))
        else:
            eps[nt_index[lhs]] = 1
    return SymbolTable(nt_index, letter_index, prods, eps)
