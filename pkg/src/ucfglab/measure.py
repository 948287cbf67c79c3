"""Coin-flip measures.

The coin-flip process over n letters stops with probability 1/(n+1) and
otherwise emits one of the letters uniformly, so a word w has measure
(1/(n+1))^(|w|+1) and a language the sum over its words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .convrec import iter_component
from .counting import AmbiguityDetected, require_short_gnf, ucfg_counting_system
from .enclosure import Enclosure, MeasureEnclosure
from .lang.automaton import (
    AmbiguousAutomaton,
    FiniteAutomaton,
    ambiguity_witness,
    count_runs,
    require_unambiguous,
    strongly_connected_components,
    transition_counts,
    trim,
)
from .lang.grammar import Grammar, trim_grammar
from .lang.regex import (
    Concat,
    Empty,
    Eps,
    Letter,
    Regex,
    RegexAst,
    RegexShapeError,
    Star,
    Union,
    language_by_length,
    match_count,
    regex_to_nfa,
)

DEFAULT_WIDTH_FLOOR = Fraction(1, 2**256)
MAX_TERMS = 200_000


def word_measure(word: Sequence[str], n: int) -> Fraction:
    return Fraction(1, (n + 1) ** (len(word) + 1))


def measure_sigma_upto(n: int, m: int, k: int) -> Fraction:
    """μ(Σ_m^{<=k}) inside Σ_n by direct summation over lengths."""
    return sum((Fraction(m**i, (n + 1) ** (i + 1)) for i in range(k + 1)), Fraction(0))


def measure_sigma_upto_closed(n: int, m: int, k: int) -> Fraction:
    """Closed form (1/(n-m+1))·(1 - (m/(n+1))^(k+1))."""
    return Fraction(1, n - m + 1) * (1 - Fraction(m, n + 1) ** (k + 1))


# -- automata --------------------------------------------------------------------


class MeasureNotPinned(ValueError):
    def __init__(self, enclosure: MeasureEnclosure):
        self.enclosure = enclosure
        super().__init__(
            f"series fallback could not isolate a rational in [{enclosure.lo}, {enclosure.hi}]"
        )


@dataclass(frozen=True)
class AutomatonMeasure:
    value: Fraction | None
    path: str  # "linear-system" or "series-fallback"
    enclosure: MeasureEnclosure | None = None


def _solve(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Exact Gauss-Jordan elimination; None when the matrix is singular."""
    size = len(rhs)
    a = [row[:] + [b] for row, b in zip(matrix, rhs)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        pv = a[col][col]
        a[col] = [v / pv for v in a[col]]
        for r in range(size):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [a[r][size] for r in range(size)]


def automaton_measure(m: FiniteAutomaton, fallback_terms: int = 2000) -> AutomatonMeasure:
    """Measure of an unambiguous automaton, with the path taken.

    On the trimmed automaton, x_q = [q accepting]/(n+1) + Σ_{q->q'} x_{q'}/(n+1).
    Trimmed and unambiguous implies f(k) <= n^k for every state's language, so
    the spectral radius of the transition-count matrix is at most n and the
    system is regular; the series fallback exists for robustness only.
    """
    t = trim(m)
    require_unambiguous(t)
    n = len(t.alphabet)
    if not t.accepting:
        return AutomatonMeasure(Fraction(0), "linear-system")
    b = n + 1
    succ: dict[object, dict[object, int]] = {q: {} for q in t.states}
    for p, _, q in t.transitions:
        succ[p][q] = succ[p].get(q, 0) + 1
    # solve component by component, successors first
    value: dict[object, Fraction] = {}
    for comp in strongly_connected_components(t):
        pos = {q: i for i, q in enumerate(comp)}
        matrix = [[Fraction(int(i == j)) for j in range(len(comp))] for i in range(len(comp))]
        rhs = []
        for i, p in enumerate(comp):
            r = Fraction(int(p in t.accepting), b)
            for q, c in succ[p].items():
                if q in pos:
                    matrix[i][pos[q]] -= Fraction(c, b)
                else:
                    r += Fraction(c, b) * value[q]
            rhs.append(r)
        x = _solve(matrix, rhs)
        if x is None:
            break
        value.update(zip(comp, x))
    else:
        return AutomatonMeasure(value[t.initial], "linear-system")
    return _series_fallback(t, fallback_terms)


def _series_fallback(t: FiniteAutomaton, terms: int) -> AutomatonMeasure:
    n = len(t.alphabet)
    runs = count_runs(t, terms)
    s = sum((Fraction(c, (n + 1) ** (k + 1)) for k, c in enumerate(runs)), Fraction(0))
    tail = Fraction(n, n + 1) ** (terms + 1)
    enc = MeasureEnclosure(s, s + tail, terms + 1, tail)
    # the value solves a system with integer matrix (n+1)I - M; Hadamard bounds its denominator
    size = len(t.states)
    row_norm = max(
        math.isqrt(sum(v * v for v in row)) + 1 for row in _scaled_matrix(t)
    )
    bound = row_norm**size
    guess = ((enc.lo + enc.hi) / 2).limit_denominator(bound)
    if guess in enc and enc.width * 2 * bound * bound < 1:
        return AutomatonMeasure(guess, "series-fallback", enc)
    return AutomatonMeasure(None, "series-fallback", enc)


def _scaled_matrix(t: FiniteAutomaton) -> list[list[int]]:
    n = len(t.alphabet)
    counts = transition_counts(t)
    return [
        [(n + 1) * int(i == j) - counts[i][j] for j in range(len(counts))]
        for i in range(len(counts))
    ]


def measure_automaton_exact(m: FiniteAutomaton) -> Fraction:
    result = automaton_measure(m)
    if result.value is None:
        raise MeasureNotPinned(result.enclosure)
    return result.value


# -- grammars ----------------------------------------------------------------------


def terms_for_width(n: int, width: Fraction) -> int:
    """Least N with (n/(n+1))^(N+1) <= width."""
    width = Fraction(width)
    if width <= 0:
        raise ValueError("target width must be positive")
    ratio = Fraction(n, n + 1)
    N, tail = 0, ratio
    while tail > width:
        N += 1
        tail *= ratio
        if N > MAX_TERMS:
            raise ValueError(f"width {width} needs more than {MAX_TERMS} terms")
    return N


class _PartialSums:
    """Running S_N = Σ_{k<=N} f_S(k)/(n+1)^(k+1) with validated f_S(k) <= n^k."""

    def __init__(self, g: Grammar):
        g = require_short_gnf(g)
        self.n = g.n_letters
        self.values = iter_component(ucfg_counting_system(g))
        self.N = -1
        self.total = Fraction(0)
        self.weight = Fraction(1, self.n + 1)
        self.cap = 1
        self.tail = Fraction(1)

    def advance(self) -> None:
        v = next(self.values)
        self.N += 1
        if v > self.cap:
            raise AmbiguityDetected(self.N, int(v), self.n)
        self.total += v * self.weight
        self.weight /= self.n + 1
        self.cap *= self.n
        self.tail *= Fraction(self.n, self.n + 1)

    def enclosure(self) -> MeasureEnclosure:
        return MeasureEnclosure(self.total, self.total + self.tail, self.N + 1, self.tail)


def measure_ucfg_enclosure(g: Grammar, target_width: Fraction) -> MeasureEnclosure:
    """[S_N, S_N + (n/(n+1))^(N+1)] with the tail no wider than ``target_width``."""
    ps = _PartialSums(g)
    N = terms_for_width(ps.n, target_width)
    for _ in range(N + 1):
        ps.advance()
    return ps.enclosure()


def measure_enclosures(g: Grammar, N: int) -> list[MeasureEnclosure]:
    """Enclosures after 1, 2, ..., N+1 terms (each nested in the previous)."""
    ps = _PartialSums(g)
    out = []
    for _ in range(N + 1):
        ps.advance()
        out.append(ps.enclosure())
    return out


# -- comparison ------------------------------------------------------------------------

_CMP_ALIASES = {"<=": "<=", "≤": "<=", "le": "<=", "<": "<", "lt": "<",
                ">=": ">=", "≥": ">=", "ge": ">=", ">": ">", "gt": ">"}


def normalize_cmp(op: str) -> str:
    try:
        return _CMP_ALIASES[op]
    except KeyError:
        raise ValueError(f"unknown comparison {op!r} (use <=, <, >=, >)") from None


def decide_on_enclosure(lo: Fraction, hi: Fraction, op: str, eps: Fraction) -> bool | None:
    """Truth of ``μ op eps`` for every μ in [lo, hi], or None when the interval straddles."""
    op = normalize_cmp(op)
    if op == "<=":
        return True if hi <= eps else False if lo > eps else None
    if op == "<":
        return True if hi < eps else False if lo >= eps else None
    if op == ">=":
        return True if lo >= eps else False if hi < eps else None
    return True if lo > eps else False if hi <= eps else None


@dataclass(frozen=True)
class Comparison:
    result: bool | None  # None = Unknown
    enclosure: MeasureEnclosure

    @property
    def width(self) -> Fraction:
        return self.enclosure.width

    def __str__(self):
        return str(self.result) if self.result is not None else f"Unknown(width={self.width})"


def compare_measure(
    g: Grammar, op: str, eps: Fraction, width_floor: Fraction = DEFAULT_WIDTH_FLOOR
) -> Comparison:
    """Certified answer to ``μ(L(g)) op eps``, or Unknown once the width floor is reached.

    Equality with eps is never certified; enclosures only ever shrink towards it.
    """
    eps = Fraction(eps)
    if not 0 <= eps <= 1:
        raise ValueError("threshold must lie in [0, 1]")
    op = normalize_cmp(op)
    ps = _PartialSums(g)
    while True:
        ps.advance()
        enc = ps.enclosure()
        verdict = decide_on_enclosure(enc.lo, enc.hi, op, eps)
        if verdict is not None or enc.width <= width_floor:
            return Comparison(verdict, enc)
        if ps.N > MAX_TERMS:
            return Comparison(None, enc)


# -- measure equations ------------------------------------------------------------------
#
# In short GNF μ(aYZ) = μ(Y)μ(Z), so the measures satisfy y_X = [X -> ε]/(n+1) + Σ y_Y y_Z.
# The least solution is the derivation-weighted measure; it is μ(L(X)) exactly when
# the grammar is unambiguous, and exceeds it otherwise.


class EquationNotPinned(ValueError):
    """No certified upper bound was found (for instance at a critical component)."""


@dataclass(frozen=True)
class EquationEnclosure(Enclosure):
    """Enclosure of the least solution of the measure equations at the start symbol."""


class _MeasureEquations:
    def __init__(self, g: Grammar):
        g = require_short_gnf(trim_grammar(g))
        self.b = g.n_letters + 1
        names = [g.start] + [x for x in g.nonterminals if x != g.start]
        idx = {x: i for i, x in enumerate(names)}
        self.k = len(names)
        self.eps = [0] * self.k
        self.pairs: list[list[tuple[int, int]]] = [[] for _ in range(self.k)]
        for lhs, rhs in g.productions:
            if rhs:
                self.pairs[idx[lhs]].append((idx[rhs[1]], idx[rhs[2]]))
            else:
                self.eps[idx[lhs]] = 1

    def lower_step(self, v: list[int], scale: int) -> list[int]:
        """F(v) rounded down, all values scaled by ``scale``."""
        c = scale // self.b
        return [
            (c if e else 0) + sum(v[y] * v[z] for y, z in ps) // scale
            for e, ps in zip(self.eps, self.pairs)
        ]

    def is_post_fixed(self, u: list[int], scale: int) -> bool:
        """Exact test of F(u) <= u."""
        s2, b = scale * scale, self.b
        return all(
            e * s2 + b * sum(u[y] * u[z] for y, z in ps) <= b * scale * ux
            for e, ps, ux in zip(self.eps, self.pairs, u)
        )

    def direction(self, v: list[int], scale: int, rounds: int = 400) -> list[float] | None:
        """w = Σ J^i · 1 at v (so (I - J) w = 1), or None when the series does not settle."""
        vf = [x / scale for x in v]
        w = [1.0] * self.k
        for _ in range(rounds):
            nxt = [
                1.0 + sum(vf[z] * w[y] + vf[y] * w[z] for y, z in ps) for ps in self.pairs
            ]
            if max(nxt) > 1e12:
                return None
            if max(abs(a - b) for a, b in zip(nxt, w)) <= 1e-9 * max(nxt):
                return nxt
            w = nxt
        return None


def equation_enclosure(
    g: Grammar, target_width: Fraction, max_iterations: int = 5000
) -> EquationEnclosure:
    """Certified enclosure of the measure-equation value at the start symbol.

    The lower end is rounded-down Kleene iteration from 0 (every iterate stays
    below the least solution); the upper end is a rational point u with
    F(u) <= u checked exactly, which bounds the least solution from above.
    """
    target_width = Fraction(target_width)
    if target_width <= 0:
        raise ValueError("target width must be positive")
    eqs = _MeasureEquations(g)
    bits = max(32, math.ceil(-math.log2(target_width)) + 24)
    scale = 1 << bits
    v = [0] * eqs.k
    it = 0
    gate = float(target_width) * scale / 1024
    history: list[int] = []
    while it < max_iterations:
        change = 0
        for _ in range(16):
            nxt = eqs.lower_step(v, scale)
            change = max(b - a for a, b in zip(v, nxt))
            v = nxt
            it += 1
        if max(v) > scale << 32:
            raise EquationNotPinned(f"the measure equations diverge (value above 2^32 after {it} iterations)")
        if change > gate:
            history.append(change)
            # geometric convergence halves the step every so often; a critical system does not
            if len(history) >= 16 and history[-1] * 2 > history[-16]:
                raise EquationNotPinned(f"the measure equations look critical after {it} iterations")
            continue
        # v has settled: look for a post-fixed point just above it
        w = eqs.direction(v, scale)
        if w is None:
            raise EquationNotPinned(f"the measure equations look critical after {it} iterations")
        top = max(w)
        for shrink in (4, 64, 1024):
            delta = float(target_width) / (shrink * top)
            u = [vi + math.ceil(delta * wi * scale) + 1 for vi, wi in zip(v, w)]
            if eqs.is_post_fixed(u, scale):
                lo, hi = Fraction(v[0], scale), Fraction(u[0], scale)
                if hi - lo <= target_width:
                    return EquationEnclosure(lo, hi, it, hi - lo)
        gate /= 16
    raise EquationNotPinned(
        f"no post-fixed point within width {target_width} after {it} iterations"
    )


def compare_equation_value(
    g: Grammar, op: str, eps: Fraction, width_floor: Fraction = DEFAULT_WIDTH_FLOOR
) -> tuple[bool | None, EquationEnclosure | None]:
    """``value op eps`` for the measure-equation value, halving the width until decided."""
    eps, op = Fraction(eps), normalize_cmp(op)
    width, enc = Fraction(1, 2**8), None
    while width >= width_floor:
        try:
            enc = equation_enclosure(g, width)
        except EquationNotPinned:
            return None, enc
        verdict = decide_on_enclosure(enc.lo, enc.hi, op, eps)
        if verdict is not None:
            return verdict, enc
        width /= 2**16
    return None, enc


# -- regular expressions ------------------------------------------------------------------


class AmbiguousRegex(ValueError):
    def __init__(self, word):
        self.word = tuple(word)
        super().__init__(f"expression matches {' '.join(self.word)!r} in more than one way")


def regex_ambiguity_witness(r: Regex, max_len: int | None = None):
    """A word with two parses, via the position automaton (complete when max_len is None).

    Expressions the position automaton cannot carry fall back to direct
    parse counting on all words up to ``max_len`` (default 6).
    """
    try:
        return ambiguity_witness(regex_to_nfa(r), max_len)
    except RegexShapeError:
        limit = 6 if max_len is None else max_len
        for words in language_by_length(r.expr, limit):
            for w in sorted(words):
                try:
                    if match_count(r.expr, w) > 1:
                        return w
                except RegexShapeError:
                    return w
        return None


def measure_regex_compositional(
    e: Regex | RegexAst, n: int | None = None, check: bool = True
) -> Fraction:
    """Bottom-up measure of an unambiguous expression.

    μ(∅)=0, μ(ε)=1/(n+1), μ(a)=1/(n+1)², μ(e|f)=μ(e)+μ(f), μ(ef)=(n+1)μ(e)μ(f),
    μ(e*)=1/((n+1)(1-(n+1)μ(e))).
    """
    if isinstance(e, Regex):
        if n is None:
            n = e.n_letters
        if check:
            w = regex_ambiguity_witness(e)
            if w is not None:
                raise AmbiguousRegex(w)
        e = e.expr
    elif n is None:
        raise ValueError("alphabet size required for a bare expression")
    b = n + 1

    def mu(x) -> Fraction:
        if isinstance(x, Empty):
            return Fraction(0)
        if isinstance(x, Eps):
            return Fraction(1, b)
        if isinstance(x, Letter):
            return Fraction(1, b * b)
        if isinstance(x, Union):
            return sum((mu(c) for c in x.children), Fraction(0))
        if isinstance(x, Concat):
            out = mu(x.children[0])
            for c in x.children[1:]:
                out = b * out * mu(c)
            return out
        if isinstance(x, Star):
            inner = b * mu(x.child)
            if inner >= 1:
                raise ValueError(f"star operand has (n+1)·μ = {inner} >= 1")
            return 1 / (b * (1 - inner))
        raise TypeError(f"not a regex node: {x!r}")

    return mu(e)


def measure_regex(r: Regex) -> Fraction:
    """Measure via the position automaton (independent of the compositional rules)."""
    return measure_automaton_exact(regex_to_nfa(r))


__all__ = [
    "AmbiguousAutomaton", "AmbiguousRegex", "AutomatonMeasure", "Comparison", "MeasureEnclosure",
    "EquationEnclosure", "EquationNotPinned",
    "automaton_measure", "compare_equation_value", "compare_measure", "equation_enclosure", "measure_automaton_exact", "measure_regex",
    "measure_regex_compositional", "measure_sigma_upto", "measure_sigma_upto_closed",
    "measure_ucfg_enclosure", "word_measure",
]
