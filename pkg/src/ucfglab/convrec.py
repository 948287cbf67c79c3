"""Convolution-recursive sequence systems.

A system over sequences f_1..f_k is given by initial values f_i(0) and
recurrences ``f_i(n+1) = p_i(f)(n)``, where products of variables in p_i are
Cauchy convolutions and a constant c stands for the sequence (c, 0, 0, ...).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from operator import mul
from typing import Iterator, Mapping, Sequence

from .enclosure import Enclosure
from .lang.grammar import FormatError

Rational = Fraction | int
Exponents = tuple[int, ...]


def as_fraction(value) -> Fraction:
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


@dataclass(frozen=True)
class ConvPolynomial:
    arity: int
    terms: tuple[tuple[Exponents, Fraction], ...]

    def __post_init__(self):
        merged: dict[Exponents, Fraction] = {}
        for exps, c in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.arity or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent vector {exps} for arity {self.arity}")
            merged[exps] = merged.get(exps, Fraction(0)) + as_fraction(c)
        object.__setattr__(
            self, "terms", tuple(sorted((e, c) for e, c in merged.items() if c != 0))
        )

    @classmethod
    def zero(cls, arity: int) -> ConvPolynomial:
        return cls(arity, ())

    @classmethod
    def constant(cls, arity: int, c: Rational) -> ConvPolynomial:
        return cls(arity, (((0,) * arity, as_fraction(c)),))

    @classmethod
    def var(cls, arity: int, i: int, coeff: Rational = 1) -> ConvPolynomial:
        exps = [0] * arity
        exps[i] = 1
        return cls(arity, ((tuple(exps), as_fraction(coeff)),))

    @classmethod
    def from_dict(cls, arity: int, terms: Mapping[Exponents, Rational]) -> ConvPolynomial:
        return cls(arity, tuple(terms.items()))

    def as_dict(self) -> dict[Exponents, Fraction]:
        return dict(self.terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def _coerce(self, other) -> ConvPolynomial:
        if isinstance(other, ConvPolynomial):
            if other.arity != self.arity:
                raise ValueError("arity mismatch")
            return other
        return ConvPolynomial.constant(self.arity, other)

    def __add__(self, other) -> ConvPolynomial:
        other = self._coerce(other)
        return ConvPolynomial(self.arity, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self) -> ConvPolynomial:
        return ConvPolynomial(self.arity, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other) -> ConvPolynomial:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> ConvPolynomial:
        return self._coerce(other) - self

    def __mul__(self, other) -> ConvPolynomial:
        other = self._coerce(other)
        terms = [
            (tuple(x + y for x, y in zip(e1, e2)), c1 * c2)
            for (e1, c1), (e2, c2) in itertools.product(self.terms, other.terms)
        ]
        return ConvPolynomial(self.arity, tuple(terms))

    __rmul__ = __mul__

    def embed(self, arity: int, offset: int) -> ConvPolynomial:
        """Same polynomial with variable i renamed to i + offset in a larger arity."""
        terms = []
        for e, c in self.terms:
            full = [0] * arity
            full[offset : offset + self.arity] = e
            terms.append((tuple(full), c))
        return ConvPolynomial(arity, tuple(terms))

    def evaluate(self, values: Sequence) -> Fraction:
        """Ordinary (pointwise) evaluation, i.e. the generating-function reading."""
        total = Fraction(0)
        for e, c in self.terms:
            term = c
            for v, k in zip(values, e):
                if k:
                    term *= v**k
            total += term
        return total

    def format(self, names: Sequence[str], times: str = "*") -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            factors = []
            for name, k in zip(names, e):
                if k == 1:
                    factors.append(name)
                elif k > 1:
                    factors.append(f"{name}^{k}")
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = times.join(factors)
            else:
                body = times.join([str(mag)] + factors)
            parts.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]


@dataclass(frozen=True)
class ConvRecSystem:
    names: tuple[str, ...]
    polys: tuple[ConvPolynomial, ...]
    initial: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "polys", tuple(self.polys))
        object.__setattr__(self, "initial", tuple(as_fraction(v) for v in self.initial))
        k = len(self.names)
        if not (len(self.polys) == len(self.initial) == k):
            raise ValueError("names, polynomials and initial values must have equal length")
        if len(set(self.names)) != k:
            raise ValueError("duplicate component name")
        for p in self.polys:
            if p.arity != k:
                raise ValueError("polynomial arity differs from the number of components")

    @property
    def k(self) -> int:
        return len(self.names)

    @property
    def combined_degree(self) -> int:
        return sum(p.degree for p in self.polys)

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.initial) and all(
            c.denominator == 1 for p in self.polys for _, c in p.terms
        )

    def is_monotone(self) -> bool:
        return all(v >= 0 for v in self.initial) and all(c >= 0 for p in self.polys for _, c in p.terms)

    def to_text(self) -> str:
        return serialize_system(self)


def make_system(
    names: Sequence[str], recs: Mapping[str, Mapping[Sequence[str], Rational]], initial: Mapping[str, Rational]
) -> ConvRecSystem:
    """Build from ``{name: {(var, var, ...): coeff}}``; an empty key is a constant."""
    idx = {nm: i for i, nm in enumerate(names)}
    k = len(names)
    polys = []
    for nm in names:
        terms = []
        for factors, c in recs.get(nm, {}).items():
            e = [0] * k
            for f in factors:
                e[idx[f]] += 1
            terms.append((tuple(e), c))
        polys.append(ConvPolynomial(k, tuple(terms)))
    return ConvRecSystem(tuple(names), tuple(polys), tuple(initial.get(nm, 0) for nm in names))


# -- prefix evaluation ---------------------------------------------------------


class _Evaluator:
    """Incremental evaluation with shared convolution nodes.

    A monomial of total degree r >= 2 is the convolution chain
    f_{v1} * (f_{v2} * (... )); chains with common suffixes share nodes, and
    each node costs one O(n) dot product per new index.
    """

    def __init__(self, s: ConvRecSystem):
        self.s = s
        exact_int = s.is_integral()
        conv = (lambda c: int(c)) if exact_int else (lambda c: c)
        self.values: list[list] = [[conv(v)] for v in s.initial]
        self.nodes: dict[tuple[int, ...], list] = {}
        self.node_order: list[tuple[int, ...]] = []
        # per component: list of (coefficient, key) with key () = constant
        self.rows: list[list[tuple[object, tuple[int, ...]]]] = []
        for p in s.polys:
            row = []
            for e, c in p.terms:
                key = tuple(i for i, k in enumerate(e) for _ in range(k))
                self._register(key)
                row.append((conv(c), key))
            self.rows.append(row)
        self.node_order.sort(key=len)
        self.n = 0

    def _register(self, key: tuple[int, ...]) -> None:
        while len(key) >= 2 and key not in self.nodes:
            self.nodes[key] = []
            self.node_order.append(key)
            key = key[1:]

    def _series(self, key: tuple[int, ...]) -> list:
        return self.values[key[0]] if len(key) == 1 else self.nodes[key]

    def current(self) -> tuple:
        return tuple(v[self.n] for v in self.values)

    def advance(self) -> tuple:
        """Compute index n+1 of every component from indices 0..n."""
        n = self.n
        for key in self.node_order:
            a = self.values[key[0]]
            b = self._series(key[1:])
            self.nodes[key].append(sum(map(mul, a[: n + 1], b[n::-1])))
        new = []
        for row in self.rows:
            total = 0
            for c, key in row:
                if not key:
                    if n == 0:
                        total += c
                else:
                    total += c * self._series(key)[n]
            new.append(total)
        for v, x in zip(self.values, new):
            v.append(x)
        self.n = n + 1
        return tuple(new)


def iter_prefix(s: ConvRecSystem) -> Iterator[tuple]:
    """Yield (f_1(n), ..., f_k(n)) for n = 0, 1, 2, ... (ints when the data are integral)."""
    ev = _Evaluator(s)
    yield ev.current()
    while True:
        yield ev.advance()


def iter_component(s: ConvRecSystem, i: int = 0) -> Iterator:
    for row in iter_prefix(s):
        yield row[i]


@dataclass(frozen=True)
class PrefixTable:
    names: tuple[str, ...]
    values: tuple[tuple[Fraction, ...], ...]

    def __getitem__(self, i: int) -> tuple[Fraction, ...]:
        return self.values[i]

    def component(self, name: str) -> tuple[Fraction, ...]:
        return self.values[self.names.index(name)]

    @property
    def first(self) -> tuple[Fraction, ...]:
        return self.values[0]


def eval_prefix(s: ConvRecSystem, N: int) -> PrefixTable:
    rows = list(itertools.islice(iter_prefix(s), N + 1))
    cols = tuple(tuple(Fraction(r[i]) for r in rows) for i in range(s.k))
    return PrefixTable(s.names, cols)


# -- closure operations --------------------------------------------------------


def _prefixed(names: Sequence[str], prefix: str, taken: set[str]) -> list[str]:
    out = []
    for nm in names:
        cand = prefix + nm
        while cand in taken:
            cand = "_" + cand
        taken.add(cand)
        out.append(cand)
    return out


def combine(a: ConvRecSystem, b: ConvRecSystem, op: str) -> ConvRecSystem:
    """System whose first component is a_1 (op) b_1 for op in add, sub, conv.

    Both operand systems are adjoined unchanged behind a fresh first component.
    For conv: (a1*b1)(n+1) = a1(0)·b1(n+1) + (σa1 * b1)(n).
    """
    if op not in ("add", "sub", "conv"):
        raise ValueError(f"unknown operation {op!r}")
    k = 1 + a.k + b.k
    taken = {"t"}
    names = ["t"] + _prefixed(a.names, "a_", taken) + _prefixed(b.names, "b_", taken)
    pa = [p.embed(k, 1) for p in a.polys]
    pb = [p.embed(k, 1 + a.k) for p in b.polys]
    vb1 = ConvPolynomial.var(k, 1 + a.k)
    a0, b0 = a.initial[0], b.initial[0]
    if op == "add":
        top, init = pa[0] + pb[0], a0 + b0
    elif op == "sub":
        top, init = pa[0] - pb[0], a0 - b0
    else:
        top, init = a0 * pb[0] + pa[0] * vb1, a0 * b0
    return ConvRecSystem(tuple(names), (top, *pa, *pb), (init, *a.initial, *b.initial))


def geometric_system(ratio: Rational, start: Rational = 1, name: str = "g") -> ConvRecSystem:
    """σg = ratio·g, g(0) = start."""
    return ConvRecSystem((name,), (ConvPolynomial.var(1, 0, ratio),), (start,))


def delta_system(c: Rational = 1, name: str = "u") -> ConvRecSystem:
    """The sequence (c, 0, 0, ...): the convolution identity for c = 1."""
    return ConvRecSystem((name,), (ConvPolynomial.zero(1),), (c,))


# -- generating functions ------------------------------------------------------


@dataclass(frozen=True)
class GfSystem:
    """y_i = c_i + x·p̂_i(y), with p̂_i read as an ordinary polynomial."""

    names: tuple[str, ...]
    constants: tuple[Fraction, ...]
    polys: tuple[ConvPolynomial, ...]

    def equations(self) -> list[str]:
        ys = [f"y{i + 1}" for i in range(len(self.names))]
        return [f"{y} = {c} + x*({p.format(ys)})" for y, c, p in zip(ys, self.constants, self.polys)]

    def residual(self, x: Fraction, ys: Sequence[Fraction]) -> list[Fraction]:
        return [
            c + x * p.evaluate(ys) - y for c, p, y in zip(self.constants, self.polys, ys)
        ]

    def iterate_series(self, N: int) -> list[list[Fraction]]:
        """Power-series coefficients up to x^N by fixed-point iteration.

        Each round y <- c + x·p̂(y) (truncated at degree N) fixes at least one
        more coefficient, so N + 1 rounds reach the unique formal solution.
        """
        k = len(self.names)
        ys = [[Fraction(0)] * (N + 1) for _ in range(k)]
        for _ in range(N + 1):
            new = []
            for c, p in zip(self.constants, self.polys):
                acc = [Fraction(0)] * (N + 1)
                for e, coeff in p.terms:
                    term = [Fraction(0)] * (N + 1)
                    term[0] = coeff
                    for i, power in enumerate(e):
                        for _ in range(power):
                            term = _series_mul(term, ys[i], N)
                    for j in range(N + 1):
                        acc[j] += term[j]
                row = [c] + acc[:N]
                new.append(row)
            ys = new
        return ys


def _series_mul(a: list[Fraction], b: list[Fraction], N: int) -> list[Fraction]:
    out = [Fraction(0)] * (N + 1)
    for i, x in enumerate(a):
        if x:
            for j in range(N + 1 - i):
                if b[j]:
                    out[i + j] += x * b[j]
    return out


def gf_system(s: ConvRecSystem) -> GfSystem:
    return GfSystem(s.names, s.initial, s.polys)


# -- diagnostics and zeroness -------------------------------------------------


def growth_ratio(s: ConvRecSystem, N: int) -> list[Fraction | None]:
    """f_1(n+1)/f_1(n) for n = 0..N-1; None where f_1(n) = 0."""
    vals = list(itertools.islice(iter_component(s), N + 1))
    return [Fraction(vals[n + 1]) / vals[n] if vals[n] else None for n in range(N)]


@dataclass(frozen=True)
class NonZero:
    n: int
    value: Fraction

    def __str__(self):
        return f"NonZero({self.n})"


@dataclass(frozen=True)
class AllZeroUpTo:
    bound: int

    def __str__(self):
        return f"AllZeroUpTo({self.bound})"


def zeroness_falsify(s: ConvRecSystem, N: int) -> NonZero | AllZeroUpTo:
    for n, v in enumerate(itertools.islice(iter_component(s), N + 1)):
        if v != 0:
            return NonZero(n, Fraction(v))
    return AllZeroUpTo(N)


def _smt_num(q: Fraction) -> str:
    q = Fraction(q)
    mag = abs(q)
    body = str(mag.numerator) if mag.denominator == 1 else f"(/ {mag.numerator} {mag.denominator})"
    return f"(- {body})" if q < 0 else body


def _smt_poly(p: ConvPolynomial, ys: Sequence[str]) -> str:
    terms = []
    for e, c in p.terms:
        factors = [y for y, k in zip(ys, e) for _ in range(k)]
        if c != 1 or not factors:
            factors.insert(0, _smt_num(c))
        terms.append(factors[0] if len(factors) == 1 else f"(* {' '.join(factors)})")
    if not terms:
        return "0"
    return terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"


def emit_reals_sentence(s: ConvRecSystem) -> str:
    """SMT-LIB 2 query: exists x in [0, 1/d) and y with y = f(0) + x·p̂(y), y_1 != 0.

    An UNSAT answer certifies that the first component is identically zero.
    A SAT answer is inconclusive on its own: the polynomial system may have
    real solutions besides the power-series value (y = x·y² has y = 1/x).
    """
    d = max(s.combined_degree, 1)
    ys = [f"y{i + 1}" for i in range(s.k)]
    out = [
        "; existential form of the zeroness sentence for a convolution-recursive system",
        "; unsat => component y1 is the zero sequence; sat is inconclusive (spurious real roots)",
        f"; combined degree d = {s.combined_degree}; x ranges over [0, 1/{d})",
    ]
    out += [f"; {y} = {nm}" for y, nm in zip(ys, s.names)]
    out.append("(set-logic QF_NRA)")
    out.append("(declare-fun x () Real)")
    out += [f"(declare-fun {y} () Real)" for y in ys]
    out.append("(assert (<= 0 x))")
    out.append(f"(assert (< x {_smt_num(Fraction(1, d))}))")
    for y, c, p in zip(ys, s.initial, s.polys):
        out.append(f"(assert (= {y} (+ {_smt_num(c)} (* x {_smt_poly(p, ys)}))))")
    out.append("(assert (not (= y1 0)))")
    out.append("(check-sat)")
    return "\n".join(out) + "\n"


def eval_gf_enclosure(
    s: ConvRecSystem, x: Rational, N: int, bound_base: Rational
) -> Enclosure:
    """Interval containing g_{f_1}(x) for a monotone system.

    [S_N, S_N + T] with S_N the partial sum to x^N and T = Σ_{n>N} (b·x)^n, valid
    because f_1(n) <= b^n is checked on every evaluated entry.
    """
    x, b = as_fraction(x), as_fraction(bound_base)
    if not s.is_monotone():
        raise ValueError("enclosures need non-negative initial values and coefficients")
    d = max(s.combined_degree, 1)
    if not 0 <= x < Fraction(1, d):
        raise ValueError(f"x = {x} outside [0, 1/{d})")
    r = b * x
    if r >= 1:
        raise ValueError(f"bound_base·x = {r} is not below 1; the tail diverges")
    total = Fraction(0)
    xp = Fraction(1)
    bp = Fraction(1)
    for n, v in enumerate(itertools.islice(iter_component(s), N + 1)):
        if v > bp:
            raise ValueError(f"f_1({n}) = {v} exceeds the bound {b}^{n}")
        total += v * xp
        xp *= x
        bp *= b
    tail = r ** (N + 1) / (1 - r)
    return Enclosure(total, total + tail, N + 1, tail)


# -- text format ---------------------------------------------------------------

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*$")
_TERM_SPLIT = re.compile(r"\s*([+-])\s*")


def _parse_poly(text: str, idx: dict[str, int], lineno: int) -> ConvPolynomial:
    k = len(idx)
    text = text.strip()
    if not text:
        raise FormatError("empty polynomial", lineno)
    if text[0] not in "+-":
        text = "+" + text
    pieces = _TERM_SPLIT.split(text)[1:]
    terms = []
    for sign, body in zip(pieces[::2], pieces[1::2]):
        body = body.strip()
        if not body:
            raise FormatError("dangling operator", lineno)
        coeff = Fraction(1 if sign == "+" else -1)
        e = [0] * k
        for factor in body.split("*"):
            factor = factor.strip()
            base, _, power = factor.partition("^")
            base = base.strip()
            try:
                exp = int(power) if power else 1
            except ValueError:
                raise FormatError(f"bad exponent in {factor!r}", lineno) from None
            if base in idx:
                e[idx[base]] += exp
            else:
                try:
                    coeff *= Fraction(base) ** exp
                except (ValueError, ZeroDivisionError):
                    raise FormatError(f"unknown variable or number {base!r}", lineno) from None
        terms.append((tuple(e), coeff))
    return ConvPolynomial(k, tuple(terms))


def parse_system(text: str) -> ConvRecSystem:
    """Parse ``.crs`` text: ``vars``, ``init f = p/q`` and ``rec f = poly`` lines."""
    names: list[str] | None = None
    inits: dict[str, Fraction] = {}
    recs: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "vars":
            if names is not None:
                raise FormatError("repeated 'vars' line", lineno)
            names = rest.split()
            bad = [nm for nm in names if not _NAME.match(nm)]
            if bad or not names:
                raise FormatError(f"bad variable names {bad}", lineno)
            continue
        if head not in ("init", "rec"):
            raise FormatError(f"unrecognised line {line!r}", lineno)
        if names is None:
            raise FormatError(f"'{head}' before 'vars'", lineno)
        lhs, eq, rhs = rest.partition("=")
        lhs = lhs.strip()
        if not eq or lhs not in names:
            raise FormatError(f"expected '{head} <var> = ...'", lineno)
        table = inits if head == "init" else recs
        if lhs in table:
            raise FormatError(f"second '{head}' for {lhs}", lineno)
        if head == "init":
            try:
                inits[lhs] = Fraction(rhs.strip())
            except (ValueError, ZeroDivisionError):
                raise FormatError(f"bad rational {rhs.strip()!r}", lineno) from None
        else:
            recs[lhs] = (rhs, lineno)
    if names is None:
        raise FormatError("missing 'vars' line")
    idx = {nm: i for i, nm in enumerate(names)}
    polys = []
    for nm in names:
        if nm not in recs:
            raise FormatError(f"missing 'rec' for {nm}")
        polys.append(_parse_poly(recs[nm][0], idx, recs[nm][1]))
    return ConvRecSystem(tuple(names), tuple(polys), tuple(inits.get(nm, Fraction(0)) for nm in names))


def serialize_system(s: ConvRecSystem) -> str:
    lines = ["vars " + " ".join(s.names)]
    lines += [f"init {nm} = {v}" for nm, v in zip(s.names, s.initial)]
    lines += [f"rec {nm} = {p.format(s.names)}" for nm, p in zip(s.names, s.polys)]
    return "\n".join(lines) + "\n"
