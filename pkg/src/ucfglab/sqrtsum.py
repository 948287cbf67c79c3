"""Square-root-sum instances as coin-flip measure comparisons.

Given d_0, d_1..d_n with n odd and d = max d_i = (n+1)^(2h), the grammar over
Σ_n = {a1..an}

    X0 -> a_i X_i                      (i = 1..n)
    X_i -> C_i | A X_i a_n X_i         A = {a_1, .., a_{(n+1)/2}}

has measure equations y_i = c_i + y_i²/2 with c_i = (1 - d_i/d²)/2, whose least
roots are x_i = 1 - √d_i/d, so the equation value at X0 is (n - Σ√d_i/d)/(n+1).
With ε = (n - d_0/d)/(n+1) this gives  Σ√d_i <= d_0  iff  value >= ε.

Each C_i is an unambiguous regular expression over Σ_{n-1} of measure exactly
c_i, synthesised by ``repr_regex``.

The X_i rule itself is ambiguous whenever C_i holds ε and a word starting with
a letter of A: a1 a1 a3 a1 a3 parses as a1 (a1) a3 (a1 () a3 ()) and as
a1 (a1 () a3 (a1)) a3 ().  Derivations are then overcounted, μ(L(X0)) falls
below the equation value, and ``verify_instance`` reports the lint failure
next to an enclosure of the equation value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from .lang.automaton import trim
from .lang.grammar import ShortGnfGrammar, trim_grammar
from .lang.parsing import Ambiguous, check_unambiguous_up_to
from .lang.regex import (
    EMPTY,
    EPS,
    Letter,
    Regex,
    RegexAst,
    concat,
    letters_union,
    power,
    size,
    star,
    union,
)
from .lang.regex import regex_to_nfa
from .counting import AmbiguityDetected
from .measure import (
    DEFAULT_WIDTH_FLOOR,
    EquationNotPinned,
    compare_equation_value,
    compare_measure,
    equation_enclosure,
    measure_regex,
    measure_regex_compositional,
    measure_sigma_upto_closed,
    normalize_cmp,
)
from .reductions import right_linear_grammar

# comparison on Σ√d_i vs d_0  ->  comparison on μ(X0) vs ε
MIRROR = {"<=": ">=", "<": ">", ">=": "<=", ">": "<"}


def letter_names(n: int) -> tuple[str, ...]:
    return tuple(f"a{i}" for i in range(1, n + 1))


@dataclass(frozen=True)
class SqrtSumInstance:
    d0: int
    ds: tuple[int, ...]
    cmp: str = "<="

    def __post_init__(self):
        object.__setattr__(self, "ds", tuple(int(v) for v in self.ds))
        object.__setattr__(self, "cmp", normalize_cmp(self.cmp))
        if self.d0 < 0 or any(v < 0 for v in self.ds):
            raise ValueError("instance entries must be natural numbers")
        if not self.ds:
            raise ValueError("at least one d_i is required")

    @property
    def n(self) -> int:
        return len(self.ds)


def _even_power_exponent(value: int, base: int) -> int | None:
    """h with value = base^(2h), or None."""
    if value < 1:
        return None
    h, p = 0, 1
    while p < value:
        p *= base * base
        h += 1
    return h if p == value else None


@dataclass(frozen=True)
class NormalizedInstance:
    instance: SqrtSumInstance
    d: int
    h: int
    base: int
    original: SqrtSumInstance | None = None

    def __post_init__(self):
        inst = self.instance
        if inst.n < 3 or inst.n % 2 == 0:
            raise ValueError("normalised instances have an odd number n >= 3 of entries")
        if self.base != inst.n + 1 or self.d != self.base ** (2 * self.h) or self.d != max(inst.ds):
            raise ValueError("normalised instances need d = max d_i = (n+1)^(2h)")


def _smallest_odd_at_least(v: int) -> int:
    v = max(v, 3)
    return v if v % 2 else v + 1


def normalize_instance(inst: SqrtSumInstance) -> NormalizedInstance:
    """Bring an instance into the form n odd >= 3, max d_i = (n+1)^(2h).

    Zeros pad n to an odd count (√0 adds nothing).  If the largest entry is
    not an even power of the resulting base, a new entry base^(2h) >= all d_i
    is appended and base^h added to d_0 (same amount on both sides); the
    final count is chosen first so the appended square matches the final base.
    """
    n_pad = _smallest_odd_at_least(inst.n)
    top = max(inst.ds)
    h = _even_power_exponent(top, n_pad + 1)
    if h is not None:
        ds = inst.ds + (0,) * (n_pad - inst.n)
        out = replace(inst, ds=ds)
        return NormalizedInstance(out, top, h, n_pad + 1, inst if out != inst else None)
    n_final = _smallest_odd_at_least(inst.n + 1)
    base = n_final + 1
    h = 1
    while base ** (2 * h) < top:
        h += 1
    ds = inst.ds + (base ** (2 * h),) + (0,) * (n_final - inst.n - 1)
    out = SqrtSumInstance(inst.d0 + base**h, ds, inst.cmp)
    return NormalizedInstance(out, base ** (2 * h), h, base, inst)


# -- representation of rationals as measures -----------------------------------------------


class ReprError(ValueError):
    """The synthesis cannot realise the requested measure (diagnostic in the message)."""


def sigma(m: int) -> RegexAst:
    return letters_union(letter_names(m))


def sigma_upto(m: int, k: int) -> RegexAst:
    """Σ_m^{<=k} in Horner form eps | Σ(eps | Σ(...)); Empty for k < 0."""
    if k < 0:
        return EMPTY
    e: RegexAst = EPS
    for _ in range(k):
        e = union(EPS, concat(sigma(m), e))
    return e


def e_block(h: int, k: int, m: int, n: int | None = None) -> RegexAst:
    """Unambiguous expression over Σ_m with exactly h words, all of length k.

    With h = Σ h_i m^i in base m, block i is a_m^(k-i-1) (a_1|..|a_{h_i}) Σ_m^i:
    blocks differ in where the first letter below a_m sits.
    """
    if m < 1 or k < 0:
        raise ValueError("need m >= 1 and k >= 0")
    if not 0 <= h <= m**k:
        raise ValueError(f"h = {h} outside [0, {m}^{k}]")
    if n is not None and m > n:
        raise ValueError("sub-alphabet larger than the alphabet")
    if h == 0:
        return EMPTY
    if h == m**k:
        return power(sigma(m), k)
    names = letter_names(m)
    blocks = []
    rest, i = h, 0
    while rest:
        rest, digit = divmod(rest, m)
        if digit:
            blocks.append(
                concat(
                    power(Letter(names[-1]), k - i - 1),
                    letters_union(names[:digit]),
                    power(sigma(m), i),
                )
            )
        i += 1
    return union(*blocks)


@dataclass(frozen=True)
class ReprTask:
    n: int
    m: int
    c: Fraction
    kind: str  # "full", "empty", "finite" or "periodic"
    k: int | None = None
    c_k: int | None = None
    digits: tuple[int, ...] = ()  # d_1 .. d_{j1-1}
    j1: int | None = None
    period: tuple[int, ...] = ()  # d_{j1} .. d_{j1+l-1}
    gamma: int | None = None

    @property
    def l(self) -> int:
        return len(self.period)

    @property
    def q(self) -> int:
        return self.c.denominator


def minimal_k(n: int, m: int, c: Fraction) -> int:
    """Least k with c < μ(Σ_m^{<=k}); requires c < 1/(n-m+1)."""
    k = 0
    while not c < measure_sigma_upto_closed(n, m, k):
        k += 1
    return k


def repr_task(n: int, m: int, c: Fraction | str | int, mode: str = "auto") -> ReprTask:
    c = Fraction(c)
    if mode not in ("auto", "finite", "periodic"):
        raise ValueError(f"unknown mode {mode!r}")
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    cap = Fraction(1, n - m + 1)
    if not 0 <= c <= cap:
        raise ValueError(f"c = {c} outside [0, {cap}]")
    if c == cap:
        return ReprTask(n, m, c, "full")
    if c == 0:
        return ReprTask(n, m, c, "empty")
    b = n + 1
    k = minimal_k(n, m, c)
    below = measure_sigma_upto_closed(n, m, k - 1) if k > 0 else Fraction(0)
    scaled = (c - below) * b ** (k + 1)
    c_k = math.floor(scaled)
    rem = scaled - c_k  # in [0, 1); the remaining measure is rem / b^(k+1)
    p, q = rem.numerator, rem.denominator
    digits: list[int] = []
    seen: dict[int, int] = {}
    r = p
    # long division in base b; seen[r] is the 1-based index of the digit produced from r
    while r not in seen:
        if r == 0 and mode != "periodic":
            return ReprTask(n, m, c, "finite", k, c_k, tuple(digits), len(digits) + 1)
        seen[r] = len(digits) + 1
        d, r = divmod(r * b, q)
        digits.append(d)
    if mode == "finite":
        raise ReprError(f"{rem} has no finite expansion in base {b}")
    j1 = seen[r]
    pre, period = tuple(digits[: j1 - 1]), tuple(digits[j1 - 1 :])
    gamma = 0
    for d in period:
        gamma = gamma * b + d
    return ReprTask(n, m, c, "periodic", k, c_k, pre, j1, period, gamma)


def _capacity_error(task: ReprTask) -> str | None:
    m, k = task.m, task.k
    if task.c_k > m**k:
        return f"c_k = {task.c_k} exceeds {m}^{k}"
    for j, d in enumerate(task.digits, 1):
        if d > m ** (k + j):
            return f"digit d_{j} = {d} exceeds {m}^{k + j} words of length {k + j}"
    if task.kind == "periodic":
        length = k + task.j1 - 1 + task.l
        if task.gamma > m**length:
            return (
                f"periodic numerator γ = {task.gamma} exceeds {m}^{length} words of length {length} "
                f"(k = {k} too small for period {task.l})"
            )
    return None


def is_admissible(n: int, m: int, c: Fraction, mode: str = "auto") -> bool:
    try:
        task = repr_task(n, m, c, mode)
    except (ValueError, ReprError):
        return False
    return task.kind in ("full", "empty") or _capacity_error(task) is None


def regex_from_task(task: ReprTask) -> RegexAst:
    n, m, k = task.n, task.m, task.k
    if task.kind == "full":
        return star(sigma(m))
    if task.kind == "empty":
        return EMPTY
    err = _capacity_error(task)
    if err is not None:
        raise ReprError(f"cannot represent {task.c} over {m} of {n} letters: {err}")
    parts = [sigma_upto(m, k - 1), e_block(task.c_k, k, m, n)]
    parts += [e_block(d, k + j, m, n) for j, d in enumerate(task.digits, 1)]
    if task.kind == "periodic" and task.gamma:
        loop = e_block(1, task.l, m, n)
        parts.append(concat(e_block(task.gamma, k + task.j1 - 1 + task.l, m, n), star(loop)))
    return union(*parts)


def repr_regex(n: int, m: int, c: Fraction | str | int, mode: str = "auto") -> RegexAst:
    """Unambiguous expression over Σ_m whose measure inside Σ_n is exactly c.

    Lengths below k carry all of Σ_m^i, length k carries c_k words, and the
    base-(n+1) digits of the remainder fill the following lengths; a
    periodic tail becomes a starred single word.  Raises ReprError when some
    digit exceeds the number of words of its length.
    """
    return regex_from_task(repr_task(n, m, c, mode))


def repr_regex_doc(n: int, m: int, c, mode: str = "auto") -> Regex:
    return Regex(letter_names(n), repr_regex(n, m, c, mode))


# -- size audit -----------------------------------------------------------------------------

# Calibrated once (seeded sample of c = p/4^l for l = 5, 10, 20 plus 2000 admissible
# (n, m, c) draws; observed maxima 1.0 and 0.33) and frozen with some headroom.
SIZE_CONSTANT = 2
K_CONSTANT = 1


def size_bound_expression(task: ReprTask) -> float:
    logq = math.log2(task.q) if task.q > 1 else 0.0
    j1 = task.j1 or 0
    return (task.n * logq + j1 + task.l + 1) ** 3


@dataclass(frozen=True)
class SizeAudit:
    nodes: int
    bound_expression: float
    size_ok: bool
    k: int | None
    k_bound: float
    k_ok: bool


def regex_size_audit(e: RegexAst, task: ReprTask, K: float = SIZE_CONSTANT, K2: float = K_CONSTANT) -> SizeAudit:
    nodes = size(e)
    bound = size_bound_expression(task)
    logq = math.log2(task.q) if task.q > 1 else 0.0
    k_bound = K2 * task.n * max(logq, 1.0)
    k_ok = task.k is None or task.k <= k_bound
    return SizeAudit(nodes, bound, nodes <= K * bound, task.k, k_bound, k_ok)


# -- the grammar -----------------------------------------------------------------------------


@dataclass
class SqrtSumConstruction:
    normalized: NormalizedInstance
    grammar: ShortGnfGrammar
    eps: Fraction
    cs: tuple[Fraction, ...]
    tasks: tuple[ReprTask, ...]
    regexes: tuple[RegexAst, ...]
    notes: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.normalized.instance.n

    @property
    def alphabet(self) -> tuple[str, ...]:
        return self.grammar.alphabet

    def x_values(self) -> tuple[Fraction | None, ...]:
        """x_i = 1 - √d_i/d when d_i is a perfect square, else None."""
        d = self.normalized.d
        out = []
        for di in self.normalized.instance.ds:
            r = math.isqrt(di)
            out.append(1 - Fraction(r, d) if r * r == di else None)
        return tuple(out)


def sqrtsum_threshold(ni: NormalizedInstance) -> Fraction:
    n = ni.instance.n
    return Fraction(1, n + 1) * (n - Fraction(ni.instance.d0, ni.d))


def c_values(ni: NormalizedInstance) -> tuple[Fraction, ...]:
    d2 = ni.d * ni.d
    return tuple(Fraction(1, 2) * (1 - Fraction(di, d2)) for di in ni.instance.ds)


def build_sqrtsum_grammar(ni: NormalizedInstance) -> SqrtSumConstruction:
    n = ni.instance.n
    letters = letter_names(n)
    half = (n + 1) // 2
    cs = c_values(ni)
    tasks = tuple(repr_task(n, n - 1, c) for c in cs)
    regexes = tuple(regex_from_task(t) for t in tasks)
    prods: list[tuple[str, tuple[str, ...]]] = []
    nts = ["X0"] + [f"X{i}" for i in range(1, n + 1)] + [f"T{i}" for i in range(1, n + 1)] + ["E"]
    for i in range(1, n + 1):
        prods.append(("X0", (letters[i - 1], f"X{i}", "E")))
    for i, e in enumerate(regexes, 1):
        xi, ti = f"X{i}", f"T{i}"
        nfa = trim(regex_to_nfa(Regex(letters, e)))
        rl, _ = right_linear_grammar(nfa, set(nts))
        rename = {x: f"C{i}{x}" for x in rl.nonterminals}
        for lhs, rhs in rl.productions:
            new_rhs = tuple(rename.get(s, s) for s in rhs)
            prods.append((rename[lhs], new_rhs))
            if lhs == rl.start:
                prods.append((xi, new_rhs))
        nts += [rename[x] for x in rl.nonterminals]
        for j in range(half):
            prods.append((xi, (letters[j], xi, ti)))
        prods.append((ti, (letters[-1], xi, "E")))
    prods.append(("E", ()))
    g = ShortGnfGrammar(letters, tuple(nts), "X0", tuple(prods))
    g = trim_grammar(g)
    return SqrtSumConstruction(ni, g, sqrtsum_threshold(ni), cs, tasks, regexes)


def generate(d0: int, ds: Sequence[int], cmp: str = "<=") -> SqrtSumConstruction:
    return build_sqrtsum_grammar(normalize_instance(SqrtSumInstance(d0, tuple(ds), cmp)))


# -- verification ------------------------------------------------------------------------------


def exact_measure_if_square(ni: NormalizedInstance) -> Fraction | None:
    total = 0
    for di in ni.instance.ds:
        r = math.isqrt(di)
        if r * r != di:
            return None
        total += r
    n = ni.instance.n
    return Fraction(1, n + 1) * (n - Fraction(total, ni.d))


def sqrtsum_truth(inst: SqrtSumInstance) -> bool | None:
    """Ground truth for perfect-square instances (None otherwise)."""
    roots = []
    for di in inst.ds:
        r = math.isqrt(di)
        if r * r != di:
            return None
        roots.append(r)
    s, d0 = sum(roots), inst.d0
    return {"<=": s <= d0, "<": s < d0, ">=": s >= d0, ">": s > d0}[inst.cmp]


LINT_CELLS = 4_000_000


def verify_instance(
    con: SqrtSumConstruction,
    width: Fraction = Fraction(1, 2**40),
    lint_len: int = 8,
    width_floor: Fraction | None = None,
) -> dict:
    """Self-check of a construction; failures are reported, not raised."""
    ni = con.normalized
    n = ni.instance.n
    report: dict = {"n": n, "d": ni.d, "h": ni.h, "eps": con.eps}
    requested_lint = lint_len
    # the lint charts every nonterminal over Σ^{<=L}; shorten L to keep that bounded
    cells = len(con.grammar.nonterminals)
    while lint_len > 0 and cells * sum(n**j for j in range(lint_len + 1)) > LINT_CELLS:
        lint_len -= 1
    lint = check_unambiguous_up_to(con.grammar, lint_len)
    report["lint"] = {
        "bound": lint_len,
        "ok": not isinstance(lint, Ambiguous),
        "witness": list(lint.word) if isinstance(lint, Ambiguous) else None,
    }
    parts = []
    for i, (c, task, e) in enumerate(zip(con.cs, con.tasks, con.regexes), 1):
        r = Regex(con.alphabet, e)
        mu = measure_regex_compositional(r, check=False)
        mu_aut = measure_regex(r)
        audit = regex_size_audit(e, task)
        parts.append(
            {
                "index": i,
                "c": c,
                "measure": mu,
                "automaton_measure": mu_aut,
                "exact": mu == c == mu_aut,
                "k": task.k,
                "kind": task.kind,
                "nodes": audit.nodes,
                "size_ok": audit.size_ok,
            }
        )
    report["parts"] = parts
    floor = width_floor if width_floor is not None else DEFAULT_WIDTH_FLOOR
    op = MIRROR[ni.instance.cmp]
    expected = exact_measure_if_square(ni)
    report["expected"] = expected
    # μ(X0) of the language: only meaningful after a full-length lint, and only
    # certifiable while the counts stay <= n^k
    try:
        if not report["lint"]["ok"]:
            raise ValueError("lint found an ambiguous word; language measure not attempted")
        if lint_len < requested_lint:
            raise ValueError(f"lint shortened to length {lint_len}; language measure not attempted")
        cmp = compare_measure(con.grammar, op, con.eps, max(floor, width))
        report["language_comparison"] = {"op": op, "result": cmp.result, "width": cmp.width}
    except (AmbiguityDetected, ValueError) as exc:
        report["language_comparison"] = {"op": op, "result": None, "error": str(exc)}
    # value of the measure equations: (1/(n+1)) Σ x_i whether or not G is unambiguous
    try:
        enc = equation_enclosure(con.grammar, width)
        verdict, venc = compare_equation_value(con.grammar, op, con.eps, floor)
    except EquationNotPinned as exc:
        enc = venc = verdict = None
        report["equation_error"] = str(exc)
    report["enclosure"] = enc
    report["contains_expected"] = None if expected is None or enc is None else expected in enc
    report["equation_comparison"] = {
        "op": op,
        "result": verdict,
        "width": None if venc is None else venc.width,
    }
    report["verdict"] = verdict
    report["truth"] = sqrtsum_truth(ni.instance)
    report["ok"] = (
        report["lint"]["ok"]
        and all(p["exact"] for p in parts)
        and report["contains_expected"] is not False
        and (report["truth"] is None or verdict is None or verdict == report["truth"])
    )
    return report
