"""Finite automata, the ``.aut`` format, run counting and basic constructions.

Determinism and unambiguity are properties checked on demand; there is a
single automaton type.  File format::

    alphabet a b
    states 0 1
    initial 0
    accepting 1
    trans 0 a 1
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .grammar import FormatError, Word, check_alphabet, fresh_name

Transition = tuple[str, str, str]


class DeterminismError(ValueError):
    def __init__(self, state: str, letter: str):
        self.state, self.letter = state, letter
        super().__init__(f"state {state!r} has several transitions on {letter!r}")


class AmbiguousAutomaton(ValueError):
    """Raised when an operation needs an unambiguous automaton and gets a witness."""

    def __init__(self, word: Word, message: str = "automaton is ambiguous"):
        self.word = word
        super().__init__(f"{message}: word {' '.join(word)!r} has several accepting runs")


@dataclass(frozen=True)
class FiniteAutomaton:
    alphabet: tuple[str, ...]
    states: tuple[str, ...]
    initial: str
    accepting: frozenset[str]
    transitions: tuple[Transition, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphabet", check_alphabet(self.alphabet))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        object.__setattr__(self, "transitions", tuple(tuple(t) for t in self.transitions))
        st = set(self.states)
        if len(st) != len(self.states):
            raise ValueError("duplicate state")
        if self.initial not in st:
            raise ValueError(f"initial state {self.initial!r} not declared")
        if not self.accepting <= st:
            raise ValueError(f"accepting states not declared: {sorted(self.accepting - st)}")
        letters = set(self.alphabet)
        seen = set()
        for t in self.transitions:
            p, a, q = t
            if p not in st or q not in st:
                raise ValueError(f"transition {t} uses an undeclared state")
            if a not in letters:
                raise ValueError(f"transition {t} uses an undeclared letter")
            if t in seen:
                raise ValueError(f"duplicate transition {t}")
            seen.add(t)

    @cached_property
    def delta(self) -> dict[tuple[str, str], list[str]]:
        d: dict[tuple[str, str], list[str]] = {}
        for p, a, q in self.transitions:
            d.setdefault((p, a), []).append(q)
        return d

    @cached_property
    def state_index(self) -> dict[str, int]:
        return {q: i for i, q in enumerate(self.states)}

    def step(self, states: Iterable[str], letter: str) -> set[str]:
        out: set[str] = set()
        for p in states:
            out.update(self.delta.get((p, letter), ()))
        return out

    def accepts(self, word: Sequence[str]) -> bool:
        current = {self.initial}
        for a in word:
            current = self.step(current, a)
            if not current:
                return False
        return bool(current & self.accepting)

    def to_text(self) -> str:
        return serialize_automaton(self)


def parse_automaton(text: str) -> FiniteAutomaton:
    fields: dict[str, list[str]] = {}
    trans: list[Transition] = []
    seen: dict[Transition, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "trans":
            if len(rest) != 3:
                raise FormatError("'trans' needs source, letter, target", lineno)
            t = (rest[0], rest[1], rest[2])
            if t in seen:
                raise FormatError(f"duplicate transition (first on line {seen[t]})", lineno)
            seen[t] = lineno
            trans.append(t)
        elif head in ("alphabet", "states", "initial", "accepting"):
            if head in fields:
                raise FormatError(f"repeated {head!r} line", lineno)
            fields[head] = rest
        else:
            raise FormatError(f"unrecognised line {line!r}", lineno)
    for key in ("alphabet", "states", "initial"):
        if key not in fields:
            raise FormatError(f"missing {key!r} line")
    if len(fields["initial"]) != 1:
        raise FormatError("'initial' takes exactly one state")
    try:
        return FiniteAutomaton(
            tuple(fields["alphabet"]),
            tuple(fields["states"]),
            fields["initial"][0],
            frozenset(fields.get("accepting", ())),
            tuple(trans),
        )
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def serialize_automaton(m: FiniteAutomaton) -> str:
    lines = [
        "alphabet " + " ".join(m.alphabet),
        "states " + " ".join(m.states),
        "initial " + m.initial,
        ("accepting " + " ".join(q for q in m.states if q in m.accepting)).rstrip(),
    ]
    lines.extend(f"trans {p} {a} {q}" for p, a, q in m.transitions)
    return "\n".join(lines) + "\n"


# -- run counting ------------------------------------------------------------


def transition_counts(m: FiniteAutomaton) -> list[list[int]]:
    """``M[p][q]`` = number of letters labelling a transition p -> q."""
    idx = m.state_index
    size = len(m.states)
    mat = [[0] * size for _ in range(size)]
    for p, _, q in m.transitions:
        mat[idx[p]][idx[q]] += 1
    return mat


def count_runs(m: FiniteAutomaton, max_len: int) -> list[int]:
    """Accepting runs summed over all words, per length 0..max_len."""
    idx = m.state_index
    mat = transition_counts(m)
    acc = [idx[q] for q in m.accepting]
    vec = [0] * len(m.states)
    vec[idx[m.initial]] = 1
    out = []
    for _ in range(max_len + 1):
        out.append(sum(vec[i] for i in acc))
        nxt = [0] * len(vec)
        for i, v in enumerate(vec):
            if v:
                for j, c in enumerate(mat[i]):
                    if c:
                        nxt[j] += v * c
        vec = nxt
    return out


def run_multiplicity(m: FiniteAutomaton, word: Sequence[str]) -> int:
    runs = {m.initial: 1}
    for a in word:
        nxt: dict[str, int] = {}
        for p, c in runs.items():
            for q in m.delta.get((p, a), ()):
                nxt[q] = nxt.get(q, 0) + c
        runs = nxt
    return sum(c for q, c in runs.items() if q in m.accepting)


def _backward_reach(m: FiniteAutomaton, targets: Iterable[str]) -> set[str]:
    pred: dict[str, list[str]] = {}
    for p, _, q in m.transitions:
        pred.setdefault(q, []).append(p)
    seen = set(targets)
    stack = list(seen)
    while stack:
        q = stack.pop()
        for p in pred.get(q, ()):
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def _forward_reach(m: FiniteAutomaton) -> set[str]:
    seen = {m.initial}
    stack = [m.initial]
    while stack:
        p = stack.pop()
        for a in m.alphabet:
            for q in m.delta.get((p, a), ()):
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
    return seen


def ambiguity_witness(m: FiniteAutomaton, max_len: int | None = None) -> Word | None:
    """Length-lex first word with two or more accepting runs, or None.

    Works on pairs of states: a word has two runs iff a path from
    (init, init) to an accepting pair visits an off-diagonal pair.  With
    ``max_len=None`` the search is complete (such words, if any, exist below
    2 * |states|**2 + 1).
    """
    states = m.states
    init = (m.initial, m.initial, False)
    limit = max_len if max_len is not None else 2 * len(states) ** 2 + 1

    def successors(node, a):
        p, q, split = node
        for p2 in m.delta.get((p, a), ()):
            for q2 in m.delta.get((q, a), ()):
                yield (p2, q2, split or p2 != q2)

    def is_goal(node):
        return node[2] and node[0] in m.accepting and node[1] in m.accepting

    # layers[i] = nodes reachable with words of length i
    layers = [{init}]
    goal_len = None
    for length in range(limit + 1):
        if any(is_goal(v) for v in layers[-1]):
            goal_len = length
            break
        if length == limit:
            break
        nxt = set()
        for v in layers[-1]:
            for a in m.alphabet:
                nxt.update(successors(v, a))
        if not nxt:
            break
        layers.append(nxt)
    if goal_len is None:
        return None
    # greedy lexicographic reconstruction using backward feasibility
    feasible = [set() for _ in range(goal_len + 1)]
    feasible[goal_len] = {v for v in layers[goal_len] if is_goal(v)}
    for i in range(goal_len - 1, -1, -1):
        feasible[i] = {
            v
            for v in layers[i]
            if any(s in feasible[i + 1] for a in m.alphabet for s in successors(v, a))
        }
    word: list[str] = []
    frontier = {init}
    for i in range(goal_len):
        for a in m.alphabet:
            nxt = {s for v in frontier for s in successors(v, a)} & feasible[i + 1]
            if nxt:
                word.append(a)
                frontier = nxt
                break
    return tuple(word)


def is_unambiguous(m: FiniteAutomaton) -> bool:
    return ambiguity_witness(m) is None


def require_unambiguous(m: FiniteAutomaton, max_len: int | None = None) -> None:
    w = ambiguity_witness(m, max_len)
    if w is not None:
        raise AmbiguousAutomaton(w)


# -- constructions -----------------------------------------------------------


def determinism_violation(m: FiniteAutomaton) -> tuple[str, str] | None:
    for p in m.states:
        for a in m.alphabet:
            if len(m.delta.get((p, a), ())) > 1:
                return (p, a)
    return None


def is_deterministic(m: FiniteAutomaton) -> bool:
    return determinism_violation(m) is None


def require_deterministic(m: FiniteAutomaton) -> None:
    bad = determinism_violation(m)
    if bad is not None:
        raise DeterminismError(*bad)


def is_total(m: FiniteAutomaton) -> bool:
    return all((p, a) in m.delta for p in m.states for a in m.alphabet)


def totalize(m: FiniteAutomaton, sink: str = "sink") -> FiniteAutomaton:
    """Add a fresh rejecting sink for every missing (state, letter); no-op if total."""
    if is_total(m):
        return m
    s = fresh_name(sink, set(m.states))
    extra = [(p, a, s) for p in m.states for a in m.alphabet if (p, a) not in m.delta]
    extra.extend((s, a, s) for a in m.alphabet)
    return FiniteAutomaton(
        m.alphabet, m.states + (s,), m.initial, m.accepting, m.transitions + tuple(extra)
    )


def complement_dfa(m: FiniteAutomaton) -> FiniteAutomaton:
    require_deterministic(m)
    t = totalize(m)
    return FiniteAutomaton(
        t.alphabet, t.states, t.initial, frozenset(t.states) - t.accepting, t.transitions
    )


def _unique_names(pairs: Sequence[tuple[str, str]]) -> dict[tuple[str, str], str]:
    names = {pq: f"{pq[0]}_{pq[1]}" for pq in pairs}
    if len(set(names.values())) != len(names):
        names = {pq: f"s{i}" for i, pq in enumerate(pairs)}
    return names


def product(m1: FiniteAutomaton, m2: FiniteAutomaton) -> FiniteAutomaton:
    """Synchronous product over reachable pairs; language is the intersection."""
    if m1.alphabet != m2.alphabet:
        raise ValueError("product needs equal alphabets")
    start = (m1.initial, m2.initial)
    order = [start]
    seen = {start}
    trans: list[tuple[tuple[str, str], str, tuple[str, str]]] = []
    queue = deque([start])
    while queue:
        p, q = queue.popleft()
        for a in m1.alphabet:
            for p2 in m1.delta.get((p, a), ()):
                for q2 in m2.delta.get((q, a), ()):
                    tgt = (p2, q2)
                    trans.append(((p, q), a, tgt))
                    if tgt not in seen:
                        seen.add(tgt)
                        order.append(tgt)
                        queue.append(tgt)
    names = _unique_names(order)
    return FiniteAutomaton(
        m1.alphabet,
        tuple(names[s] for s in order),
        names[start],
        frozenset(names[s] for s in order if s[0] in m1.accepting and s[1] in m2.accepting),
        tuple((names[s], a, names[t]) for s, a, t in trans),
    )


def disjoint_union(m1: FiniteAutomaton, m2: FiniteAutomaton) -> FiniteAutomaton:
    """Union through a fresh initial state copying both initial states' moves.

    Accepting runs of the result are the disjoint union of both machines'
    accepting runs, so the union of unambiguous machines with disjoint
    languages is unambiguous.
    """
    if m1.alphabet != m2.alphabet:
        raise ValueError("disjoint_union needs equal alphabets")
    left = {q: f"L{q}" for q in m1.states}
    right = {q: f"R{q}" for q in m2.states}
    init = fresh_name("init", set(left.values()) | set(right.values()))
    trans = [(left[p], a, left[q]) for p, a, q in m1.transitions]
    trans += [(right[p], a, right[q]) for p, a, q in m2.transitions]
    trans += [(init, a, left[q]) for p, a, q in m1.transitions if p == m1.initial]
    trans += [(init, a, right[q]) for p, a, q in m2.transitions if p == m2.initial]
    accepting = {left[q] for q in m1.accepting} | {right[q] for q in m2.accepting}
    if m1.initial in m1.accepting or m2.initial in m2.accepting:
        accepting.add(init)
    return FiniteAutomaton(
        m1.alphabet,
        (init,) + tuple(left.values()) + tuple(right.values()),
        init,
        frozenset(accepting),
        tuple(trans),
    )


def trim(m: FiniteAutomaton) -> FiniteAutomaton:
    """Keep states that are reachable and co-reachable; the initial state stays."""
    useful = _forward_reach(m) & _backward_reach(m, m.accepting)
    useful.add(m.initial)
    return FiniteAutomaton(
        m.alphabet,
        tuple(q for q in m.states if q in useful),
        m.initial,
        m.accepting & useful,
        tuple(t for t in m.transitions if t[0] in useful and t[2] in useful),
    )


def strongly_connected_components(m: FiniteAutomaton) -> list[list[object]]:
    """SCCs of the transition graph, successors' components before their predecessors."""
    succ: dict[object, list[object]] = {q: [] for q in m.states}
    for p, _, q in m.transitions:
        succ[p].append(q)
    index: dict[object, int] = {}
    low: dict[object, int] = {}
    on_stack: set[object] = set()
    stack: list[object] = []
    out: list[list[object]] = []
    counter = 0
    for root in m.states:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            w = next(it, None)
            if w is not None:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    x = stack.pop()
                    on_stack.discard(x)
                    comp.append(x)
                    if x == v:
                        break
                out.append(comp)
    return out


def make_automaton(
    alphabet: Sequence[str],
    transitions: Iterable[tuple[object, str, object]],
    initial: object,
    accepting: Iterable[object],
    states: Sequence[object] = (),
) -> FiniteAutomaton:
    """Convenience constructor; state names are stringified, order by first use."""
    trans = [(str(p), a, str(q)) for p, a, q in transitions]
    order: dict[str, None] = dict.fromkeys(str(s) for s in states)
    order.setdefault(str(initial), None)
    for p, _, q in trans:
        order.setdefault(p, None)
        order.setdefault(q, None)
    for q in accepting:
        order.setdefault(str(q), None)
    return FiniteAutomaton(
        tuple(alphabet), tuple(order), str(initial), frozenset(str(q) for q in accepting), tuple(trans)
    )
