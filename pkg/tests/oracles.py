"""Random generators and brute-force oracles shared by the tests."""

import itertools
import random

from ucfglab.lang.automaton import FiniteAutomaton, make_automaton, run_multiplicity
from ucfglab.lang.parsing import count_derivations


def random_nfa(rng: random.Random, alphabet, max_states=4, density=0.35, name="q"):
    k = rng.randint(1, max_states)
    states = [f"{name}{i}" for i in range(k)]
    trans = [
        (p, a, q)
        for p in states
        for a in alphabet
        for q in states
        if rng.random() < density
    ]
    accepting = [q for q in states if rng.random() < 0.5]
    return make_automaton(alphabet, trans, states[0], accepting, states)


def random_ufa(rng: random.Random, alphabet, max_states=4):
    """Random unambiguous automaton: rejection-sample NFAs, falling back to a DFA."""
    from ucfglab.lang.automaton import is_unambiguous

    for _ in range(50):
        m = random_nfa(rng, alphabet, max_states, density=0.3, name="u")
        if is_unambiguous(m):
            return m
    return random_dfa(rng, alphabet, max_states)


def random_dfa(rng: random.Random, alphabet, max_states=4):
    k = rng.randint(1, max_states)
    states = [f"d{i}" for i in range(k)]
    trans = [(p, a, rng.choice(states)) for p in states for a in alphabet if rng.random() < 0.85]
    accepting = [q for q in states if rng.random() < 0.5]
    return make_automaton(alphabet, trans, states[0], accepting, states)


def words_upto(alphabet, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def language(obj, max_len):
    """Set of accepted words up to max_len, by brute force."""
    if isinstance(obj, FiniteAutomaton):
        return {w for w in words_upto(obj.alphabet, max_len) if obj.accepts(w)}
    return {w for w in words_upto(obj.alphabet, max_len) if count_derivations(obj, w) > 0}


def brute_included(a, b, max_len):
    return language(a, max_len) <= language(b, max_len)


def max_runs(m: FiniteAutomaton, max_len):
    return max((run_multiplicity(m, w) for w in words_upto(m.alphabet, max_len)), default=0)
