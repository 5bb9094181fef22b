"""Random machine and advice generators shared by the test modules."""

import itertools

import numpy as np

from advised_automata.advice import DeterministicAdvice, QuantumAdvice, RandomizedAdvice
from advised_automata.linalg import random_unitary
from advised_automata.machines import LEFT, RIGHT, Qfa, track_symbol
from advised_automata.rewritable import PER_STEP, RewritableQfa

# one "[PASS]/[FAIL] criterion N: ..." line per acceptance criterion, printed at the end
ACCEPTANCE_LINES = []


def random_qfa(rng, states=("n0", "n1", "a0", "r0", "r1"), acc=("a0",), rej=("r0", "r1"),
               inputs="ab", advice="01", left=True, right=True):
    syms = [track_symbol(s, t) for s in inputs for t in advice]
    ends = ([LEFT] if left else []) + ([RIGHT] if right else [])
    us = {s: random_unitary(len(states), rng) for s in syms + ends}
    return Qfa(states, syms, us, states[0], acc, rej, left=left, right=right)


def random_rqfa(rng, nq=3, cells=("0", "1", "2"), mode=PER_STEP, inputs=("a", "b")):
    d = nq * len(cells)
    return RewritableQfa([f"q{i}" for i in range(nq)], inputs, cells,
                         {s: random_unitary(d, rng) for s in inputs}, "q0", ["q1"],
                         ["q2"] if nq > 2 else [],
                         mode=mode)


def random_quantum_advice(rng, cells, n):
    ys = list(itertools.product(cells, repeat=n))
    a = rng.standard_normal(len(ys)) + 1j * rng.standard_normal(len(ys))
    a /= np.linalg.norm(a)
    return QuantumAdvice(tuple(cells), table={n: list(zip(ys, a))})


def random_distribution(rng, alphabet, n, support=None):
    ys = list(itertools.product(alphabet, repeat=n))
    k = len(ys) if support is None else min(support, len(ys))
    pick = rng.choice(len(ys), size=k, replace=False)
    p = rng.random(k) + 0.05
    p /= p.sum()
    return RandomizedAdvice(tuple(alphabet), table={n: [(ys[i], float(w)) for i, w in zip(pick, p)]})


def single_advice(alphabet, word):
    return DeterministicAdvice(tuple(alphabet), table={len(word): tuple(word)})


def random_language_table(rng, alphabet=("a", "b"), max_n=5):
    """Random nonempty member set for every length ``1..max_n``."""
    table = {}
    for n in range(1, max_n + 1):
        words = ["".join(w) for w in itertools.product(alphabet, repeat=n)]
        k = int(rng.integers(1, len(words) + 1))
        table[n] = sorted(rng.choice(words, size=k, replace=False).tolist())
    return table
