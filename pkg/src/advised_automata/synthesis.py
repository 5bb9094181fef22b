"""Reversible automata with deterministic advice from continuation classes.

Given a language up to a horizon ``N``, points ``(x, n)`` with ``|x| <= n``
are grouped by continuation behaviour: ``(x, n) ≡ (y, n)`` iff ``|x| = |y|``
and ``xz`` and ``yz`` agree on membership for every ``z`` with
``|xz| = n``. Within each level ``(n, |x|)`` the classes are numbered
1, 2, ... in order of their least member.

If successors never merge classes (the reversibility condition), each
advice symbol can encode a partial injective map ``class x symbol ->
class``, which is completed to a permutation. The result is a reversible
DFA whose runs on ``[x / h(|x|)]`` agree with the language.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .advice import DeterministicAdvice, track_join
from .machines import (ACCEPT, Dfa, MachineError, all_words, as_word, dfa_run, is_reversible,
                       track_symbol)
from .transforms import complete_permutation

START = "q0"
WORD_LIMIT = 2 ** 16


class SynthesisError(ValueError):
    pass


@dataclass(frozen=True)
class LanguageOracle:
    """Membership queries for strings of length at most ``horizon``."""

    alphabet: tuple
    accepts: Callable = field(compare=False)
    horizon: int | None = None
    name: str = ""

    def __call__(self, x) -> bool:
        x = as_word(x)
        if self.horizon is not None and len(x) > self.horizon:
            raise SynthesisError(f"query of length {len(x)} beyond horizon {self.horizon}")
        return bool(self.accepts(x))

    @classmethod
    def builtin(cls, name: str, horizon: int | None = None) -> "LanguageOracle":
        from .zoo import language, membership
        lang = language(name)
        return cls(lang.alphabet, lambda x: membership(lang.name, x), horizon, lang.name)

    @classmethod
    def from_table(cls, alphabet, members: Mapping[int, Iterable], horizon: int) -> "LanguageOracle":
        """Explicit member lists per length; lengths absent from the table are empty."""
        table = {int(n): {as_word(w) for w in ws} for n, ws in members.items()}
        alphabet = tuple(alphabet)
        for n, ws in table.items():
            for w in ws:
                if len(w) != n or any(s not in alphabet for s in w):
                    raise SynthesisError(f"table entry {w!r} does not fit length {n}/alphabet")
        return cls(alphabet, lambda x: x in table.get(len(x), ()), horizon, "table")


@dataclass
class ClassTable:
    """Partition of every ``Delta_n`` (``n <= horizon``) into continuation classes."""

    alphabet: tuple
    horizon: int
    class_of: dict          # (x, n) -> class index within level (n, |x|)
    members: dict           # (n, k) -> list of classes, each a list of words in order
    c_acc: dict             # n -> set of accepting class indices at level (n, n)
    c_rej: dict             # n -> set of rejecting class indices at level (n, n)

    @property
    def d(self) -> int:
        return max(len(v) for v in self.members.values())

    def count(self, n: int, k: int) -> int:
        return len(self.members[(n, k)])

    def representative(self, n: int, k: int, q: int) -> tuple:
        return self.members[(n, k)][q - 1][0]

    def successors(self, n: int, k: int, q: int, sigma: str) -> set:
        """Classes at level ``k + 1`` reached from members of class ``q``."""
        return {self.class_of[(x + (sigma,), n)] for x in self.members[(n, k)][q - 1]}

    def predecessors(self, n: int, k: int, q: int, sigma: str) -> set:
        """Classes at level ``k`` whose members reach class ``q`` at level ``k + 1``."""
        return {self.class_of[(x[:-1], n)] for x in self.members[(n, k + 1)][q - 1]
                if x[-1] == sigma}

    def summary(self) -> dict:
        return {"horizon": self.horizon, "d": self.d,
                "classes": {f"{n},{k}": len(v) for (n, k), v in sorted(self.members.items())},
                "c_acc": {n: sorted(v) for n, v in sorted(self.c_acc.items())},
                "c_rej": {n: sorted(v) for n, v in sorted(self.c_rej.items())}}


def _check_horizon(alphabet, horizon):
    if horizon < 0 or len(alphabet) ** horizon > WORD_LIMIT:
        raise SynthesisError(f"horizon {horizon} too large for |alphabet| = {len(alphabet)}")


def _partition(alphabet, horizon, key) -> tuple[dict, dict]:
    """Group points per level by ``key(x, n)``; indices follow least members."""
    class_of, members = {}, {}
    for n in range(horizon + 1):
        for k in range(n + 1):
            index: dict = {}
            groups: list = []
            for x in all_words(alphabet, k, k):
                sig = key(x, n)
                if sig not in index:
                    index[sig] = len(groups) + 1
                    groups.append([])
                groups[index[sig] - 1].append(x)
                class_of[(x, n)] = index[sig]
            members[(n, k)] = groups
    return class_of, members


def _final_sets(alphabet, horizon, class_of, accepts) -> tuple[dict, dict]:
    c_acc, c_rej = {}, {}
    for n in range(horizon + 1):
        c_acc[n], c_rej[n] = set(), set()
        for x in all_words(alphabet, n, n):
            (c_acc if accepts(x) else c_rej)[n].add(class_of[(x, n)])
    return c_acc, c_rej


def build_classes(oracle: LanguageOracle, horizon: int) -> ClassTable:
    """Continuation classes of the oracle language at every ``n <= horizon``."""
    alphabet = tuple(oracle.alphabet)
    _check_horizon(alphabet, horizon)
    member = {x: oracle(x) for x in all_words(alphabet, horizon)}

    def signature(x, n):
        return tuple(member[x + z] for z in all_words(alphabet, n - len(x), n - len(x)))

    class_of, members = _partition(alphabet, horizon, signature)
    c_acc, c_rej = _final_sets(alphabet, horizon, class_of, member.__getitem__)
    return ClassTable(alphabet, horizon, class_of, members, c_acc, c_rej)


def check_condition_a(table: ClassTable):
    """``None`` if successors never merge distinct classes, else ``(x, y, sigma, n)``.

    Also verifies that equivalent points have equivalent successors.
    """
    for n in range(1, table.horizon + 1):
        for k in range(n):
            for sigma in table.alphabet:
                seen: dict = {}
                for q in range(1, table.count(n, k) + 1):
                    succ = table.successors(n, k, q, sigma)
                    if len(succ) != 1:
                        raise SynthesisError(f"class {q} at level ({n},{k}) splits under {sigma!r}")
                    t = succ.pop()
                    if t in seen:
                        x = table.representative(n, k, seen[t])
                        y = table.representative(n, k, q)
                        return ("".join(x), "".join(y), sigma, n)
                    seen[t] = q
    return None


def check_condition_b(table: ClassTable, accepts) -> bool:
    """Equivalent points agree on membership of every completion."""
    for (n, k), groups in table.members.items():
        for group in groups:
            for z in all_words(table.alphabet, n - k, n - k):
                if len({bool(accepts(x + z)) for x in group}) > 1:
                    return False
    return True


def validate_counterexample(oracle: LanguageOracle, cex) -> bool:
    """Re-check ``(x sigma) ≡ (y sigma)`` and ``x ≢ y`` at length ``n`` from scratch."""
    x, y, sigma, n = as_word(cex[0]), as_word(cex[1]), cex[2], cex[3]
    alphabet = tuple(oracle.alphabet)

    def same(u, v):
        return all(oracle(u + z) == oracle(v + z)
                   for z in all_words(alphabet, n - len(u), n - len(u)))

    return len(x) == len(y) and len(x) < n and same(x + (sigma,), y + (sigma,)) and not same(x, y)


# --------------------------------------------------------------------------
# machine construction


def _inner(q: int) -> str:
    return str(q)


def _final(q: int, acc, rej) -> str:
    return f"({q};{','.join(map(str, sorted(acc)))};{','.join(map(str, sorted(rej)))})"


@dataclass(frozen=True)
class SynthesisResult:
    machine: Dfa
    advice: DeterministicAdvice
    symbols: dict           # advice symbol name -> {(source, sigma): target}


def synthesize_rfa(table: ClassTable, lambda_accepted: bool | None = None) -> SynthesisResult:
    """Reversible DFA plus deterministic advice realizing the class table.

    The advice symbol at position ``i`` of ``h(n)`` maps (class of the prefix,
    next input symbol) to the class of the extended prefix; at the last
    position the target is a final state tagged with the accepting and
    rejecting class sets of length ``n``. The start state accepts iff the
    empty string does (``lambda_accepted``, read from the table by default).
    """
    cex = check_condition_a(table)
    if cex is not None:
        raise SynthesisError(f"reversibility condition fails: {cex}")
    if lambda_accepted is None:
        lambda_accepted = 1 in table.c_acc.get(0, set())

    functions: dict = {}     # frozen map -> name
    words: dict = {0: ()}
    finals: set = set()
    for n in range(1, table.horizon + 1):
        word = []
        for i in range(1, n + 1):
            k = i - 1
            rule = {}
            for q in range(1, table.count(n, k) + 1):
                src = START if k == 0 else _inner(q)
                for sigma in table.alphabet:
                    (t,) = table.successors(n, k, q, sigma)
                    if i < n:
                        tgt = _inner(t)
                    else:
                        tgt = _final(t, table.c_acc[n], table.c_rej[n])
                        finals.add((tgt, t in table.c_acc[n]))
                    rule[(src, sigma)] = tgt
            key = frozenset(rule.items())
            if key not in functions:
                functions[key] = f"h{len(functions) + 1}"
            word.append(functions[key])
        words[n] = tuple(word)

    states = [START] + [_inner(q) for q in range(1, table.d + 1)] + sorted({f for f, _ in finals})
    pos = {q: j for j, q in enumerate(states)}
    delta = {}
    gamma = sorted(functions.values(), key=lambda s: int(s[1:])) or ["h1"]
    symbols = {name: dict(key) for key, name in functions.items()}
    for name in gamma:
        rule = symbols.get(name, {})
        for sigma in table.alphabet:
            partial = {pos[src]: pos[tgt] for (src, s), tgt in rule.items() if s == sigma}
            perm = complete_permutation(partial, len(states))
            for j, q in enumerate(states):
                delta[(q, track_symbol(sigma, name))] = states[perm[j]]

    accepting = {f for f, ok in finals if ok}
    rejecting = {f for f, ok in finals if not ok}
    (accepting if lambda_accepted else rejecting).add(START)
    alphabet = [track_symbol(s, g) for s in table.alphabet for g in gamma]
    machine = Dfa(states, alphabet, delta, START, accepting, rejecting)
    advice = DeterministicAdvice(tuple(gamma), table=words)
    return SynthesisResult(machine, advice, symbols)


def agrees_with(machine: Dfa, advice: DeterministicAdvice, accepts, alphabet, horizon: int) -> list:
    """Strings up to ``horizon`` on which the advised machine and the language differ."""
    bad = []
    for x in all_words(alphabet, horizon):
        got = dfa_run(machine, track_join(x, advice.at(len(x)))) == ACCEPT
        if got != bool(accepts(x)):
            bad.append("".join(x))
    return bad


def extract_relation(m: Dfa, h: DeterministicAdvice, horizon: int,
                     alphabet: Iterable[str] | None = None) -> ClassTable:
    """Classes given by the state reached on ``[x / Pref_|x|(h(n))]``."""
    if not is_reversible(m):
        raise SynthesisError("machine is not reversible")
    if alphabet is None:
        alphabet = tuple(dict.fromkeys(s.split("|", 1)[0] for s in m.alphabet))
    alphabet = tuple(alphabet)
    _check_horizon(alphabet, horizon)
    start = m.extend(m.initial, ("¢",)) if m.left else m.initial
    hs = {n: h.at(n) for n in range(horizon + 1)}

    def state(x, n):
        return m.extend(start, track_join(x, hs[n][:len(x)]))

    class_of, members = _partition(alphabet, horizon, state)

    def accepts(x):
        return dfa_run(m, track_join(x, hs[len(x)])) == ACCEPT

    c_acc, c_rej = _final_sets(alphabet, horizon, class_of, accepts)
    table = ClassTable(alphabet, horizon, class_of, members, c_acc, c_rej)
    if check_condition_a(table) is not None:
        raise SynthesisError("extracted relation violates the reversibility condition")
    return table


def refines(fine: ClassTable, coarse: ClassTable) -> bool:
    """Every class of ``fine`` lies inside one class of ``coarse``."""
    for key, groups in fine.members.items():
        for group in groups:
            if len({coarse.class_of[(x, key[0])] for x in group}) > 1:
                return False
    return True


def random_rfa(rng: np.random.Generator, n_states: int, alphabet, advice_alphabet,
               horizon: int) -> tuple[Dfa, DeterministicAdvice]:
    """Random reversible DFA over track symbols with random deterministic advice."""
    states = [f"p{j}" for j in range(n_states)]
    delta = {}
    symbols = [track_symbol(s, g) for s in alphabet for g in advice_alphabet]
    for sym in symbols:
        perm = rng.permutation(n_states)
        for j, q in enumerate(states):
            delta[(q, sym)] = states[perm[j]]
    labels = rng.integers(0, 3, n_states)
    acc = [q for q, l in zip(states, labels) if l == 1]
    rej = [q for q, l in zip(states, labels) if l == 2]
    table = {n: tuple(str(s) for s in rng.choice(list(advice_alphabet), n))
             for n in range(horizon + 1)}
    return (Dfa(states, symbols, delta, states[0], acc, rej),
            DeterministicAdvice(tuple(advice_alphabet), table=table))


__all__ = ["LanguageOracle", "ClassTable", "SynthesisError", "SynthesisResult", "build_classes",
           "check_condition_a", "check_condition_b", "validate_counterexample", "synthesize_rfa",
           "agrees_with", "extract_relation", "refines", "random_rfa", "MachineError"]
