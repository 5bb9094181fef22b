"""Named languages and ready-made advised machines used as golden fixtures."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .advice import (DeterministicAdvice, QuantumAdvice, RandomizedAdvice, duplicate_advice,
                     language_advice, palindrome_advice, zeros_then_one, zeros_then_one_advice)
from .machines import (LEFT, RIGHT, Dfa, MachineError, Pfa, Qfa, as_word, minimal_dfa,
                       track_symbol)
from .rewritable import FINAL_ONLY, RewritableQfa

S2 = 1 / np.sqrt(2)


# --------------------------------------------------------------------------
# languages


@dataclass(frozen=True)
class NamedLanguage:
    name: str
    alphabet: tuple
    predicate: Callable

    def __contains__(self, x) -> bool:
        return membership(self.name, x)


_AAB = re.compile(r"(aa|ab|ba)*")
_ZO = re.compile(r"0*1*")


def _pal(w: str) -> bool:
    if w.count("#") != 1:
        return False
    left, right = w.split("#")
    return right == left[::-1]


LANGUAGES: dict[str, NamedLanguage] = {
    lang.name: lang for lang in [
        NamedLanguage("L_a", ("a", "b"), lambda w: w.endswith("a")),
        NamedLanguage("(aa+ab+ba)*", ("a", "b"), lambda w: _AAB.fullmatch(w) is not None),
        NamedLanguage("0m1n", ("0", "1"), lambda w: _ZO.fullmatch(w) is not None),
        NamedLanguage("Pal#", ("0", "1", "#"), _pal),
        NamedLanguage("Dup", ("0", "1"), lambda w: len(w) % 2 == 0 and w[:len(w) // 2] == w[len(w) // 2:]),
        NamedLanguage("even_length", ("a", "b"), lambda w: len(w) % 2 == 0),
        NamedLanguage("all", ("a", "b"), lambda w: True),
        NamedLanguage("empty", ("a", "b"), lambda w: False),
    ]
}
ALIASES = {"Sigma*": "all", "0^m1^n": "0m1n", "S": "(aa+ab+ba)*", "Pal_#": "Pal#"}


def language(name: str) -> NamedLanguage:
    name = ALIASES.get(name, name)
    if name not in LANGUAGES:
        raise KeyError(f"unknown language {name!r}; known: {sorted(LANGUAGES)}")
    return LANGUAGES[name]


def membership(name: str, x) -> bool:
    """Exact membership of ``x`` in the named language."""
    lang = language(name)
    w = as_word(x)
    bad = [s for s in w if s not in lang.alphabet]
    if bad:
        raise MachineError(f"symbols {bad} outside the alphabet of {lang.name}")
    return bool(lang.predicate("".join(w)))


def language_dfa(name: str) -> Dfa:
    """Minimal DFA of a regular named language (no endmarkers)."""
    lang = language(name)
    if lang.name in ("Pal#", "Dup"):
        raise MachineError(f"{lang.name} is not regular")
    return minimal_dfa(lang.alphabet, lambda w: lang.predicate("".join(w)), max_states=8)


# --------------------------------------------------------------------------
# fixtures


@dataclass(frozen=True)
class Fixture:
    name: str
    machine: object
    advice: object
    language: str | None = None
    notes: str = ""


def _m(rows) -> np.ndarray:
    return np.array(rows, dtype=np.complex128)


def l_a_machine() -> Qfa:
    """Three-state quantum automaton deciding the last symbol with advice ``0^{n-1}1``."""
    eye = np.eye(3)
    u_a1 = _m([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    u_b1 = _m([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    unitaries = {track_symbol("a", "0"): eye, track_symbol("b", "0"): eye,
                 track_symbol("a", "1"): u_a1, track_symbol("b", "1"): u_b1}
    return Qfa(["q0", "q1", "q2"], sorted(unitaries), unitaries, "q0", ["q1"], ["q2"],
               left=False, right=False)


def all_machine(alphabet: Iterable[str] = ("a", "b"), pad: str = "#") -> Qfa:
    """Quantum automaton comparing input with advice: certain accept on a match, 1/2 otherwise."""
    alphabet = tuple(alphabet)
    gamma = alphabet + (pad,)
    mismatch = _m([[0, 1, 0], [S2, 0, S2], [S2, 0, -S2]])
    padded = _m([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    unitaries = {LEFT: np.eye(3), RIGHT: _m([[0, 1, 0], [1, 0, 0], [0, 0, 1]])}
    for s in alphabet:
        for t in gamma:
            unitaries[track_symbol(s, t)] = (np.eye(3) if s == t else
                                             padded if t == pad else mismatch)
    track = sorted(k for k in unitaries if k not in (LEFT, RIGHT))
    return Qfa(["q0", "q1", "q2"], track, unitaries, "q0", ["q1"], ["q2"], left=True, right=True)


def _parity_pfa(accepting, rejecting, with_hash: bool) -> Pfa:
    states = ["q0", "q1", "q2", "q3"]
    bits = ("0", "1")
    sigma = bits + (("#",) if with_hash else ())
    symbols = [track_symbol(s, t) for s in sigma for t in bits + ("#",)]
    mats = {}
    for sym in symbols:
        s, t = sym.split("|")
        mat = np.zeros((4, 4))
        for j, q in enumerate(states):
            if j < 2 and s in bits and t in bits:
                mat[(int(s) * int(t) + j) % 2, j] = 1
            elif j < 2 and s == t == "#":
                mat[(j + 1) % 2, j] = 1
            else:
                mat[2, j] = mat[3, j] = 0.5
        mats[sym] = mat
    return Pfa(states, symbols, mats, "q0", accepting, rejecting)


def pal_machine() -> Pfa:
    """Parity automaton for ``w#w^R`` (palindromes end in ``q1``, which accepts)."""
    return _parity_pfa(["q1", "q2"], ["q0", "q3"], with_hash=True)


def dup_machine() -> Pfa:
    """Parity automaton for ``ww`` (duplicates end in ``q0``, which accepts)."""
    return _parity_pfa(["q0", "q2"], ["q1", "q3"], with_hash=False)


def biased_rqfa(p_acc: float = 0.75, alphabet: Iterable[str] = ("a", "b")) -> RewritableQfa:
    """Rewritable machine accepting every input with probability ``p_acc``.

    States ``s, a, r``; cells ``0, 1``; the local rule (index ``q * 2 + c``)
    is the identity on cell ``0`` and on cell ``1`` sends
    ``s -> sqrt(p) a + sqrt(1-p) r``, ``a -> sqrt(1-p) a - sqrt(p) r``,
    ``r -> s``. With advice ``10...0`` exactly one step splits the amplitude.
    """
    sa, sr = np.sqrt(p_acc), np.sqrt(1 - p_acc)
    v = np.eye(6, dtype=np.complex128)
    s1, a1, r1 = 1, 3, 5
    v[:, [s1, a1, r1]] = 0
    v[a1, s1], v[r1, s1] = sa, sr
    v[a1, a1], v[r1, a1] = sr, -sa
    v[s1, r1] = 1
    alphabet = tuple(alphabet)
    return RewritableQfa(["s", "a", "r"], alphabet, ("0", "1"), {c: v for c in alphabet},
                         "s", ["a"], ["r"], mode=FINAL_ONLY)


def marker_advice() -> QuantumAdvice:
    """Point-mass quantum advice ``1 0^{n-1}``."""
    return QuantumAdvice(("0", "1"), generator=lambda n: [(tuple(reversed(zeros_then_one(n))), 1.0)])


def fixture(name: str, members: Mapping[int, Iterable] | None = None,
            alphabet: Iterable[str] = ("a", "b")) -> Fixture:
    """Machine plus advice bundle by name: ``L_a``, ``ALL``, ``Pal#``, ``Dup``.

    ``ALL`` takes a language table ``members`` (length -> member words).
    """
    if name == "L_a":
        return Fixture(name, l_a_machine(), zeros_then_one_advice(), "L_a")
    if name == "ALL":
        members = members or {}
        return Fixture(name, all_machine(alphabet), language_advice(alphabet, members))
    if name in ("Pal#", "Pal_#"):
        return Fixture("Pal#", pal_machine(), palindrome_advice(), "Pal#")
    if name == "Dup":
        return Fixture(name, dup_machine(), duplicate_advice(), "Dup")
    if name == "biased":
        return Fixture(name, biased_rqfa(), marker_advice(), None,
                       "accepts every input with probability 3/4")
    raise KeyError(f"unknown fixture {name!r}; known: {sorted(FIXTURES)}")


FIXTURES = ("L_a", "ALL", "Pal#", "Dup", "biased")


__all__ = ["NamedLanguage", "LANGUAGES", "language", "membership", "language_dfa", "Fixture",
           "l_a_machine", "all_machine", "pal_machine", "dup_machine", "biased_rqfa",
           "marker_advice", "fixture", "FIXTURES",
           "DeterministicAdvice", "RandomizedAdvice"]
