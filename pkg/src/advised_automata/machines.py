"""Machine descriptions (1dfa, 1rfa, 1pfa, measure-many 1qfa) and bare runs.

Inputs are *words*: tuples of symbol names.  A plain ``str`` is read one
character per symbol.  Track symbols ``[sigma|tau]`` are encoded as the
string ``"sigma|tau"`` (see :func:`track_symbol`).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Iterable, Mapping, Sequence

import numpy as np

from .linalg import (TOL, HaltingTriple, LinalgError, Measurement, as_matrix, basis,
                     hat_T_apply, norm_sq, permutation_matrix, unitarity_defect)

LEFT = "¢"
RIGHT = "$"

ACCEPT = "accept"
REJECT = "reject"
NEITHER = "neither"
UNDECIDED = "undecided"

Word = tuple


class MachineError(ValueError):
    """Raised for structurally invalid machines or inputs outside the alphabet."""


# --------------------------------------------------------------------------
# symbols and words


def track_symbol(upper: str, lower: str) -> str:
    """Encode the track symbol ``[upper|lower]``.

    A lower component that itself contains ``|`` is bracketed so that the
    encoding stays unambiguous, e.g. ``track_symbol("a", "0|$") == "a|[0|$]"``.
    """
    if "|" in upper:
        raise MachineError(f"upper track symbol may not contain '|': {upper!r}")
    if "|" in lower or lower.startswith("["):
        lower = f"[{lower}]"
    return f"{upper}|{lower}"


def split_track(sym: str) -> tuple[str, str]:
    """Inverse of :func:`track_symbol`."""
    if "|" not in sym:
        raise MachineError(f"not a track symbol: {sym!r}")
    upper, lower = sym.split("|", 1)
    if lower.startswith("[") and lower.endswith("]"):
        lower = lower[1:-1]
    return upper, lower


def as_word(x) -> Word:
    """Normalize an input to a tuple of symbols."""
    if isinstance(x, str):
        return tuple(x)
    return tuple(x)


def all_words(alphabet: Sequence[str], max_len: int, min_len: int = 0):
    """Yield all words over ``alphabet`` in length-lexicographic order."""
    for n in range(min_len, max_len + 1):
        yield from iproduct(alphabet, repeat=n)


def _framed(word: Word, left: bool, right: bool) -> Word:
    return ((LEFT,) if left else ()) + word + ((RIGHT,) if right else ())


# --------------------------------------------------------------------------
# outcomes


@dataclass(frozen=True)
class RunOutcome:
    """Acceptance, rejection and residual (never-halted) probability."""

    p_acc: float
    p_rej: float
    p_residual: float
    trace: tuple = ()

    def __post_init__(self):
        total = self.p_acc + self.p_rej + self.p_residual
        if abs(total - 1.0) > TOL:
            raise MachineError(f"probabilities do not sum to 1 (sum = {total!r})")
        for p in (self.p_acc, self.p_rej, self.p_residual):
            if p < -TOL or p > 1 + TOL:
                raise MachineError(f"probability out of range: {p!r}")

    def as_dict(self) -> dict:
        return {"p_acc": self.p_acc, "p_rej": self.p_rej, "p_residual": self.p_residual}

    @staticmethod
    def mix(weighted: Iterable[tuple[float, "RunOutcome"]]) -> "RunOutcome":
        """Exact convex combination of outcomes (weights must sum to 1)."""
        pa = pr = pn = 0.0
        for w, o in weighted:
            pa += w * o.p_acc
            pr += w * o.p_rej
            pn += w * o.p_residual
        return RunOutcome(pa, pr, pn)


# --------------------------------------------------------------------------
# deterministic machines


@dataclass(frozen=True)
class Dfa:
    """One-way deterministic automaton with optional endmarkers.

    ``delta`` maps ``(state, symbol)`` to a state and must be total on
    ``states x (alphabet + used endmarkers)``.
    """

    states: tuple
    alphabet: tuple
    delta: Mapping
    initial: str
    accepting: frozenset
    rejecting: frozenset = frozenset()
    left: bool = False
    right: bool = False

    def __init__(self, states, alphabet, delta, initial, accepting, rejecting=(),
                 left=False, right=False):
        set_ = object.__setattr__
        set_(self, "states", tuple(states))
        set_(self, "alphabet", tuple(alphabet))
        set_(self, "delta", dict(delta))
        set_(self, "initial", initial)
        set_(self, "accepting", frozenset(accepting))
        set_(self, "rejecting", frozenset(rejecting))
        set_(self, "left", bool(left))
        set_(self, "right", bool(right))
        self._validate()

    def _validate(self):
        qs = set(self.states)
        if len(qs) != len(self.states):
            raise MachineError("duplicate state names")
        if self.initial not in qs:
            raise MachineError(f"initial state {self.initial!r} not in Q")
        if not self.accepting <= qs or not self.rejecting <= qs:
            raise MachineError("accepting/rejecting states must belong to Q")
        if self.accepting & self.rejecting:
            raise MachineError("accepting and rejecting sets overlap")
        for q in self.states:
            for s in self.full_alphabet:
                t = self.delta.get((q, s))
                if t is None:
                    raise MachineError(f"delta undefined at ({q!r}, {s!r})")
                if t not in qs:
                    raise MachineError(f"delta({q!r}, {s!r}) = {t!r} is not a state")

    @property
    def full_alphabet(self) -> tuple:
        return self.alphabet + ((LEFT,) if self.left else ()) + ((RIGHT,) if self.right else ())

    def extend(self, q, word) -> str:
        """``delta-hat(q, word)`` with no endmarkers added."""
        for s in as_word(word):
            try:
                q = self.delta[(q, s)]
            except KeyError:
                raise MachineError(f"symbol {s!r} outside the alphabet") from None
        return q

    def classify_state(self, q) -> str:
        if q in self.accepting:
            return ACCEPT
        if q in self.rejecting:
            return REJECT
        return NEITHER

    def final_state(self, x) -> str:
        word = as_word(x)
        for s in word:
            if s not in self.alphabet:
                raise MachineError(f"symbol {s!r} outside the alphabet")
        return self.extend(self.initial, _framed(word, self.left, self.right))


def dfa_run(m: Dfa, x) -> str:
    """Halting class (accept / reject / neither) of ``delta-hat(q0, ¢x$)``."""
    return m.classify_state(m.final_state(x))


def dfa_outcome(m: Dfa, x) -> RunOutcome:
    c = dfa_run(m, x)
    return RunOutcome(float(c == ACCEPT), float(c == REJECT), float(c == NEITHER))


Rfa = Dfa  # a reversible automaton is a Dfa passing :func:`rfa_check`


def rfa_check(m: Dfa) -> list[tuple[str, str, tuple]]:
    """Reversibility violations ``(target, symbol, sources)``; empty iff reversible."""
    preimages: dict = {}
    for q in m.states:
        for s in m.full_alphabet:
            preimages.setdefault((m.delta[(q, s)], s), []).append(q)
    return sorted((t, s, tuple(src)) for (t, s), src in preimages.items() if len(src) > 1)


def is_reversible(m: Dfa) -> bool:
    return not rfa_check(m)


def _shortest_word(start, step, goal, alphabet, limit):
    """BFS over a deterministic successor map; return a shortest nonempty word."""
    seen = set()
    frontier = deque([(start, ())])
    while frontier:
        node, w = frontier.popleft()
        if len(w) >= limit:
            continue
        for s in alphabet:
            nxt = step(node, s)
            w2 = w + (s,)
            if goal(nxt):
                return w2
            if nxt not in seen:
                seen.add(nxt)
                frontier.append((nxt, w2))
    return None


def partial_order_condition_check(m: Dfa):
    """Search for a violation of the partial order condition.

    Returns ``None`` when the condition is satisfied, otherwise a witness
    ``(q1, q2, x, y, z)`` with ``z`` distinguishing ``q1`` from ``q2``,
    ``delta-hat(q1, x) = delta-hat(q2, x) = q2`` and ``delta-hat(q2, y) = q1``
    for nonempty ``x, y``.  Words are at most ``|Q|^2`` long.
    """
    bound = max(1, len(m.states) ** 2)
    sigma = m.alphabet
    suffix = (RIGHT,) if m.right else ()

    def label(q, z=()):
        return m.classify_state(m.extend(q, z + suffix))

    def distinguisher(q1, q2):
        if label(q1) != label(q2):
            return ()
        return _shortest_word((q1, q2), lambda p, s: (m.delta[(p[0], s)], m.delta[(p[1], s)]),
                              lambda p: label(p[0]) != label(p[1]), sigma, bound)

    for q1 in m.states:
        for q2 in m.states:
            if q1 == q2:
                continue
            x = _shortest_word((q1, q2), lambda p, s: (m.delta[(p[0], s)], m.delta[(p[1], s)]),
                               lambda p, q2=q2: p == (q2, q2), sigma, bound)
            if x is None:
                continue
            y = _shortest_word(q2, lambda p, s: m.delta[(p, s)], lambda p, q1=q1: p == q1,
                               sigma, bound)
            if y is None:
                continue
            z = distinguisher(q1, q2)
            if z is None:
                continue
            return (q1, q2, "".join(x), "".join(y), "".join(z))
    return None


# --------------------------------------------------------------------------
# probabilistic machines


@dataclass(frozen=True)
class Pfa:
    """One-way probabilistic automaton with column-stochastic symbol matrices.

    Acceptance is read off the final state distribution after ``¢x$``.
    """

    states: tuple
    alphabet: tuple
    matrices: Mapping
    initial: str
    accepting: frozenset
    rejecting: frozenset = frozenset()
    left: bool = False
    right: bool = False

    def __init__(self, states, alphabet, matrices, initial, accepting, rejecting=(),
                 left=False, right=False):
        set_ = object.__setattr__
        set_(self, "states", tuple(states))
        set_(self, "alphabet", tuple(alphabet))
        set_(self, "matrices", {s: np.asarray(mat, dtype=float) for s, mat in matrices.items()})
        set_(self, "initial", initial)
        set_(self, "accepting", frozenset(accepting))
        set_(self, "rejecting", frozenset(rejecting))
        set_(self, "left", bool(left))
        set_(self, "right", bool(right))
        d = len(self.states)
        if self.initial not in self.states:
            raise MachineError("initial state not in Q")
        if self.accepting & self.rejecting:
            raise MachineError("accepting and rejecting sets overlap")
        if not (self.accepting | self.rejecting) <= set(self.states):
            raise MachineError("accepting/rejecting states must belong to Q")
        for s in self.full_alphabet:
            mat = self.matrices.get(s)
            if mat is None:
                raise MachineError(f"no matrix for symbol {s!r}")
            if mat.shape != (d, d):
                raise MachineError(f"matrix for {s!r} has shape {mat.shape}, expected {(d, d)}")
            if np.any(mat < -TOL) or np.any(np.abs(mat.sum(axis=0) - 1) > TOL):
                raise MachineError(f"matrix for {s!r} is not column-stochastic")

    @property
    def full_alphabet(self) -> tuple:
        return self.alphabet + ((LEFT,) if self.left else ()) + ((RIGHT,) if self.right else ())

    def index(self, q) -> int:
        return self.states.index(q)


def pfa_run(m: Pfa, x) -> RunOutcome:
    word = as_word(x)
    for s in word:
        if s not in m.alphabet:
            raise MachineError(f"symbol {s!r} outside the alphabet")
    p = np.zeros(len(m.states))
    p[m.index(m.initial)] = 1.0
    for s in _framed(word, m.left, m.right):
        p = m.matrices[s] @ p
    pa = float(sum(p[m.index(q)] for q in m.accepting))
    pr = float(sum(p[m.index(q)] for q in m.rejecting))
    return RunOutcome(pa, pr, max(0.0, 1.0 - pa - pr))


# --------------------------------------------------------------------------
# quantum machines


@dataclass(frozen=True)
class Qfa:
    """Measure-many one-way quantum automaton.

    ``initial_vector`` and ``offsets`` are normally derived from ``initial``;
    they are set explicitly only by transformations that fold a prefix of the
    computation into the start configuration.
    """

    states: tuple
    alphabet: tuple
    unitaries: Mapping
    initial: str
    accepting: frozenset
    rejecting: frozenset
    left: bool = True
    right: bool = True
    initial_vector: np.ndarray | None = field(default=None, compare=False)
    offsets: tuple = (0.0, 0.0)

    def __init__(self, states, alphabet, unitaries, initial, accepting, rejecting,
                 left=True, right=True, initial_vector=None, offsets=(0.0, 0.0)):
        set_ = object.__setattr__
        set_(self, "states", tuple(states))
        set_(self, "alphabet", tuple(alphabet))
        set_(self, "unitaries", {s: np.asarray(u, dtype=np.complex128) for s, u in unitaries.items()})
        set_(self, "initial", initial)
        set_(self, "accepting", frozenset(accepting))
        set_(self, "rejecting", frozenset(rejecting))
        set_(self, "left", bool(left))
        set_(self, "right", bool(right))
        set_(self, "initial_vector", None if initial_vector is None
             else np.asarray(initial_vector, dtype=np.complex128))
        set_(self, "offsets", (float(offsets[0]), float(offsets[1])))

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def full_alphabet(self) -> tuple:
        return self.alphabet + ((LEFT,) if self.left else ()) + ((RIGHT,) if self.right else ())

    def index(self, q) -> int:
        return self.states.index(q)

    def measurement(self) -> Measurement:
        return Measurement.from_sets(self.dim, [self.index(q) for q in self.accepting],
                                     [self.index(q) for q in self.rejecting])

    def start_vector(self) -> np.ndarray:
        if self.initial_vector is not None:
            return self.initial_vector
        return basis(self.dim, self.index(self.initial))


def qfa_validate(m: Qfa) -> list[str]:
    """Structural defects of ``m``; the empty list means the machine is valid."""
    defects = []
    qs = set(m.states)
    if len(qs) != len(m.states):
        defects.append("partition: duplicate state names")
    if m.initial not in qs:
        defects.append(f"partition: initial state {m.initial!r} not in Q")
    for name, group in (("accepting", m.accepting), ("rejecting", m.rejecting)):
        extra = sorted(group - qs)
        if extra:
            defects.append(f"partition: {name} states {extra} not in Q")
    overlap = sorted(m.accepting & m.rejecting)
    if overlap:
        defects.append(f"partition: accepting and rejecting overlap on {overlap}")
    for s in m.full_alphabet:
        if s not in m.unitaries:
            defects.append(f"coverage: no operator for symbol {s!r}")
    for s, u in sorted(m.unitaries.items()):
        if u.shape != (m.dim, m.dim):
            defects.append(f"unitarity: operator {s!r} has shape {u.shape}, expected {(m.dim, m.dim)}")
        elif not np.all(np.isfinite(u)):
            defects.append(f"unitarity: operator {s!r} has non-finite entries")
        else:
            d = unitarity_defect(u)
            if d > TOL:
                defects.append(f"unitarity: operator {s!r} deviates from unitary by {d:.3g}")
    if m.initial_vector is not None:
        v = m.initial_vector
        if v.shape != (m.dim,):
            defects.append("partition: initial vector has wrong dimension")
        elif abs(norm_sq(v) + sum(m.offsets) - 1) > TOL:
            defects.append("partition: initial vector and offsets do not carry unit mass")
    return defects


def qfa_run(m: Qfa, x, trace: bool = False, check: bool = True) -> RunOutcome:
    """Fold the extended transition over ``¢x$`` from ``(|q0>, 0, 0)``."""
    if check:
        defects = m.__dict__.get("_defects")   # validated once per machine object
        if defects is None:
            defects = qfa_validate(m)
            m.__dict__["_defects"] = defects
        if defects:
            raise MachineError("invalid machine: " + "; ".join(defects))
    word = as_word(x)
    for s in word:
        if s not in m.alphabet:
            raise MachineError(f"symbol {s!r} outside the alphabet")
    meas = m.measurement()
    psi = HaltingTriple(m.start_vector(), *m.offsets)
    steps = []
    for s in _framed(word, m.left, m.right):
        nxt = hat_T_apply(m.unitaries[s], meas, psi, check=False)
        if trace:
            steps.append((nxt.gamma_acc - psi.gamma_acc, nxt.gamma_rej - psi.gamma_rej))
        psi = nxt
    return RunOutcome(psi.gamma_acc, psi.gamma_rej, norm_sq(psi.phi), tuple(steps))


def run_machine(m, x) -> RunOutcome:
    """Run any bare machine kind and return a :class:`RunOutcome`."""
    if isinstance(m, Qfa):
        return qfa_run(m, x)
    if isinstance(m, Pfa):
        return pfa_run(m, x)
    if isinstance(m, Dfa):
        return dfa_outcome(m, x)
    raise MachineError(f"cannot run object of type {type(m).__name__}")


def dfa_to_qfa(m: Dfa) -> Qfa:
    """Embed a reversible automaton into a measure-many quantum automaton.

    Every original state is non-halting; each accepting or rejecting state
    ``q`` gets a halting copy ``q^`` that the right endmarker swaps into,
    reproducing final-state acceptance with probability 1.
    """
    if rfa_check(m):
        raise MachineError("automaton is not reversible")
    k = len(m.states)
    idx = {q: i for i, q in enumerate(m.states)}
    copies = [f"{q}^" for q in m.states]
    unitaries = {}
    for s in m.full_alphabet:
        perm = [idx[m.delta[(q, s)]] for q in m.states] + list(range(k, 2 * k))
        unitaries[s] = permutation_matrix(perm)
    swap = list(range(2 * k))
    for q in m.accepting | m.rejecting:
        i = idx[q]
        swap[i], swap[k + i] = k + i, i
    swap_m = permutation_matrix(swap)
    unitaries[RIGHT] = swap_m @ unitaries[RIGHT] if m.right else swap_m
    return Qfa(list(m.states) + copies, m.alphabet, unitaries, m.initial,
               [f"{q}^" for q in m.accepting], [f"{q}^" for q in m.rejecting],
               left=m.left, right=True)


def minimal_dfa(alphabet, accepts, max_states: int = 64, depth: int | None = None) -> Dfa:
    """Build the minimal complete DFA for a regular language given by a predicate.

    States are identified by their acceptance signature on all suffixes of
    length ≤ ``depth`` (default ``max_states``); this is exact for languages
    whose minimal DFA has at most ``depth + 1`` states.
    """
    depth = max_states if depth is None else depth
    alphabet = tuple(alphabet)
    suffixes = [w for w in all_words(alphabet, min(depth, 8))]

    def sig(prefix):
        return tuple(bool(accepts(prefix + z)) for z in suffixes)

    names = {sig(()): "s0"}
    frontier = deque([()])
    delta = {}
    while frontier:
        p = frontier.popleft()
        q = names[sig(p)]
        for a in alphabet:
            sg = sig(p + (a,))
            if sg not in names:
                if len(names) >= max_states:
                    raise MachineError("language needs more states than allowed")
                names[sg] = f"s{len(names)}"
                frontier.append(p + (a,))
            delta[(q, a)] = names[sg]
    states = [f"s{i}" for i in range(len(names))]
    accepting = [name for sg, name in names.items() if sg[0]]
    return Dfa(states, alphabet, delta, "s0", accepting,
               [q for q in states if q not in accepting])


__all__ = [
    "LEFT", "RIGHT", "ACCEPT", "REJECT", "NEITHER", "UNDECIDED", "MachineError", "RunOutcome",
    "Dfa", "Rfa", "Pfa", "Qfa", "track_symbol", "split_track", "as_word", "all_words",
    "dfa_run", "dfa_outcome", "rfa_check", "is_reversible", "partial_order_condition_check",
    "pfa_run", "qfa_validate", "qfa_run", "run_machine", "dfa_to_qfa", "minimal_dfa",
    "as_matrix", "LinalgError",
]
