"""Advice specifications, track composition and advised runs (read-only track).

Three advice kinds are supported, each defined per input length ``n``:

* :class:`DeterministicAdvice` -- a word ``h(n)`` of length ``n``;
* :class:`RandomizedAdvice` -- a finitely supported distribution ``D_n``;
* :class:`QuantumAdvice` -- a normalized amplitude table ``alpha_y``.

A rule comes either from an explicit per-length ``table`` or from a named
builtin generator (see :data:`BUILTINS`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Callable, Iterable, Mapping

import numpy as np

from .linalg import TOL
from .machines import (ACCEPT, REJECT, UNDECIDED, MachineError, RunOutcome, as_word,
                       run_machine, track_symbol)


class AdviceError(ValueError):
    """Raised when advice is undefined at a length or violates normalization."""


def track_join(x, y) -> tuple:
    """Pair ``x`` and ``y`` symbolwise into track symbols ``[x_i|y_i]``."""
    x, y = as_word(x), as_word(y)
    if len(x) != len(y):
        raise AdviceError(f"length mismatch: |x| = {len(x)}, |y| = {len(y)}")
    return tuple(track_symbol(a, b) for a, b in zip(x, y))


def _word_key(w) -> tuple:
    return as_word(w)


@dataclass(frozen=True)
class _Advice:
    alphabet: tuple
    table: Mapping | None = None
    builtin: tuple | None = None  # (name, params-dict)
    generator: Callable | None = field(default=None, compare=False, repr=False)

    def _raw(self, n: int):
        if self.table is not None:
            if n not in self.table:
                raise AdviceError(f"advice undefined at length {n}")
            return self.table[n]
        if self.generator is not None:
            return self.generator(n)
        raise AdviceError("advice has neither a table nor a generator")

    def lengths(self) -> list[int] | None:
        return sorted(self.table) if self.table is not None else None

    def _check_word(self, y, n):
        if len(y) != n:
            raise AdviceError(f"advice word {y!r} has length {len(y)}, expected {n}")
        bad = [s for s in y if s not in self.alphabet]
        if bad:
            raise AdviceError(f"advice symbols {bad} outside the advice alphabet")


@dataclass(frozen=True)
class DeterministicAdvice(_Advice):
    """Advice function ``h`` with ``|h(n)| = n``."""

    def at(self, n: int) -> tuple:
        y = _word_key(self._raw(n))
        self._check_word(y, n)
        return y


@dataclass(frozen=True)
class RandomizedAdvice(_Advice):
    """Per-length finite distribution ``D_n`` over ``Gamma^n``."""

    def at(self, n: int) -> list[tuple[tuple, float]]:
        """Support of ``D_n`` as ``(word, probability)`` pairs in lexicographic order."""
        agg: dict = {}
        for y, p in _items(self._raw(n)):
            y = _word_key(y)
            self._check_word(y, n)
            p = float(p)
            if p < -TOL:
                raise AdviceError(f"negative probability {p} for {y!r}")
            agg[y] = agg.get(y, 0.0) + p
        total = sum(agg.values())
        if abs(total - 1.0) > TOL:
            raise AdviceError(f"D_{n} sums to {total}, not 1")
        return sorted(agg.items())


@dataclass(frozen=True)
class QuantumAdvice(_Advice):
    """Per-length normalized amplitude table ``alpha_y``."""

    def at(self, n: int) -> list[tuple[tuple, complex]]:
        agg: dict = {}
        for y, a in _items(self._raw(n)):
            y = _word_key(y)
            self._check_word(y, n)
            agg[y] = agg.get(y, 0j) + complex(a)
        total = sum(abs(a) ** 2 for a in agg.values())
        if abs(total - 1.0) > TOL:
            raise AdviceError(f"amplitudes at length {n} have squared norm {total}, not 1")
        return sorted(agg.items())


def _items(raw) -> Iterable:
    return raw.items() if isinstance(raw, Mapping) else raw


AdviceSpec = _Advice


# --------------------------------------------------------------------------
# builtin generators


def zeros_then_one(n: int) -> tuple:
    """``0^{n-1} 1`` (and the empty word at ``n = 0``)."""
    return () if n == 0 else ("0",) * (n - 1) + ("1",)


def palindrome_pairs(n: int) -> list[tuple[tuple, float]]:
    """Uniform over ``y#y^R`` when ``n`` is odd, point mass on ``#^n`` otherwise."""
    if n % 2 == 0:
        return [(("#",) * n, 1.0)]
    m = n // 2
    ys = list(iproduct("01", repeat=m))
    return [(y + ("#",) + y[::-1], 1.0 / len(ys)) for y in ys]


def duplicated_pairs(n: int) -> list[tuple[tuple, float]]:
    """Uniform over ``yy`` when ``n`` is even, point mass on ``#^n`` otherwise."""
    if n % 2 == 1:
        return [(("#",) * n, 1.0)]
    ys = list(iproduct("01", repeat=n // 2))
    return [(y + y, 1.0 / len(ys)) for y in ys]


def uniform_on_language(members: Mapping[int, Iterable], pad: str = "#") -> Callable:
    """Generator for the uniform distribution over the members of each length.

    When a length has no members the distribution is a point mass on
    ``pad^n``.
    """
    def gen(n: int):
        ws = sorted({as_word(w) for w in members.get(n, ())})
        if not ws:
            return [((pad,) * n, 1.0)]
        return [(w, 1.0 / len(ws)) for w in ws]
    return gen


def zeros_then_one_advice() -> DeterministicAdvice:
    return DeterministicAdvice(("0", "1"), builtin=("zeros_then_one", {}), generator=zeros_then_one)


def palindrome_advice() -> RandomizedAdvice:
    return RandomizedAdvice(("0", "1", "#"), builtin=("palindrome_pairs", {}),
                            generator=palindrome_pairs)


def duplicate_advice() -> RandomizedAdvice:
    return RandomizedAdvice(("0", "1", "#"), builtin=("duplicated_pairs", {}),
                            generator=duplicated_pairs)


def language_advice(alphabet, members: Mapping[int, Iterable], pad: str = "#") -> RandomizedAdvice:
    members = {int(n): sorted("".join(as_word(w)) for w in ws) for n, ws in members.items()}
    return RandomizedAdvice(tuple(alphabet) + (pad,),
                            builtin=("uniform_on_language", {"members": members, "pad": pad}),
                            generator=uniform_on_language(members, pad))


def point_mass(h: DeterministicAdvice) -> RandomizedAdvice:
    """Degenerate distribution ``D_n(h(n)) = 1``."""
    return RandomizedAdvice(h.alphabet, generator=lambda n: [(h.at(n), 1.0)])


BUILTINS = {
    "zeros_then_one": lambda params: zeros_then_one_advice(),
    "palindrome_pairs": lambda params: palindrome_advice(),
    "duplicated_pairs": lambda params: duplicate_advice(),
    "uniform_on_language": lambda params: language_advice(
        params.get("alphabet", sorted({c for ws in params["members"].values() for w in ws for c in w})),
        {int(k): v for k, v in params["members"].items()}, params.get("pad", "#")),
}


# --------------------------------------------------------------------------
# advised runs


def run_with_det_advice(m, h: DeterministicAdvice, x) -> RunOutcome:
    """Run ``m`` on the track input ``[x | h(|x|)]``."""
    x = as_word(x)
    return run_machine(m, track_join(x, h.at(len(x))))


def run_with_randomized_advice(m, d: RandomizedAdvice, x) -> RunOutcome:
    """Exact ``sum_y D_n(y) run(m, [x|y])`` over the support (lexicographic order)."""
    x = as_word(x)
    return RunOutcome.mix((p, run_machine(m, track_join(x, y))) for y, p in d.at(len(x)))


def run_with_quantum_advice_readonly(m, phi: QuantumAdvice, x) -> RunOutcome:
    """Read-only quantum advice: the ``|alpha_y|^2``-weighted mixture of branches."""
    x = as_word(x)
    return RunOutcome.mix((abs(a) ** 2, run_machine(m, track_join(x, y)))
                          for y, a in phi.at(len(x)))


def run_with_advice(m, advice, x) -> RunOutcome:
    if isinstance(advice, DeterministicAdvice):
        return run_with_det_advice(m, advice, x)
    if isinstance(advice, RandomizedAdvice):
        return run_with_randomized_advice(m, advice, x)
    if isinstance(advice, QuantumAdvice):
        return run_with_quantum_advice_readonly(m, advice, x)
    raise AdviceError(f"unknown advice type {type(advice).__name__}")


def classify(outcome: RunOutcome, epsilon: float) -> str:
    """``accept`` if ``p_acc >= 1 - eps``, ``reject`` if ``p_rej >= 1 - eps``, else ``undecided``."""
    if not 0 <= epsilon < 0.5:
        raise AdviceError(f"epsilon must lie in [0, 1/2), got {epsilon}")
    if outcome.p_acc >= 1 - epsilon - TOL:
        return ACCEPT
    if outcome.p_rej >= 1 - epsilon - TOL:
        return REJECT
    return UNDECIDED


def heavy_branch_mass(weights, accept_probs, eps: float) -> float:
    """Total weight of branches whose acceptance probability is at least ``1 - 3 eps``."""
    return float(sum(p for p, r in zip(weights, accept_probs) if r >= 1 - 3 * eps - TOL))


def sample_randomized(m, d: RandomizedAdvice, x, trials: int, seed: int = 0) -> float:
    """Monte Carlo estimate of ``p_acc`` (diagnostic only)."""
    x = as_word(x)
    support = d.at(len(x))
    rng = np.random.default_rng(seed)
    probs = np.array([p for _, p in support])
    picks = rng.choice(len(support), size=trials, p=probs / probs.sum())
    cache = {}
    hits = 0.0
    for i in picks:
        if i not in cache:
            cache[i] = run_machine(m, track_join(x, support[i][0])).p_acc
        hits += rng.random() < cache[i]
    return hits / trials


__all__ = [
    "AdviceError", "AdviceSpec", "DeterministicAdvice", "RandomizedAdvice", "QuantumAdvice",
    "track_join", "zeros_then_one", "palindrome_pairs", "duplicated_pairs", "uniform_on_language",
    "zeros_then_one_advice", "palindrome_advice", "duplicate_advice", "language_advice",
    "point_mass", "BUILTINS", "run_with_det_advice", "run_with_randomized_advice",
    "run_with_quantum_advice_readonly", "run_with_advice", "classify", "heavy_branch_mass",
    "sample_randomized", "MachineError",
]
