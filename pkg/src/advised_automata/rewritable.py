"""Quantum automata on a rewritable advice track.

The machine's local rule ``V_sigma`` acts on ``state (x) one advice cell``;
at head position ``i`` it is applied to the state register and cell ``i``
only.  The joint state over ``Q x Gamma~^n`` is simulated densely, so the
input length is capped (default 6, override with the environment variable
:data:`CAP_ENV`).

Local matrices are indexed ``q * |Gamma~| + c``.

Two machine types are provided:

* :class:`RewritableQfa` -- a single machine, measured after every step
  (``per_step``) or once at the end (``final_only``);
* :class:`TensorRqfa` -- several ``final_only`` machines run in parallel on
  their own registers, with accepting/rejecting sets given as boolean masks
  over state tuples.  Products, complements, unions and majority-vote
  amplification all produce this type.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .advice import AdviceError, QuantumAdvice
from .linalg import TOL, unitarity_defect
from .machines import MachineError, RunOutcome, as_word

PER_STEP = "per_step"
FINAL_ONLY = "final_only"
CAP_ENV = "ADVISED_AUTOMATA_RQFA_CAP"
DEFAULT_CAP = 6
TENSOR_SEP = "⊗"


def length_cap() -> int:
    return int(os.environ.get(CAP_ENV, DEFAULT_CAP))


@dataclass(frozen=True)
class RewritableQfa:
    """Quantum automaton with a rewritable advice track."""

    states: tuple
    alphabet: tuple
    cells: tuple
    local: Mapping
    initial: str
    accepting: frozenset
    rejecting: frozenset
    mode: str = PER_STEP
    overrides: Mapping = field(default_factory=dict)

    def __init__(self, states, alphabet, cells, local, initial, accepting, rejecting,
                 mode=PER_STEP, overrides=None):
        set_ = object.__setattr__
        set_(self, "states", tuple(states))
        set_(self, "alphabet", tuple(alphabet))
        set_(self, "cells", tuple(cells))
        set_(self, "local", {s: np.asarray(v, dtype=np.complex128) for s, v in local.items()})
        set_(self, "initial", initial)
        set_(self, "accepting", frozenset(accepting))
        set_(self, "rejecting", frozenset(rejecting))
        set_(self, "mode", mode)
        set_(self, "overrides", {(int(i), s): np.asarray(v, dtype=np.complex128)
                                 for (i, s), v in (overrides or {}).items()})
        defects = rqfa_validate(self)
        if defects:
            raise MachineError("invalid rewritable machine: " + "; ".join(defects))

    @property
    def local_dim(self) -> int:
        return len(self.states) * len(self.cells)

    def operator(self, i: int, sigma: str) -> np.ndarray:
        """Local rule applied at (1-based) position ``i`` on symbol ``sigma``."""
        v = self.overrides.get((i, sigma))
        return self.local[sigma] if v is None else v

    def state_mask(self, group) -> np.ndarray:
        return np.array([q in group for q in self.states])

    def cell_index(self, c) -> int:
        try:
            return self.cells.index(c)
        except ValueError:
            raise AdviceError(f"advice symbol {c!r} outside the cell alphabet") from None


def rqfa_validate(m: RewritableQfa) -> list[str]:
    """Structural defects of a rewritable machine (empty list when valid)."""
    defects = []
    if m.mode not in (PER_STEP, FINAL_ONLY):
        defects.append(f"mode must be {PER_STEP!r} or {FINAL_ONLY!r}")
    if len(set(m.states)) != len(m.states) or len(set(m.cells)) != len(m.cells):
        defects.append("partition: duplicate state or cell names")
    if m.initial not in m.states:
        defects.append(f"partition: initial state {m.initial!r} not in Q")
    if not (m.accepting | m.rejecting) <= set(m.states):
        defects.append("partition: halting states must belong to Q")
    if m.accepting & m.rejecting:
        defects.append("partition: accepting and rejecting overlap")
    d = m.local_dim
    for s in m.alphabet:
        if s not in m.local:
            defects.append(f"coverage: no local rule for {s!r}")
    for key, v in list(m.local.items()) + list(m.overrides.items()):
        if v.shape != (d, d):
            defects.append(f"unitarity: rule {key!r} has shape {v.shape}, expected {(d, d)}")
        elif unitarity_defect(v) > TOL:
            defects.append(f"unitarity: rule {key!r} deviates by {unitarity_defect(v):.3g}")
    return defects


# --------------------------------------------------------------------------
# joint-state simulation


def _check_len(n: int):
    cap = length_cap()
    if n > cap:
        raise MachineError(f"input length {n} exceeds the rewritable length cap {cap}")


def apply_local(psi: np.ndarray, v: np.ndarray, state_axis: int, cell_axis: int,
                nq: int, ng: int) -> np.ndarray:
    """Apply the local rule ``v`` to the given state and cell axes of ``psi``."""
    v4 = v.reshape(nq, ng, nq, ng)
    out = np.tensordot(v4, psi, axes=([2, 3], [state_axis, cell_axis]))
    # ``out`` has the two new axes first; put them back where they came from.
    return np.moveaxis(out, [0, 1], [state_axis, cell_axis])


def initial_joint_state(m: RewritableQfa, phi: QuantumAdvice, n: int) -> np.ndarray:
    ng = len(m.cells)
    psi = np.zeros((len(m.states),) + (ng,) * n, dtype=np.complex128)
    q0 = m.states.index(m.initial)
    for y, a in phi.at(n):
        psi[(q0,) + tuple(m.cell_index(c) for c in y)] += a
    return psi


def _measure(psi, acc_mask, rej_mask, nstate_axes):
    probs = np.abs(psi) ** 2
    marginal = probs.sum(axis=tuple(range(nstate_axes, psi.ndim)))
    return float(marginal[acc_mask].sum()), float(marginal[rej_mask].sum())


def rqfa_run(m, x, phi: QuantumAdvice, measure_mode: str | None = None) -> RunOutcome:
    """Run a rewritable machine on ``x`` with quantum advice ``phi``.

    ``measure_mode`` defaults to the machine's own mode.
    """
    if isinstance(m, TensorRqfa):
        return m.run(x, phi)
    x = as_word(x)
    n = len(x)
    _check_len(n)
    for s in x:
        if s not in m.alphabet:
            raise MachineError(f"symbol {s!r} outside the alphabet")
    mode = measure_mode or m.mode
    if mode not in (PER_STEP, FINAL_ONLY):
        raise MachineError(f"unknown measure mode {mode!r}")
    nq, ng = len(m.states), len(m.cells)
    acc, rej = m.state_mask(m.accepting), m.state_mask(m.rejecting)
    halt = acc | rej
    psi = initial_joint_state(m, phi, n)
    p_acc = p_rej = 0.0
    steps = []
    for i, s in enumerate(x, start=1):
        psi = apply_local(psi, m.operator(i, s), 0, i, nq, ng)
        if mode == PER_STEP:
            pa, pr = _measure(psi, acc, rej, 1)
            psi[halt] = 0
            p_acc += pa
            p_rej += pr
            steps.append((pa, pr))
    if mode == FINAL_ONLY:
        p_acc, p_rej = _measure(psi, acc, rej, 1)
        psi[halt] = 0
    residual = float(np.sum(np.abs(psi) ** 2))
    return RunOutcome(p_acc, p_rej, residual, tuple(steps))


def final_joint_state(m: RewritableQfa, x, phi: QuantumAdvice) -> np.ndarray:
    """Joint state after all unitary steps of a ``final_only`` run (before measuring)."""
    x = as_word(x)
    _check_len(len(x))
    psi = initial_joint_state(m, phi, len(x))
    for i, s in enumerate(x, start=1):
        psi = apply_local(psi, m.operator(i, s), 0, i, len(m.states), len(m.cells))
    return psi


def positioned_operator(m: RewritableQfa, i: int, sigma: str, n: int) -> np.ndarray:
    """Dense matrix of the positioned rule on ``Q x Gamma~^n`` (small ``n`` only)."""
    nq, ng = len(m.states), len(m.cells)
    dim = nq * ng ** n
    out = np.empty((dim, dim), dtype=np.complex128)
    eye = np.eye(dim, dtype=np.complex128)
    for j in range(dim):
        col = eye[j].reshape((nq,) + (ng,) * n)
        out[:, j] = apply_local(col, m.operator(i, sigma), 0, i, nq, ng).reshape(-1)
    return out


# --------------------------------------------------------------------------
# parallel (tensor) machines


def tensor_symbol(parts: Sequence[str]) -> str:
    return TENSOR_SEP.join(parts)


@dataclass(frozen=True)
class TensorRqfa:
    """Several ``final_only`` machines run in parallel on separate registers.

    ``accept_mask``/``reject_mask`` are boolean arrays of shape
    ``(|Q_1|, ..., |Q_k|)`` selecting accepting/rejecting state tuples.
    The composite advice cell alphabet is the product of the component cell
    alphabets, with symbols named ``c_1⊗...⊗c_k``.
    """

    components: tuple
    accept_mask: np.ndarray = field(compare=False)
    reject_mask: np.ndarray = field(compare=False)

    def __init__(self, components, accept_mask, reject_mask):
        comps = tuple(components)
        for c in comps:
            if not isinstance(c, RewritableQfa):
                raise MachineError("tensor components must be RewritableQfa machines")
            if c.mode != FINAL_ONLY:
                raise MachineError("tensor components must measure final_only")
            if any(TENSOR_SEP in g for g in c.cells):
                raise MachineError(f"cell names may not contain {TENSOR_SEP!r}")
            if c.alphabet != comps[0].alphabet:
                raise MachineError("components must share the input alphabet")
        shape = tuple(len(c.states) for c in comps)
        acc = np.asarray(accept_mask, dtype=bool)
        rej = np.asarray(reject_mask, dtype=bool)
        if acc.shape != shape or rej.shape != shape:
            raise MachineError(f"masks must have shape {shape}")
        if np.any(acc & rej):
            raise MachineError("accepting and rejecting tuples overlap")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "accept_mask", acc)
        object.__setattr__(self, "reject_mask", rej)

    @classmethod
    def single(cls, m: RewritableQfa) -> "TensorRqfa":
        return cls([m], m.state_mask(m.accepting), m.state_mask(m.rejecting))

    @property
    def alphabet(self) -> tuple:
        return self.components[0].alphabet

    @property
    def mode(self) -> str:
        return FINAL_ONLY

    def split_symbol(self, c: str) -> tuple:
        parts = tuple(c.split(TENSOR_SEP))
        if len(parts) != len(self.components):
            raise AdviceError(f"composite advice symbol {c!r} has {len(parts)} parts, "
                              f"expected {len(self.components)}")
        return tuple(m.cell_index(p) for m, p in zip(self.components, parts))

    def run(self, x, phi: QuantumAdvice) -> RunOutcome:
        x = as_word(x)
        n = len(x)
        _check_len(n)
        for s in x:
            if s not in self.alphabet:
                raise MachineError(f"symbol {s!r} outside the alphabet")
        k = len(self.components)
        shape = tuple(len(c.states) for c in self.components)
        cshape = tuple(len(c.cells) for c in self.components)
        psi = np.zeros(shape + cshape * n, dtype=np.complex128)
        q0 = tuple(c.states.index(c.initial) for c in self.components)
        for y, a in phi.at(n):
            idx = q0
            for sym in y:
                idx = idx + self.split_symbol(sym)
            psi[idx] += a
        for i, s in enumerate(x, start=1):
            for j, c in enumerate(self.components):
                psi = apply_local(psi, c.operator(i, s), j, k + (i - 1) * k + j,
                                  len(c.states), len(c.cells))
        p_acc, p_rej = _measure(psi, self.accept_mask, self.reject_mask, k)
        total = float(np.sum(np.abs(psi) ** 2))
        return RunOutcome(p_acc, p_rej, max(0.0, total - p_acc - p_rej))


def _as_tensor(m) -> TensorRqfa:
    if isinstance(m, TensorRqfa):
        return m
    if isinstance(m, RewritableQfa):
        if m.mode != FINAL_ONLY:
            raise MachineError("per_step machine: defer its measurement first")
        return TensorRqfa.single(m)
    raise MachineError(f"not a rewritable machine: {type(m).__name__}")


def rqfa_product(m1, m2) -> TensorRqfa:
    """Parallel composition accepting iff both components accept."""
    t1, t2 = _as_tensor(m1), _as_tensor(m2)
    if t1.alphabet != t2.alphabet:
        raise MachineError("input alphabets differ")
    a1, r1 = t1.accept_mask, t1.reject_mask
    a2, r2 = t2.accept_mask, t2.reject_mask
    acc = np.multiply.outer(a1, a2)
    rej = np.logical_or.outer(r1, r2)
    return TensorRqfa(t1.components + t2.components, acc, rej)


def rqfa_complement(m):
    """Swap accepting and rejecting states (``final_only`` machines only)."""
    if isinstance(m, RewritableQfa):
        if m.mode != FINAL_ONLY:
            raise MachineError("per_step machine: defer its measurement first")
        return RewritableQfa(m.states, m.alphabet, m.cells, m.local, m.initial,
                             m.rejecting, m.accepting, m.mode, m.overrides)
    t = _as_tensor(m)
    return TensorRqfa(t.components, t.reject_mask, t.accept_mask)


def rqfa_union(m1, m2) -> TensorRqfa:
    """``L1 ∪ L2`` as the complement of the product of complements."""
    return rqfa_complement(rqfa_product(rqfa_complement(m1), rqfa_complement(m2)))


def tensor_advice(*phis: QuantumAdvice) -> QuantumAdvice:
    """``|phi_1> (x) ... (x) |phi_k>`` over the composite cell alphabet."""
    alphabets = [p.alphabet for p in phis]
    composite = [""]
    for a in alphabets:
        composite = [c + TENSOR_SEP + s if c else s for c in composite for s in a]

    def gen(n: int):
        table = phis[0].at(n)
        for p in phis[1:]:
            table = [(tuple(u + TENSOR_SEP + v for u, v in zip(w, y)), a * b)
                     for w, a in table for y, b in p.at(n)]
        return table

    return QuantumAdvice(tuple(composite), generator=gen)


__all__ = [
    "PER_STEP", "FINAL_ONLY", "CAP_ENV", "DEFAULT_CAP", "TENSOR_SEP", "length_cap",
    "RewritableQfa", "TensorRqfa", "rqfa_validate", "rqfa_run", "rqfa_product",
    "rqfa_complement", "rqfa_union", "tensor_advice", "tensor_symbol", "apply_local",
    "initial_joint_state", "final_joint_state", "positioned_operator",
]
