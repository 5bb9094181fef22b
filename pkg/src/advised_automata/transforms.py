"""Machine-to-machine and advice-to-advice constructions.

Every pass returns fresh immutable objects and preserves acceptance
probabilities (checked exhaustively in the test-suite):

* :func:`drop_right_endmarker` / :func:`drop_left_endmarker`
* :func:`defer_measurement` -- per-step measurement to a single final one
* :func:`amplify` -- k-fold parallel run with majority vote
* :func:`randomized_to_quantum` / :func:`quantum_to_randomized`
* :func:`lift_dfa_to_rqfa` -- deterministic automaton + randomized advice
  to a rewritable quantum machine that records its states on the track
"""

from __future__ import annotations

from math import comb
from typing import Mapping

import numpy as np

from .advice import (AdviceError, DeterministicAdvice, QuantumAdvice, RandomizedAdvice,
                     _Advice)
from .linalg import block_diag, permutation_matrix
from .machines import LEFT, RIGHT, Dfa, MachineError, Qfa, as_word, split_track, track_symbol
from .rewritable import (FINAL_ONLY, PER_STEP, RewritableQfa, TensorRqfa, apply_local,
                         initial_joint_state, rqfa_complement, rqfa_product, rqfa_union,
                         tensor_advice)

END_TAG = "$"


# --------------------------------------------------------------------------
# helpers


def complete_permutation(partial: Mapping[int, int], dim: int) -> list[int]:
    """Extend an injective partial map on ``range(dim)`` to a permutation.

    Unassigned sources are matched to unassigned targets in increasing order.
    """
    targets = list(partial.values())
    if len(set(targets)) != len(targets):
        raise MachineError("partial map is not injective")
    perm = [None] * dim
    for s, t in partial.items():
        perm[s] = t
    free = iter(sorted(set(range(dim)) - set(targets)))
    for s in range(dim):
        if perm[s] is None:
            perm[s] = next(free)
    return perm


def _map_advice(advice: _Advice, fn, alphabet, cls=None):
    """New advice of class ``cls`` whose per-length entry is ``fn(n, advice.at(n))``."""
    cls = cls or type(advice)
    if advice.table is not None:
        table = {n: fn(n, advice.at(n)) for n in advice.table}
        return cls(tuple(alphabet), table=table)
    return cls(tuple(alphabet), generator=lambda n: fn(n, advice.at(n)))


def tag_last_symbol(advice: _Advice, tag: str = END_TAG, tag_first: bool = False) -> _Advice:
    """Replace the last advice symbol ``tau_n`` by ``[tau_n|tag]`` (any advice kind).

    With ``tag_first`` the tag goes on top: ``[tag|tau_n]``.
    """
    def mark(t):
        return track_symbol(tag, t) if tag_first else track_symbol(t, tag)

    alphabet = advice.alphabet + tuple(mark(t) for t in advice.alphabet)

    def retag(w):
        return w[:-1] + (mark(w[-1]),) if w else w

    if isinstance(advice, DeterministicAdvice):
        return _map_advice(advice, lambda n, w: retag(w), alphabet)
    return _map_advice(advice, lambda n, items: [(retag(w), a) for w, a in items], alphabet)


def reorder_states(m: Qfa) -> Qfa:
    """Reorder states as non-halting, accepting, rejecting (stable within each block)."""
    non = [q for q in m.states if q not in m.accepting | m.rejecting]
    acc = [q for q in m.states if q in m.accepting]
    rej = [q for q in m.states if q in m.rejecting]
    order = non + acc + rej
    perm = [m.index(q) for q in order]
    unitaries = {s: u[np.ix_(perm, perm)] for s, u in m.unitaries.items()}
    init = None if m.initial_vector is None else m.initial_vector[perm]
    return Qfa(order, m.alphabet, unitaries, m.initial, m.accepting, m.rejecting,
               m.left, m.right, init, m.offsets)


# --------------------------------------------------------------------------
# endmarker elimination


def sweeping_matrix(k0: int, k1: int, k2: int) -> np.ndarray:
    """Block permutation exchanging the old halting block with its fresh copy."""
    h = k1 + k2
    perm = list(range(k0)) + [k0 + h + j for j in range(h)] + [k0 + j for j in range(h)]
    return permutation_matrix(perm)


def drop_right_endmarker(m: Qfa, h: DeterministicAdvice) -> tuple[Qfa, DeterministicAdvice]:
    """Fold the right endmarker into the last track symbol.

    The new machine has a fresh halting copy of every halting state.  On
    interior symbols it applies ``S diag(U, I)``; on a final symbol
    ``[sigma|[tau|$]]`` it applies ``diag(U_$, I) S diag(U, I)``, so the
    halting amplitude of the last ordinary step is parked in the copies
    before ``U_$`` acts.  ``h'`` tags the last advice symbol.  Inputs must
    be nonempty (the empty word has no symbol to tag).
    """
    if not m.right:
        raise MachineError("machine has no right endmarker")
    if not isinstance(h, DeterministicAdvice):
        raise AdviceError("drop_right_endmarker needs deterministic advice")
    m = reorder_states(m)
    k0 = m.dim - len(m.accepting) - len(m.rejecting)
    k1, k2 = len(m.accepting), len(m.rejecting)
    s = sweeping_matrix(k0, k1, k2)
    eye_h = np.eye(k1 + k2)
    acc_copies = [f"{q}'" for q in m.states[k0:k0 + k1]]
    rej_copies = [f"{q}'" for q in m.states[k0 + k1:]]
    states = list(m.states) + acc_copies + rej_copies
    u_end = block_diag(m.unitaries[RIGHT], eye_h)
    unitaries = {}
    alphabet = []
    for sym in m.alphabet:
        sigma, tau = split_track(sym)
        step = s @ block_diag(m.unitaries[sym], eye_h)
        unitaries[sym] = step
        final = track_symbol(sigma, track_symbol(tau, END_TAG))
        unitaries[final] = u_end @ s @ block_diag(m.unitaries[sym], eye_h)
        alphabet += [sym, final]
    if m.left:
        unitaries[LEFT] = s @ block_diag(m.unitaries[LEFT], eye_h)
    init = None
    if m.initial_vector is not None:
        init = np.concatenate([m.initial_vector, np.zeros(k1 + k2)])
    new = Qfa(states, alphabet, unitaries, m.initial, set(m.accepting) | set(acc_copies),
              set(m.rejecting) | set(rej_copies), left=m.left, right=False,
              initial_vector=init, offsets=m.offsets)
    return new, tag_last_symbol(h)


def drop_left_endmarker(m: Qfa) -> Qfa:
    """Fold the first step on ``¢`` into the start configuration.

    The new start vector is ``P_non U_¢ |q0>``; the halting mass of that
    step becomes a constant ``(p_acc, p_rej)`` offset on every run.
    """
    if not m.left:
        raise MachineError("machine has no left endmarker")
    meas = m.measurement()
    w = m.unitaries[LEFT] @ m.start_vector()
    pa = float(np.sum(np.abs(w[meas.acc.mask()]) ** 2))
    pr = float(np.sum(np.abs(w[meas.rej.mask()]) ** 2))
    init = np.where(meas.non.mask(), w, 0)
    unitaries = {s: u for s, u in m.unitaries.items() if s != LEFT}
    return Qfa(m.states, m.alphabet, unitaries, m.initial, m.accepting, m.rejecting,
               left=False, right=m.right, initial_vector=init,
               offsets=(m.offsets[0] + pa, m.offsets[1] + pr))


# --------------------------------------------------------------------------
# advice conversions


def randomized_to_quantum(d: RandomizedAdvice) -> QuantumAdvice:
    """``|phi_n> = sum_y sqrt(D_n(y)) |y>``."""
    if not isinstance(d, RandomizedAdvice):
        raise AdviceError("expected randomized advice")
    return _map_advice(d, lambda n, items: [(y, complex(np.sqrt(p))) for y, p in items],
                       d.alphabet, QuantumAdvice)


def quantum_to_randomized(phi: QuantumAdvice) -> RandomizedAdvice:
    """``D_n(y) = |alpha_y|^2``."""
    if not isinstance(phi, QuantumAdvice):
        raise AdviceError("expected quantum advice")
    return _map_advice(phi, lambda n, items: [(y, abs(a) ** 2) for y, a in items],
                       phi.alphabet, RandomizedAdvice)


# --------------------------------------------------------------------------
# rewritable constructions


def _track_parts(alphabet) -> tuple[tuple, tuple]:
    uppers, lowers = [], []
    for sym in alphabet:
        u, l = split_track(sym)
        if u not in uppers:
            uppers.append(u)
        if l not in lowers:
            lowers.append(l)
    return tuple(uppers), tuple(lowers)


def lift_dfa_to_rqfa(m: Dfa, d: RandomizedAdvice) -> tuple[RewritableQfa, QuantumAdvice]:
    """Rewritable quantum machine that writes ``[q|tau]`` on each cell it reads.

    Endmarkers of ``m`` are folded in: the machine starts in ``delta(q0, ¢)``
    and accepts in state ``q`` iff ``delta(q, $)`` accepts.
    """
    sigma, lowers = _track_parts(m.alphabet)
    gamma = tuple(d.alphabet)
    for s in sigma:
        for t in gamma:
            if (m.states[0], track_symbol(s, t)) not in m.delta:
                raise MachineError(f"delta undefined on track symbol [{s}|{t}]")
    marks = [track_symbol(q, t) for q in m.states for t in gamma]
    cells = gamma + tuple(marks)
    if len(set(cells)) != len(cells):
        raise MachineError("recorded-state symbols collide with advice symbols")
    ng = len(cells)
    qi = {q: i for i, q in enumerate(m.states)}
    ci = {c: i for i, c in enumerate(cells)}
    local = {}
    for s in sigma:
        partial = {}
        for q in m.states:
            for t in gamma:
                target = m.delta[(q, track_symbol(s, t))]
                partial[qi[q] * ng + ci[t]] = qi[target] * ng + ci[track_symbol(q, t)]
        local[s] = permutation_matrix(complete_permutation(partial, len(m.states) * ng))
    q0 = m.delta[(m.initial, LEFT)] if m.left else m.initial

    def final(q):
        return m.classify_state(m.delta[(q, RIGHT)] if m.right else q)

    acc = [q for q in m.states if final(q) == "accept"]
    rej = [q for q in m.states if final(q) == "reject"]
    machine = RewritableQfa(m.states, sigma, cells, local, q0, acc, rej, mode=FINAL_ONLY)
    return machine, randomized_to_quantum(d)


def shadow(q: str) -> str:
    return f"^{q}"


def defer_measurement(m: RewritableQfa, phi: QuantumAdvice) -> tuple[RewritableQfa, QuantumAdvice]:
    """Turn a per-step machine into one measured once, after the last symbol.

    Each halting state ``q`` gets a non-halting shadow ``^q``.  On an
    ordinary cell ``c`` the new rule applies ``V`` and then diverts halting
    amplitude ``(q, c')`` to ``(^q, [q|c'])``, marking the cell so that
    branches diverted at different steps stay orthogonal.  The advice's
    last cell carries ``[$|y_n]``; there ``V`` acts as usual on the
    underlying symbol, and every shadow ``^q`` meeting the tag returns to
    ``q`` leaving ``[^q|y_n]`` behind.  Shadows are left untouched by all
    other steps.  The final step is recognized by the tagged cell, so a
    single position-independent rule serves every input length.
    """
    if m.mode != PER_STEP:
        raise MachineError("defer_measurement expects a per_step machine")
    halting = [q for q in m.states if q in m.accepting | m.rejecting]
    states = tuple(m.states) + tuple(shadow(q) for q in halting)
    base = tuple(m.cells)
    interior = tuple(track_symbol(q, c) for q in halting for c in base)
    tagged = tuple(track_symbol(END_TAG, c) for c in base)
    returned = tuple(track_symbol(shadow(q), c) for q in halting for c in base)
    cells = base + interior + tagged + returned
    if len(set(cells)) != len(cells):
        raise MachineError("new advice symbols collide with existing cell names")
    nq, ng = len(states), len(cells)
    oq, og = len(m.states), len(base)
    dim = nq * ng
    qi = {q: i for i, q in enumerate(states)}
    ci = {c: i for i, c in enumerate(cells)}

    def idx(q, c):
        return qi[q] * ng + ci[c]

    diverting = np.eye(dim, dtype=np.complex128)
    for q in halting:
        for c in base:
            a, b = idx(q, c), idx(shadow(q), track_symbol(q, c))
            diverting[[a, b]] = diverting[[b, a]]
    returning = np.eye(dim, dtype=np.complex128)
    for q in halting:
        for c in base:
            a, b = idx(shadow(q), track_symbol(END_TAG, c)), idx(q, track_symbol(shadow(q), c))
            returning[[a, b]] = returning[[b, a]]

    def lift(v):
        big = np.eye(dim, dtype=np.complex128)
        for cell_set in (base, tagged):
            rows = [idx(q, c) for q in m.states for c in cell_set]
            big[np.ix_(rows, rows)] = v.reshape(oq * og, oq * og)
        return returning @ diverting @ big

    local = {s: lift(v) for s, v in m.local.items()}
    overrides = {k: lift(v) for k, v in m.overrides.items()}
    machine = RewritableQfa(states, m.alphabet, cells, local, m.initial, m.accepting,
                            m.rejecting, mode=FINAL_ONLY, overrides=overrides)
    return machine, tag_last_symbol(phi, tag_first=True)


def diverted_branches(n_machine: RewritableQfa, x, phi: QuantumAdvice) -> list[np.ndarray]:
    """Components of the joint state diverted into shadows at each step.

    The component diverted at step ``i`` is the part of the joint state in a
    shadow state whose cell ``i`` carries an interior mark ``[q|c]``.  Each
    component is propagated to the end of the run so that pairwise inner
    products can be compared directly.
    """
    x = as_word(x)
    nq, ng = len(n_machine.states), len(n_machine.cells)
    halting = n_machine.accepting | n_machine.rejecting
    shadows = np.array([q.startswith("^") for q in n_machine.states])
    marked = np.array(["|" in c and split_track(c)[0] in halting for c in n_machine.cells])
    local_mask = np.multiply.outer(shadows, marked)
    psi = initial_joint_state(n_machine, phi, len(x))
    branches: list[np.ndarray] = []
    for i, s in enumerate(x, start=1):
        v = n_machine.operator(i, s)
        psi = apply_local(psi, v, 0, i, nq, ng)
        branches = [apply_local(b, v, 0, i, nq, ng) for b in branches]
        mask = np.moveaxis(local_mask.reshape((nq, ng) + (1,) * (psi.ndim - 2)), 1, i)
        branches.append(np.where(mask, psi, 0))
    return branches


# --------------------------------------------------------------------------
# amplification


def binomial_tail(k: int, eps: float) -> float:
    """Probability that at least ``ceil(k/2)`` of ``k`` independent runs err."""
    return float(sum(comb(k, i) * eps ** i * (1 - eps) ** (k - i) for i in range((k + 1) // 2, k + 1)))


def majority_success(k: int, eps: float) -> float:
    """``sum_i C(k, ceil(k/2)+i) eps^(floor(k/2)-i) (1-eps)^(ceil(k/2)+i)``."""
    c, f = (k + 1) // 2, k // 2
    return float(sum(comb(k, c + i) * eps ** (f - i) * (1 - eps) ** (c + i) for i in range(f + 1)))


def amplify_k(eps0: float, eps: float) -> int:
    """Number of parallel runs needed to push error ``eps0`` down to ``eps``.

    Returns 1 when ``eps0 <= eps``; otherwise the least odd ``k`` whose
    majority-failure tail is at most ``eps``.
    """
    if not 0 <= eps0 < 0.5:
        raise ValueError(f"eps0 must lie in [0, 1/2), got {eps0}")
    if not 0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    if eps0 <= eps:
        return 1
    k = 3
    while binomial_tail(k, eps0) > eps:
        k += 2
    return k


def majority_masks(m: RewritableQfa, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Masks of ``k``-tuples with a strict majority of accepting / rejecting components."""
    acc = m.state_mask(m.accepting).astype(int)
    rej = m.state_mask(m.rejecting).astype(int)
    shape = (len(m.states),) * k
    count_acc = np.zeros(shape, dtype=int)
    count_rej = np.zeros(shape, dtype=int)
    for j in range(k):
        view = [1] * k
        view[j] = len(m.states)
        count_acc = count_acc + acc.reshape(view)
        count_rej = count_rej + rej.reshape(view)
    need = (k + 1) // 2
    return count_acc >= need, count_rej >= need


def amplify(m: RewritableQfa, phi: QuantumAdvice, eps0: float, eps: float):
    """Run ``k = amplify_k(eps0, eps)`` copies in parallel and take a majority vote.

    Tuples with no majority either way count as residual (undecided) mass.
    """
    if m.mode != FINAL_ONLY:
        raise MachineError("amplify expects a final_only machine (defer its measurement first)")
    k = amplify_k(eps0, eps)
    if k == 1:
        return m, phi
    return amplified(m, phi, k)


def amplified(m: RewritableQfa, phi: QuantumAdvice, k: int):
    """The ``k``-fold majority-vote machine and ``phi^{(x) k}`` (``k`` odd)."""
    if k < 1 or k % 2 == 0:
        raise ValueError("k must be a positive odd integer")
    acc, rej = majority_masks(m, k)
    return TensorRqfa([m] * k, acc, rej), tensor_advice(*([phi] * k))


__all__ = [
    "complete_permutation", "tag_last_symbol", "reorder_states", "sweeping_matrix",
    "drop_right_endmarker", "drop_left_endmarker", "randomized_to_quantum",
    "quantum_to_randomized", "lift_dfa_to_rqfa", "defer_measurement", "diverted_branches",
    "binomial_tail", "majority_success", "amplify_k", "majority_masks", "amplify", "amplified",
    "rqfa_product", "rqfa_complement", "rqfa_union", "tensor_advice",
]
