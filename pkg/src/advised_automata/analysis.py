"""Bounded-length checkers for closeness/equivalence conditions of advised
quantum automata, and a randomized oracle suite for the halting-triple norm
inequalities.

The checker works on a concrete machine ``M`` with deterministic advice
``h`` and enumerates every point ``(x, n)`` with ``|x| <= n <= max_n``:

* ``psi(x, n)`` is the halting triple after reading ``¢[x | Pref_|x|(h(n))]``;
* ``(x, n) ≅ (y, m)`` iff ``||psi(x, n) - psi(y, m)||^2 < mu``;
* ``(x, n) ≡ (y, n)`` iff ``|x| = |y|`` and the classified outcomes of
  ``xz`` and ``yz`` agree for every completion ``z`` to length ``n``;
* ``(x, n) <= (y, m)`` compares the mu-buckets ``s`` of ``||phi||^2``, where
  ``(s-1) mu < ||phi||^2 <= s mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import networkx as nx
import numpy as np

from .advice import DeterministicAdvice, classify, track_join
from .linalg import (TOL, HaltingTriple, Measurement, T_word, hat_T_word, norm_sq,
                     random_unitary)
from .machines import LEFT, Qfa, all_words, as_word, qfa_run

EDGE_SNAP = 1e-12
EXACT_DISCREPANCY_LIMIT = 20


class AnalysisError(ValueError):
    pass


# --------------------------------------------------------------------------
# relations


@dataclass
class Theorem1Report:
    """Everything computed about one advised machine up to ``max_n``."""

    eps: float
    mu: float
    max_n: int
    alphabet: tuple
    points: list                      # [(x, n)] with x a tuple of symbols
    triples: list                     # HaltingTriple per point
    dist2: np.ndarray                 # pairwise squared triple distances
    buckets: list                     # mu-bucket per point
    signatures: dict                  # point -> continuation signature
    class_index: dict                 # point -> canonical class number within Delta_n
    outcomes: dict                    # (x, n) with |x| = n -> RunOutcome
    labels: dict                      # full string (x, n) -> classify label
    discrepancy_set: list = field(default_factory=list)
    discrepancy_exact: bool = True
    d_bound: int | None = None

    @property
    def c(self) -> int:
        return math.ceil(1 / self.mu) + 1

    @property
    def d(self) -> int:
        return len(self.discrepancy_set)

    def index(self, x, n) -> int:
        return self._pos[(as_word(x), n)]

    def __post_init__(self):
        self._pos = {p: i for i, p in enumerate(self.points)}

    def close(self, i: int, j: int) -> bool:
        return bool(self.dist2[i, j] < self.mu)

    def equivalent(self, p, q) -> bool:
        return p[1] == q[1] and len(p[0]) == len(q[0]) and self.signatures[p] == self.signatures[q]

    def classes(self, n: int) -> list[list]:
        groups: dict = {}
        for p in self.points:
            if p[1] == n:
                groups.setdefault(self.class_index[p], []).append(p)
        return [groups[k] for k in sorted(groups)]

    def summary(self) -> dict:
        return {
            "epsilon": self.eps, "mu": self.mu, "c": self.c, "d": self.d,
            "d_exact": self.discrepancy_exact, "max_n": self.max_n,
            "points": len(self.points),
            "classes_per_n": {n: len(self.classes(n)) for n in range(self.max_n + 1)},
            "discrepancy_set": [["".join(x), n] for x, n in self.discrepancy_set],
        }


def bucket(value: float, mu: float) -> int:
    """``s`` with ``(s-1) mu < value <= s mu``; values just above an edge snap down."""
    if value <= EDGE_SNAP:
        return 0
    s = math.ceil(value / mu)
    if value - (s - 1) * mu <= EDGE_SNAP:
        s -= 1
    return s


def _prefix_triple(m: Qfa, x: tuple, w: tuple) -> HaltingTriple:
    meas = m.measurement()
    word = ((LEFT,) if m.left else ()) + track_join(x, w)
    return hat_T_word([m.unitaries[s] for s in word], meas,
                      HaltingTriple(m.start_vector(), *m.offsets), check=False)


def compute_relations(m: Qfa, h: DeterministicAdvice, eps: float, mu: float, max_n: int,
                      d_bound: int | None = None, alphabet: Sequence[str] | None = None,
                      max_points: int = 4096) -> Theorem1Report:
    """Enumerate ``Delta`` up to ``max_n`` and compute all relations."""
    if not 0 <= eps < 0.5:
        raise AnalysisError(f"epsilon must lie in [0, 1/2), got {eps}")
    if not 0 < mu < (1 - 2 * eps) / 7:
        raise AnalysisError(f"mu must lie in (0, (1 - 2 eps)/7) = (0, {(1 - 2 * eps) / 7:.6g})")
    if alphabet is None:
        alphabet = tuple(dict.fromkeys(s.split("|", 1)[0] for s in m.alphabet))
    alphabet = tuple(alphabet)
    total = sum(len(alphabet) ** k for n in range(max_n + 1) for k in range(n + 1))
    if total > max_points:
        raise AnalysisError(f"{total} points exceed the limit of {max_points}; lower max_n")

    points, triples, labels, outcomes = [], [], {}, {}
    for n in range(max_n + 1):
        hn = h.at(n)
        for x in all_words(alphabet, n):
            points.append((x, n))
            triples.append(_prefix_triple(m, x, hn[:len(x)]))
        for x in all_words(alphabet, n, n):
            out = qfa_run(m, track_join(x, hn), check=False)
            outcomes[(x, n)] = out
            labels[(x, n)] = classify(out, eps)

    phis = np.array([t.phi for t in triples])
    g = np.array([[t.gamma_acc, t.gamma_rej] for t in triples])
    gram = phis @ phis.conj().T
    sq = np.real(np.diag(gram))
    dphi = np.maximum(sq[:, None] + sq[None, :] - 2 * np.real(gram), 0.0)
    dist2 = dphi + np.abs(g[:, None, 0] - g[None, :, 0]) + np.abs(g[:, None, 1] - g[None, :, 1])
    np.fill_diagonal(dist2, 0.0)

    signatures = {}
    for x, n in points:
        signatures[(x, n)] = tuple(labels[(x + z, n)]
                                   for z in all_words(alphabet, n - len(x), n - len(x)))
    class_index = {}
    for n in range(max_n + 1):
        reps: dict = {}
        for x, nn in points:  # points are in length-lexicographic order
            if nn != n:
                continue
            key = (len(x), signatures[(x, n)])
            reps.setdefault(key, len(reps) + 1)
            class_index[(x, n)] = reps[key]

    buckets = [bucket(norm_sq(t.phi), mu) for t in triples]
    report = Theorem1Report(eps, mu, max_n, alphabet, points, triples, dist2, buckets,
                            signatures, class_index, outcomes, labels, d_bound=d_bound)
    report.discrepancy_set, report.discrepancy_exact = max_discrepancy_set(report)
    return report


def max_discrepancy_set(report: Theorem1Report) -> tuple[list, bool]:
    """Largest set of pairwise non-close points (exact for few distinct triples)."""
    # identical triples are always close, so keep one representative of each
    reps: list[int] = []
    for i in range(len(report.points)):
        if all(report.dist2[i, j] > EDGE_SNAP for j in reps):
            reps.append(i)
    far = nx.Graph()
    far.add_nodes_from(reps)
    for i, j in combinations(reps, 2):
        if not report.close(i, j):
            far.add_edge(i, j)
    if len(reps) <= EXACT_DISCREPANCY_LIMIT:
        best = max(nx.find_cliques(far), key=len) if reps else []
        exact = True
    else:
        best = []
        for i in sorted(reps, key=lambda v: -far.degree(v)):
            if all(far.has_edge(i, j) for j in best):
                best.append(i)
        exact = False
    return [report.points[i] for i in sorted(best)], exact


# --------------------------------------------------------------------------
# condition verdicts


def _same_length_pairs(report: Theorem1Report):
    by_level: dict = {}
    for i, (x, n) in enumerate(report.points):
        by_level.setdefault((n, len(x)), []).append(i)
    for idx in by_level.values():
        yield from combinations(idx, 2)


def longest_descending_chain(report: Theorem1Report) -> list:
    """One point per distinct bucket, highest bucket first."""
    seen = {}
    for p, s in zip(report.points, report.buckets):
        seen.setdefault(s, p)
    return [seen[s] for s in sorted(seen, reverse=True)]


def check_conditions(report: Theorem1Report) -> dict:
    """Verdict (``pass``/``checked``/``witness``) per condition and supporting property."""
    verdicts = {}
    pts, pos = report.points, report._pos

    # Condition 2: closeness implies equivalence (same n, same length)
    fail, checked = None, 0
    for i, j in _same_length_pairs(report):
        if report.close(i, j):
            checked += 1
            if not report.equivalent(pts[i], pts[j]) and fail is None:
                fail = _pair(pts[i], pts[j], report.dist2[i, j])
    verdicts["condition_2"] = _verdict(fail, checked)

    # Condition 3: appending a symbol never raises the bucket
    fail, checked = None, 0
    for i, (x, n) in enumerate(pts):
        if len(x) < n:
            for s in report.alphabet:
                j = pos[(x + (s,), n)]
                checked += 1
                if report.buckets[j] > report.buckets[i] and fail is None:
                    fail = {"x": "".join(x), "sigma": s, "n": n,
                            "buckets": [report.buckets[i], report.buckets[j]]}
    verdicts["condition_3"] = _verdict(fail, checked)

    # Condition 4 (z-form)
    fail, checked = None, 0
    for i, j in _same_length_pairs(report):
        (x, n), (y, _) = pts[i], pts[j]
        for z in all_words(report.alphabet, n - len(x), 1):
            a, b = pos[(x + z, n)], pos[(y + z, n)]
            if (report.buckets[a] == report.buckets[i] and report.buckets[b] == report.buckets[j]
                    and report.close(a, b)):
                checked += 1
                if not report.equivalent(pts[i], pts[j]) and fail is None:
                    fail = {"x": "".join(x), "y": "".join(y), "z": "".join(z), "n": n}
    verdicts["condition_4"] = _verdict(fail, checked)

    # Condition 6: strictly descending chains have length at most c
    chain = longest_descending_chain(report)
    verdicts["condition_6"] = {
        "pass": len(chain) <= report.c, "checked": len(pts), "chain_length": len(chain),
        "c": report.c,
        "witness": None if len(chain) <= report.c else [["".join(x), n] for x, n in chain]}

    # Condition 7: the measured maximum discrepancy set respects the bound, if any
    d = report.d
    ok = report.d_bound is None or d <= report.d_bound
    verdicts["condition_7"] = {
        "pass": ok, "checked": len(pts), "d": d, "d_exact": report.discrepancy_exact,
        "d_bound": report.d_bound,
        "witness": None if ok else [["".join(x), n] for x, n in report.discrepancy_set]}

    verdicts["class_count"] = check_class_count(report)
    verdicts["near_equivalence"] = check_near_equivalence(report)
    verdicts["outcome_gap"] = check_outcome_gap(report)
    verdicts["distance_recovery"] = check_distance_recovery(report)
    return verdicts


def check_class_count(report: Theorem1Report) -> dict:
    """Each length level of ``Delta_n`` has at most ``d`` equivalence classes."""
    counts = {}
    for x, n in report.points:
        counts.setdefault((n, len(x)), set()).add(report.class_index[(x, n)])
    (n, k), worst = max(counts.items(), key=lambda kv: (len(kv[1]), kv[0]))
    ok = len(worst) <= report.d
    return {"pass": ok, "checked": len(counts), "d": report.d, "max_classes": len(worst),
            "witness": None if ok else {"n": n, "length": k, "classes": len(worst)}}


def check_near_equivalence(report: Theorem1Report) -> dict:
    """Squared distance below ``1 - 2 eps`` forces identical continuation behaviour."""
    fail, checked = None, 0
    for i, j in _same_length_pairs(report):
        if report.dist2[i, j] < 1 - 2 * report.eps:
            checked += 1
            if not report.equivalent(report.points[i], report.points[j]) and fail is None:
                fail = _pair(report.points[i], report.points[j], report.dist2[i, j])
    return _verdict(fail, checked)


def check_outcome_gap(report: Theorem1Report) -> dict:
    """``2 d(x,y)^2 >= |dp_acc(xz)| + |dp_rej(xz)|`` for every completion ``z``."""
    fail, checked, worst = None, 0, 0.0
    for i, j in _same_length_pairs(report):
        (x, n), (y, _) = report.points[i], report.points[j]
        for z in all_words(report.alphabet, n - len(x), n - len(x)):
            ox, oy = report.outcomes[(x + z, n)], report.outcomes[(y + z, n)]
            gap = abs(ox.p_acc - oy.p_acc) + abs(ox.p_rej - oy.p_rej) - 2 * report.dist2[i, j]
            checked += 1
            worst = max(worst, gap)
            if gap > TOL and fail is None:
                fail = {"x": "".join(x), "y": "".join(y), "z": "".join(z), "n": n, "excess": gap}
    out = _verdict(fail, checked)
    out["max_excess"] = worst
    return out


def check_distance_recovery(report: Theorem1Report) -> dict:
    """``d(x,y)^2 <= d(xz,yz)^2 + k alpha`` for ``k = 6`` and ``k = 9``."""
    pos, pts = report._pos, report.points
    res = {6: [None, 0.0], 9: [None, 0.0]}
    checked = 0
    for i, j in _same_length_pairs(report):
        (x, n), (y, _) = pts[i], pts[j]
        nx_ = norm_sq(report.triples[i].phi)
        ny_ = norm_sq(report.triples[j].phi)
        for z in all_words(report.alphabet, n - len(x), 1):
            a, b = pos[(x + z, n)], pos[(y + z, n)]
            alpha = max(nx_ - norm_sq(report.triples[a].phi), ny_ - norm_sq(report.triples[b].phi))
            checked += 1
            for k in (6, 9):
                gap = report.dist2[i, j] - report.dist2[a, b] - k * alpha
                if gap > res[k][1]:
                    res[k][1] = gap
                if gap > TOL and res[k][0] is None:
                    res[k][0] = {"x": "".join(x), "y": "".join(y), "z": "".join(z), "n": n}
    return {"checked": checked,
            "six_alpha": {"pass": res[6][0] is None, "witness": res[6][0], "max_excess": res[6][1]},
            "nine_alpha": {"pass": res[9][0] is None, "witness": res[9][0], "max_excess": res[9][1]},
            "pass": res[9][0] is None}


def check_relation_axioms(report: Theorem1Report) -> bool:
    """Equivalence is reflexive, symmetric, transitive; closeness reflexive and symmetric."""
    pts = report.points
    for n in range(report.max_n + 1):
        level = [p for p in pts if p[1] == n]
        for p in level:
            if not report.equivalent(p, p):
                return False
        for p, q in combinations(level, 2):
            if report.equivalent(p, q) != report.equivalent(q, p):
                return False
        for p in level:
            for q in level:
                if report.equivalent(p, q):
                    for r in level:
                        if report.equivalent(q, r) and not report.equivalent(p, r):
                            return False
    d = report.dist2
    return bool(np.all(np.diag(d) < report.mu) and np.allclose(d, d.T, atol=0))


def _pair(p, q, dist2):
    return {"x": "".join(p[0]), "y": "".join(q[0]), "n": p[1], "dist2": float(dist2)}


def _verdict(fail, checked) -> dict:
    return {"pass": fail is None, "checked": checked, "witness": fail}


# --------------------------------------------------------------------------
# language-level checks


def continuation_signature(accepts, alphabet, x, n) -> tuple:
    """Membership of ``xz`` for every ``z`` completing ``x`` to length ``n``."""
    x = as_word(x)
    return tuple(bool(accepts(x + z)) for z in all_words(alphabet, n - len(x), n - len(x)))


def check_separation(accepts, alphabet, n: int) -> dict:
    """Distinct same-length members ``w, w'`` give inequivalent ``(wa, n)`` and ``(w'b, n)``.

    Meaningful for even ``n`` with ``(aa+ab+ba)*``: for odd ``n`` no completion
    lands in the language and every signature is all-reject.
    """
    a, b = alphabet
    fail, checked = None, 0
    for k in range(n - 1):
        members = [w for w in all_words(alphabet, k, k) if accepts(w)]
        for w in members:
            for w2 in members:
                if w == w2:
                    continue
                checked += 1
                if (continuation_signature(accepts, alphabet, w + (a,), n)
                        == continuation_signature(accepts, alphabet, w2 + (b,), n)):
                    if fail is None:
                        fail = {"w": "".join(w), "w2": "".join(w2), "n": n}
    return _verdict(fail, checked)


# --------------------------------------------------------------------------
# norm inequalities on random instances


def _random_instance(rng, dims, lens):
    d = int(rng.integers(min(dims), max(dims) + 1))
    length = int(rng.integers(min(lens), max(lens) + 1))
    labels = rng.integers(0, 3, size=d)
    labels[rng.integers(0, d)] = 0  # at least one non-halting state
    meas = Measurement.from_sets(d, np.flatnonzero(labels == 1), np.flatnonzero(labels == 2))
    us = [random_unitary(d, rng) for _ in range(length)]
    non = labels == 0

    def vec():
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        v[~non] = 0
        return v / np.linalg.norm(v)

    phi, phi2 = vec(), vec()
    g = rng.uniform(0, 1, 4)
    return meas, us, HaltingTriple(phi, g[0], g[1]), HaltingTriple(phi2, g[2], g[3])


def norm_checks(meas: Measurement, us, psi: HaltingTriple, psi2: HaltingTriple) -> dict:
    """Slack of every identity/inequality on one instance (positive = violated)."""
    phi, phi2 = psi.phi, psi2.phi
    acc, rej = meas.acc.mask(), meas.rej.mask()
    non = meas.non.mask()

    def halting_terms(v):
        a = r = 0.0
        for u in us:
            w = u @ v
            a += float(np.sum(np.abs(w[acc]) ** 2))
            r += float(np.sum(np.abs(w[rej]) ** 2))
            v = np.where(non, w, 0)
        return v, a, r

    tphi, a1, b1 = halting_terms(phi)
    tphi2, a2, b2 = halting_terms(phi2)
    tdiff, ad, bd = halting_terms(phi - phi2)
    diff_drop = norm_sq(phi - phi2) - norm_sq(tdiff)
    drop1 = norm_sq(phi) - norm_sq(tphi)
    drop2 = norm_sq(phi2) - norm_sq(tphi2)
    out1 = hat_T_word(us, meas, psi, check=False)
    out2 = hat_T_word(us, meas, psi2, check=False)
    before = (psi - psi2).norm()
    after = (out1 - out2).norm()
    inner = np.vdot(phi, phi2) - np.vdot(T_word(us, meas, phi), T_word(us, meas, phi2))
    return {
        "halting_mass_identity": abs(norm_sq(phi) - norm_sq(tphi) - a1 - b1),
        "difference_mass_identity": abs(diff_drop - ad - bd),
        "halting_gap_bound": abs(a1 - a2) + abs(b1 - b2) - 2 * diff_drop,
        "overlap_drop_bound": 2 * abs(inner) - (drop1 + drop2),
        "difference_drop_bound": diff_drop - 2 * (drop1 + drop2),
        "triangle_inequality": (psi + psi2).norm() - psi.norm() - psi2.norm(),
        "sqrt2_expansion_bound": after - math.sqrt(2) * before,
        "squared_contraction_bound": (before ** 2 - 3 * diff_drop) - after ** 2,
    }


IDENTITIES = ("halting_mass_identity", "difference_mass_identity")
INEQUALITIES = ("halting_gap_bound", "overlap_drop_bound", "difference_drop_bound", "triangle_inequality", "sqrt2_expansion_bound", "squared_contraction_bound")


def norm_property_suite(dims=range(2, 9), lens=range(0, 7), trials: int = 10_000,
                        seed: int = 0) -> dict:
    """Evaluate every norm identity/inequality on seeded random instances.

    Instances: Haar unitaries, a random accept/reject/non-halting labelling
    with at least one non-halting state, unit vectors ``phi, phi'`` in the
    non-halting subspace and ``gamma`` values uniform in ``[0, 1]``.
    """
    rng = np.random.default_rng(seed)
    worst = {k: -math.inf for k in IDENTITIES + INEQUALITIES}
    failures = {k: 0 for k in worst}
    first = {}
    for t in range(trials):
        inst = _random_instance(rng, dims, lens)
        for k, v in norm_checks(*inst).items():
            worst[k] = max(worst[k], v)
            if v > TOL:
                failures[k] += 1
                first.setdefault(k, t)
    return {
        "trials": trials, "seed": seed, "dims": [min(dims), max(dims)],
        "lengths": [min(lens), max(lens)],
        "identity_residual": {k: worst[k] for k in IDENTITIES},
        "max_violation": {k: worst[k] for k in INEQUALITIES},
        "failures": failures, "first_failing_trial": first,
        "pass": not any(failures.values()),
    }


__all__ = [
    "AnalysisError", "Theorem1Report", "bucket", "compute_relations", "max_discrepancy_set",
    "check_conditions", "check_near_equivalence", "check_class_count", "check_outcome_gap", "check_distance_recovery", "check_separation",
    "check_relation_axioms", "longest_descending_chain", "continuation_signature",
    "norm_checks", "norm_property_suite", "IDENTITIES", "INEQUALITIES",
]
