import dataclasses
import math

import numpy as np
import pytest

from advised_automata.analysis import (AnalysisError, bucket, check_separation, check_conditions,
                                       check_relation_axioms, compute_relations,
                                       longest_descending_chain, norm_checks,
                                       norm_property_suite)
from advised_automata.linalg import HaltingTriple, Measurement, permutation_matrix
from advised_automata.zoo import fixture, membership


@pytest.fixture(scope="module")
def l_a_report():
    fx = fixture("L_a")
    return compute_relations(fx.machine, fx.advice, 0.0, 0.14, 4)


def test_bucket_convention():
    assert bucket(0.0, 0.14) == 0
    assert bucket(0.14, 0.14) == 1
    assert bucket(0.28, 0.14) == 2
    assert bucket(0.28 + 1e-13, 0.14) == 2
    assert bucket(0.15, 0.14) == 2
    assert bucket(1.0, 0.14) == 8


def test_parameter_checks():
    fx = fixture("L_a")
    with pytest.raises(AnalysisError):
        compute_relations(fx.machine, fx.advice, 0.0, 0.2, 2)
    with pytest.raises(AnalysisError):
        compute_relations(fx.machine, fx.advice, 0.5, 0.01, 2)
    with pytest.raises(AnalysisError):
        compute_relations(fx.machine, fx.advice, 0.0, 0.1, 12)


def test_l_a_report_passes_checkable_conditions(l_a_report):
    verdicts = check_conditions(l_a_report)
    for name in ("condition_2", "condition_3", "condition_4", "condition_6", "condition_7",
                 "near_equivalence", "outcome_gap", "class_count", "distance_recovery"):
        assert verdicts[name]["pass"], (name, verdicts[name])
    assert verdicts["distance_recovery"]["six_alpha"]["pass"]


def test_l_a_classes(l_a_report):
    # below full length a single class per level; at full length ends-in-a / ends-in-b
    for n in range(1, 5):
        levels = {}
        for (x, m), q in l_a_report.class_index.items():
            if m == n:
                levels.setdefault(len(x), set()).add(q)
        assert [len(levels[k]) for k in range(n + 1)] == [1] * n + [2]


def test_identical_triples_are_close_and_equivalent(l_a_report):
    r = l_a_report
    i, j = r.index("a", 4), r.index("b", 4)
    assert r.dist2[i, j] == 0 and r.close(i, j)
    assert r.equivalent(r.points[i], r.points[j])


def test_relation_axioms(l_a_report):
    assert check_relation_axioms(l_a_report)


def test_discrepancy_set_is_pairwise_far(l_a_report):
    r = l_a_report
    idx = [r.index(x, n) for x, n in r.discrepancy_set]
    for a in idx:
        for b in idx:
            if a != b:
                assert not r.close(a, b)
    assert r.d == 3 and r.discrepancy_exact


def test_fabricated_long_chain_fails_condition_6(l_a_report):
    r = l_a_report
    buckets = [0] * len(r.points)
    for i in range(r.c + 1):
        buckets[i] = i
    fake = dataclasses.replace(r, buckets=buckets)
    v = check_conditions(fake)["condition_6"]
    assert not v["pass"]
    assert v["chain_length"] == r.c + 1 == len(v["witness"])
    assert len(longest_descending_chain(fake)) == r.c + 1


def test_condition_7_against_bound(l_a_report):
    fake = dataclasses.replace(l_a_report, d_bound=2)
    v = check_conditions(fake)["condition_7"]
    assert not v["pass"] and len(v["witness"]) == 3


def test_separation_holds_for_even_lengths():
    def accepts(w):
        return membership("(aa+ab+ba)*", w)
    for n in (2, 4, 6, 8):
        assert check_separation(accepts, ("a", "b"), n)["pass"]


def test_separation_fails_for_odd_lengths():
    # for odd n no completion is a member, so all signatures coincide
    def accepts(w):
        return membership("(aa+ab+ba)*", w)
    v = check_separation(accepts, ("a", "b"), 5)
    assert not v["pass"] and v["witness"] == {"w": "aa", "w2": "ab", "n": 5}


def test_norm_suite_identities_hold():
    rep = norm_property_suite(trials=300, seed=7)
    for k, v in rep["identity_residual"].items():
        assert v < 1e-9, k
    for k in ("difference_drop_bound", "triangle_inequality", "overlap_drop_bound"):
        assert rep["failures"][k] == 0


def test_equal_vectors_have_zero_difference_terms(rng):
    meas = Measurement.from_sets(3, [1], [2])
    us = [permutation_matrix([1, 2, 0])]
    psi = HaltingTriple(np.array([1, 0, 0], complex), 0.2, 0.1)
    slack = norm_checks(meas, us, psi, psi)
    assert slack["halting_gap_bound"] <= 1e-15 and slack["sqrt2_expansion_bound"] <= 1e-15
    assert slack["squared_contraction_bound"] <= 1e-15


def two_state_halting_example(s, delta):
    """Non-halting {0, 1}; one step swaps 0 <-> 2 (accept) and 1 <-> 3 (reject)."""
    meas = Measurement.from_sets(4, [2], [3])
    us = [permutation_matrix([2, 3, 0, 1])]
    phi = np.array([math.cos(s), math.sin(s), 0, 0], complex)
    phi2 = np.array([math.cos(s + delta), math.sin(s + delta), 0, 0], complex)
    return meas, us, HaltingTriple(phi), HaltingTriple(phi2)


def test_distance_growth_counterexample():
    # nearby vectors that halt completely end up much farther apart than sqrt(2) times
    slack = norm_checks(*two_state_halting_example(math.pi / 4, 1e-3))
    assert slack["sqrt2_expansion_bound"] > 0.02
    assert slack["halting_gap_bound"] > 1e-3


def test_squared_distance_lower_bound_counterexample():
    s, delta = math.pi / 4, 0.1
    meas = Measurement.from_sets(3, [2], [])
    us = [permutation_matrix([2, 1, 0])]
    phi = np.array([math.cos(s), math.sin(s), 0], complex)
    phi2 = np.array([math.cos(s + delta), math.sin(s + delta), 0], complex)
    gap = math.cos(s) ** 2 - math.cos(s + delta) ** 2
    slack = norm_checks(meas, us, HaltingTriple(phi, 0.0), HaltingTriple(phi2, gap))
    assert slack["squared_contraction_bound"] > 0.05
