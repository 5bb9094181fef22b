import itertools

import numpy as np
import pytest

from advised_automata.advice import (AdviceError, DeterministicAdvice, QuantumAdvice,
                                     RandomizedAdvice, classify, duplicated_pairs,
                                     heavy_branch_mass, language_advice, palindrome_pairs,
                                     point_mass, run_with_advice, run_with_det_advice,
                                     run_with_quantum_advice_readonly,
                                     run_with_randomized_advice, sample_randomized, track_join,
                                     zeros_then_one)
from advised_automata.machines import RunOutcome, qfa_run

from helpers import random_distribution, random_qfa


def test_zeros_then_one():
    assert zeros_then_one(0) == ()
    assert zeros_then_one(4) == ("0", "0", "0", "1")


def test_palindrome_pairs_support():
    support = palindrome_pairs(5)
    assert len(support) == 4
    assert all(abs(p - 0.25) < 1e-15 for _, p in support)
    words = {"".join(y) for y, _ in support}
    assert words == {"00#00", "01#10", "10#01", "11#11"}
    assert palindrome_pairs(4) == [(("#",) * 4, 1.0)]


def test_duplicated_pairs_support():
    words = {"".join(y) for y, _ in duplicated_pairs(4)}
    assert words == {"0000", "0101", "1010", "1111"}
    assert duplicated_pairs(3) == [(("#",) * 3, 1.0)]


def test_track_join_length_mismatch():
    assert track_join("ab", "01") == ("a|0", "b|1")
    with pytest.raises(AdviceError):
        track_join("ab", "0")


def test_deterministic_advice_validation():
    h = DeterministicAdvice(("0", "1"), table={2: "01", 3: "012"})
    assert h.at(2) == ("0", "1")
    with pytest.raises(AdviceError):
        h.at(3)
    with pytest.raises(AdviceError):
        h.at(4)
    with pytest.raises(AdviceError):
        DeterministicAdvice(("0",), table={2: "0"}).at(2)


def test_randomized_advice_must_normalize():
    with pytest.raises(AdviceError):
        RandomizedAdvice(("0", "1"), table={1: [("0", 0.5), ("1", 0.4)]}).at(1)
    with pytest.raises(AdviceError):
        RandomizedAdvice(("0", "1"), table={1: [("0", 1.5), ("1", -0.5)]}).at(1)
    d = RandomizedAdvice(("0", "1"), table={1: [("1", 0.25), ("0", 0.5), ("1", 0.25)]})
    assert d.at(1) == [(("0",), 0.5), (("1",), 0.5)]


def test_quantum_advice_must_normalize():
    with pytest.raises(AdviceError):
        QuantumAdvice(("0", "1"), table={1: [("0", 1), ("1", 1)]}).at(1)
    phi = QuantumAdvice(("0", "1"), table={1: [("0", 0.6), ("1", 0.8j)]})
    assert phi.at(1)[1] == (("1",), 0.8j)


def test_classify_thresholds():
    assert classify(RunOutcome(0.75, 0.25, 0), 0.25) == "accept"
    assert classify(RunOutcome(0.25, 0.75, 0), 0.25) == "reject"
    assert classify(RunOutcome(0.7, 0.3, 0), 0.25) == "undecided"
    assert classify(RunOutcome(1, 0, 0), 0) == "accept"
    with pytest.raises(AdviceError):
        classify(RunOutcome(1, 0, 0), 0.5)


def test_randomized_run_is_convex_combination(rng):
    m = random_qfa(rng)
    d = random_distribution(rng, "01", 3)
    for x in itertools.product("ab", repeat=3):
        got = run_with_randomized_advice(m, d, x)
        weights = [p for _, p in d.at(3)]
        rates = [qfa_run(m, track_join(x, y)).p_acc for y, _ in d.at(3)]
        assert abs(got.p_acc - float(np.dot(weights, rates))) < 1e-12


def test_point_mass_equals_deterministic(rng):
    m = random_qfa(rng)
    h = DeterministicAdvice(("0", "1"), table={3: "011"})
    for x in itertools.product("ab", repeat=3):
        a = run_with_det_advice(m, h, x)
        b = run_with_advice(m, point_mass(h), x)
        assert abs(a.p_acc - b.p_acc) < 1e-12 and abs(a.p_rej - b.p_rej) < 1e-12


def test_readonly_quantum_advice_is_mixture(rng):
    m = random_qfa(rng)
    amps = [0.6, 0.8j]
    phi = QuantumAdvice(("0", "1"), table={2: [("01", amps[0]), ("10", amps[1])]})
    for x in itertools.product("ab", repeat=2):
        got = run_with_quantum_advice_readonly(m, phi, x)
        want = 0.36 * qfa_run(m, track_join(x, "01")).p_acc + \
            0.64 * qfa_run(m, track_join(x, "10")).p_acc
        assert abs(got.p_acc - want) < 1e-12


def test_language_advice_empty_length_pads():
    d = language_advice(("a", "b"), {2: ["ab"]})
    assert d.at(3) == [(("#",) * 3, 1.0)]
    assert d.at(2) == [(("a", "b"), 1.0)]


def test_heavy_branch_mass():
    assert heavy_branch_mass([0.5, 0.3, 0.2], [1.0, 0.7, 0.4], 0.1) == pytest.approx(0.8)


def test_sampling_estimate_is_close(rng):
    m = random_qfa(rng)
    d = random_distribution(rng, "01", 2)
    exact = run_with_randomized_advice(m, d, "ab").p_acc
    assert abs(sample_randomized(m, d, "ab", 20000, seed=1) - exact) < 0.02
