import itertools

import numpy as np
import pytest

from advised_automata.advice import DeterministicAdvice
from advised_automata.machines import Dfa, all_words, is_reversible, rfa_check
from advised_automata.synthesis import (LanguageOracle, SynthesisError, agrees_with,
                                        build_classes, check_condition_a, check_condition_b,
                                        extract_relation, random_rfa, refines, synthesize_rfa,
                                        validate_counterexample)
from advised_automata.zoo import membership


def naive_class_counts(name, alphabet, horizon):
    """Distinct continuation sets per (n, |x|), computed directly from membership."""
    out = {}
    for n in range(horizon + 1):
        for k in range(n + 1):
            sigs = set()
            for x in itertools.product(alphabet, repeat=k):
                sigs.add(frozenset("".join(z) for z in itertools.product(alphabet, repeat=n - k)
                                   if membership(name, x + z)))
            out[(n, k)] = len(sigs)
    return out


def test_l_a_classes_per_level():
    table = build_classes(LanguageOracle.builtin("L_a"), 6)
    for n in range(1, 7):
        assert [table.count(n, k) for k in range(n + 1)] == [1] * n + [2]
    assert table.d == 2


@pytest.mark.parametrize("name", ["L_a", "(aa+ab+ba)*", "even_length"])
def test_class_counts_match_brute_force(name):
    oracle = LanguageOracle.builtin(name)
    table = build_classes(oracle, 6)
    expected = naive_class_counts(name, oracle.alphabet, 6)
    assert {key: table.count(*key) for key in expected} == expected
    assert check_condition_b(table, oracle)


def test_l_a_round_trip():
    oracle = LanguageOracle.builtin("L_a")
    table = build_classes(oracle, 6)
    assert check_condition_a(table) is None
    res = synthesize_rfa(table)
    assert rfa_check(res.machine) == []
    assert agrees_with(res.machine, res.advice, oracle, oracle.alphabet, 6) == []
    assert all(len(res.advice.at(n)) == n for n in range(7))
    assert refines(extract_relation(res.machine, res.advice, 6, oracle.alphabet), table)


@pytest.mark.parametrize("name, expect", [("all", True), ("empty", False)])
def test_trivial_languages(name, expect):
    oracle = LanguageOracle.builtin(name)
    table = build_classes(oracle, 5)
    assert table.d == 1 and check_condition_a(table) is None
    res = synthesize_rfa(table)
    assert is_reversible(res.machine)
    assert bool(res.machine.accepting) == expect and bool(res.machine.rejecting) != expect
    assert agrees_with(res.machine, res.advice, oracle, oracle.alphabet, 5) == []


def test_table_oracle_round_trip(rng):
    for _ in range(5):
        members = {n: ["".join(w) for w in itertools.product("ab", repeat=n) if rng.random() < 0.4]
                   for n in range(6)}
        oracle = LanguageOracle.from_table("ab", members, 5)
        table = build_classes(oracle, 5)
        if check_condition_a(table) is None:
            res = synthesize_rfa(table)
            assert agrees_with(res.machine, res.advice, oracle, "ab", 5) == []


def test_zero_one_counterexample_is_genuine():
    oracle = LanguageOracle.builtin("0m1n")
    table = build_classes(oracle, 8)
    cex = check_condition_a(table)
    assert cex == ("0", "1", "1", 2)
    assert validate_counterexample(oracle, cex)
    with pytest.raises(SynthesisError):
        synthesize_rfa(table)


def test_pairs_language_fails_reversibility_condition():
    table = build_classes(LanguageOracle.builtin("(aa+ab+ba)*"), 6)
    cex = check_condition_a(table)
    assert cex is not None
    assert validate_counterexample(LanguageOracle.builtin("(aa+ab+ba)*"), cex)


def test_validate_rejects_bogus_counterexample():
    oracle = LanguageOracle.builtin("L_a")
    assert not validate_counterexample(oracle, ("a", "b", "a", 3))


def test_horizon_limits():
    with pytest.raises(SynthesisError):
        build_classes(LanguageOracle.builtin("L_a"), 17)
    oracle = LanguageOracle.builtin("L_a", horizon=3)
    with pytest.raises(SynthesisError):
        oracle("aaaa")


def test_table_oracle_rejects_bad_entries():
    with pytest.raises(SynthesisError):
        LanguageOracle.from_table("ab", {2: ["abc"]}, 3)


def test_successor_unique_and_predecessor_unique():
    table = build_classes(LanguageOracle.builtin("L_a"), 6)
    for n in range(1, 7):
        for k in range(n):
            for q in range(1, table.count(n, k) + 1):
                for s in table.alphabet:
                    assert len(table.successors(n, k, q, s)) == 1
            for t in range(1, table.count(n, k + 1) + 1):
                for s in table.alphabet:
                    assert len(table.predecessors(n, k, t, s)) <= 1


def test_extract_rejects_irreversible_machine():
    delta = {("p", "a|x"): "p", ("q", "a|x"): "p"}
    m = Dfa(["p", "q"], ["a|x"], delta, "p", ["p"], [])
    with pytest.raises(SynthesisError):
        extract_relation(m, DeterministicAdvice(("x",), table={n: ("x",) * n for n in range(3)}), 2)


def test_single_state_machine_has_single_class():
    m = Dfa(["p"], ["a|x", "b|x"], {("p", "a|x"): "p", ("p", "b|x"): "p"}, "p", ["p"], [])
    h = DeterministicAdvice(("x",), table={n: ("x",) * n for n in range(5)})
    table = extract_relation(m, h, 4, ("a", "b"))
    assert table.d == 1


def test_random_reversible_machines_satisfy_condition_a():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        m, h = random_rfa(rng, int(rng.integers(1, 6)), ("a", "b"), ("0", "1"), 5)
        table = extract_relation(m, h, 5, ("a", "b"))
        assert check_condition_a(table) is None


def test_refines_detects_coarser_relation():
    fine = build_classes(LanguageOracle.builtin("L_a"), 4)
    coarse = build_classes(LanguageOracle.builtin("all"), 4)
    assert refines(fine, coarse)
    assert not refines(coarse, fine)
