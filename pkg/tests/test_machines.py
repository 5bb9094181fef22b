import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from advised_automata.machines import (ACCEPT, LEFT, NEITHER, REJECT, RIGHT, Dfa, MachineError, Pfa,
                                       Qfa, RunOutcome, all_words, as_word, dfa_run, dfa_to_qfa,
                                       is_reversible, minimal_dfa, partial_order_condition_check,
                                       pfa_run, qfa_run, qfa_validate, rfa_check, run_machine,
                                       split_track, track_symbol)
from advised_automata.zoo import language_dfa, membership

from helpers import random_qfa


def test_track_symbol_round_trip():
    assert track_symbol("a", "0") == "a|0"
    assert track_symbol("a", "0|$") == "a|[0|$]"
    assert split_track("a|[0|$]") == ("a", "0|$")
    assert split_track(track_symbol("b", "[x]")) == ("b", "[x]")
    with pytest.raises(MachineError):
        track_symbol("a|b", "0")


def test_as_word_and_all_words():
    assert as_word("ab") == ("a", "b")
    assert as_word(("h1", "h2")) == ("h1", "h2")
    words = list(all_words("ab", 2))
    assert words[:4] == [(), ("a",), ("b",), ("a", "a")]
    assert len(words) == 7


def test_run_outcome_rejects_bad_mass():
    with pytest.raises(MachineError):
        RunOutcome(0.5, 0.6, 0.0)
    mixed = RunOutcome.mix([(0.5, RunOutcome(1, 0, 0)), (0.5, RunOutcome(0, 1, 0))])
    assert (mixed.p_acc, mixed.p_rej) == (0.5, 0.5)


def parity_dfa():
    delta = {("e", "a"): "o", ("o", "a"): "e", ("e", "b"): "o", ("o", "b"): "e"}
    return Dfa(["e", "o"], "ab", delta, "e", ["e"], ["o"])


def test_dfa_requires_total_transitions():
    with pytest.raises(MachineError):
        Dfa(["e"], "ab", {("e", "a"): "e"}, "e", ["e"])


def test_dfa_run_classes():
    m = parity_dfa()
    assert dfa_run(m, "ab") == ACCEPT
    assert dfa_run(m, "a") == REJECT
    half = Dfa(["p", "q"], "a", {("p", "a"): "q", ("q", "a"): "p"}, "p", ["p"])
    assert dfa_run(half, "a") == NEITHER


def test_dfa_endmarkers_are_read():
    delta = {("p", "a"): "p", ("p", LEFT): "q", ("q", LEFT): "p", ("q", "a"): "q"}
    m = Dfa(["p", "q"], "a", delta, "p", ["q"], ["p"], left=True)
    assert dfa_run(m, "aa") == ACCEPT


def test_rfa_check_lists_merging_transitions():
    m = language_dfa("L_a")
    assert not is_reversible(m)
    assert rfa_check(m)
    assert rfa_check(parity_dfa()) == []


def test_minimal_dfa_agrees_with_languages():
    for name in ("L_a", "(aa+ab+ba)*", "0m1n", "even_length"):
        m = language_dfa(name)
        for x in all_words(m.alphabet, 6):
            assert (dfa_run(m, x) == ACCEPT) == membership(name, x)
    assert len(language_dfa("L_a").states) == 2
    assert len(language_dfa("even_length").states) == 2


def test_partial_order_condition_witness():
    assert partial_order_condition_check(language_dfa("L_a")) == ("s0", "s1", "a", "b", "")
    assert partial_order_condition_check(language_dfa("even_length")) is None


def test_partial_order_witness_is_genuine():
    m = language_dfa("L_a")
    q1, q2, x, y, z = partial_order_condition_check(m)
    assert m.extend(q1, x) == q2 and m.extend(q2, x) == q2 and m.extend(q2, y) == q1
    assert (m.extend(q1, z) in m.accepting) != (m.extend(q2, z) in m.accepting)


def test_pfa_validation():
    with pytest.raises(MachineError):
        Pfa(["p", "q"], "a", {"a": np.array([[0.5, 0.2], [0.4, 0.8]])}, "p", ["p"])
    m = Pfa(["p", "q"], "a", {"a": np.array([[0.5, 0.0], [0.5, 1.0]])}, "p", ["p"], ["q"])
    out = pfa_run(m, "aa")
    assert abs(out.p_acc - 0.25) < 1e-12 and abs(out.p_rej - 0.75) < 1e-12


def test_qfa_validate_reports_defects():
    bad = Qfa(["p", "q"], ["a"], {"a": np.array([[1, 1], [0, 1]]), LEFT: np.eye(2)}, "p", ["q"],
              ["q"], right=True)
    defects = qfa_validate(bad)
    kinds = {d.split(":")[0] for d in defects}
    assert kinds == {"partition", "coverage", "unitarity"}
    with pytest.raises(MachineError):
        qfa_run(bad, "a")


def test_qfa_run_conserves_probability(rng):
    m = random_qfa(rng)
    for x in all_words(["a|0", "b|1", "a|1"], 4):
        out = qfa_run(m, x, trace=True)
        assert abs(out.p_acc + out.p_rej + out.p_residual - 1) < 1e-9
        assert len(out.trace) == len(x) + 2
        assert abs(sum(a for a, _ in out.trace) - out.p_acc) < 1e-12


def test_qfa_rejects_symbols_outside_alphabet(rng):
    with pytest.raises(MachineError):
        qfa_run(random_qfa(rng), ["c|0"])


def test_qfa_single_step_by_hand():
    s = 1 / np.sqrt(2)
    u = np.array([[s, 0, -s], [s, 0, s], [0, 1, 0]])
    m = Qfa(["q0", "acc", "rej"], ["a"], {"a": u}, "q0", ["acc"], [], left=False, right=False)
    out = run_machine(m, "a")
    assert abs(out.p_acc - 0.5) < 1e-12 and abs(out.p_residual - 0.5) < 1e-12


def test_dfa_to_qfa_reproduces_reversible_dfa():
    m = parity_dfa()
    q = dfa_to_qfa(m)
    assert qfa_validate(q) == []
    for x in all_words("ab", 6):
        out = qfa_run(q, x)
        expected = dfa_run(m, x)
        assert_allclose([out.p_acc, out.p_rej], [expected == ACCEPT, expected == REJECT], atol=1e-12)
    with pytest.raises(MachineError):
        dfa_to_qfa(language_dfa("L_a"))


def test_dfa_to_qfa_with_right_endmarker():
    delta = {(q, s): t for q, s, t in [("e", "a", "o"), ("o", "a", "e"), ("e", RIGHT, "o"),
                                       ("o", RIGHT, "e")]}
    m = Dfa(["e", "o"], "a", delta, "e", ["e"], ["o"], right=True)
    q = dfa_to_qfa(m)
    for n in range(5):
        x = "a" * n
        assert qfa_run(q, x).p_acc == pytest.approx(float(dfa_run(m, x) == ACCEPT))


def test_minimal_dfa_state_cap():
    with pytest.raises(MachineError):
        minimal_dfa("ab", lambda w: w.count("a") == w.count("b"), max_states=4, depth=6)


def test_random_words_round_trip_through_tracks():
    for upper, lower in itertools.product("ab", ["0", "1|$", "#"]):
        assert split_track(track_symbol(upper, lower)) == (upper, lower)
