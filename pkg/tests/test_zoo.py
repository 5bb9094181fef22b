import itertools

import pytest

from advised_automata.advice import run_with_advice, run_with_det_advice, track_join
from advised_automata.machines import (Pfa, all_words, partial_order_condition_check, pfa_run,
                                       qfa_validate)
from advised_automata.rewritable import rqfa_run
from advised_automata.zoo import (FIXTURES, fixture, language, language_dfa, membership,
                                  pal_machine)


def test_membership_examples():
    assert membership("(aa+ab+ba)*", "abba")
    assert not membership("(aa+ab+ba)*", "bb")
    assert not membership("L_a", "")
    assert membership("Dup", "0101")
    assert membership("Pal_#", "01#10")
    assert not membership("Pal#", "01#01")
    assert membership("0^m1^n", "0011") and not membership("0m1n", "010")
    with pytest.raises(Exception):
        membership("L_a", "c")
    with pytest.raises(KeyError):
        language("nope")


def test_l_a_fixture_is_certain():
    fx = fixture("L_a")
    assert qfa_validate(fx.machine) == []
    for x in all_words("ab", 8, 1):
        out = run_with_det_advice(fx.machine, fx.advice, x)
        assert out.p_acc == (1.0 if membership("L_a", x) else 0.0)
        assert out.p_acc + out.p_rej == 1.0


def test_l_a_minimal_dfa_violates_partial_order():
    assert partial_order_condition_check(language_dfa("L_a")) is not None


def test_all_fixture_values():
    fx = fixture("ALL", {2: ["ab", "ba"], 3: ["aaa"]})
    assert qfa_validate(fx.machine) == []
    assert run_with_advice(fx.machine, fx.advice, "ab").p_acc == pytest.approx(0.75, abs=1e-12)
    assert run_with_advice(fx.machine, fx.advice, "aa").p_acc == pytest.approx(0.5, abs=1e-12)
    assert run_with_advice(fx.machine, fx.advice, "aaa").p_acc == pytest.approx(1.0, abs=1e-12)


def test_all_fixture_rejects_when_no_member():
    fx = fixture("ALL", {2: ["ab"]})
    for x in all_words("ab", 3, 3):
        out = run_with_advice(fx.machine, fx.advice, x)
        assert out.p_acc == pytest.approx(0.0, abs=1e-12)
        assert out.p_rej == pytest.approx(1.0, abs=1e-12)


def _pal_words(max_w):
    for k in range(max_w + 1):
        for w in itertools.product("01", repeat=k):
            for w2 in itertools.product("01", repeat=k):
                yield "".join(w) + "#" + "".join(w2)


def test_pal_fixture_brute_force():
    fx = fixture("Pal#")
    for x in _pal_words(3):
        out = run_with_advice(fx.machine, fx.advice, x)
        if membership("Pal#", x):
            assert out.p_acc == pytest.approx(1.0, abs=1e-12)
        else:
            assert out.p_acc == pytest.approx(0.5, abs=1e-12)


def test_pal_parity_ends_in_q1_for_palindromes():
    # with the accepting set {q0, q2} every palindrome would be rejected
    m = pal_machine()
    swapped = Pfa(m.states, m.alphabet, m.matrices, m.initial, ["q0", "q2"], ["q1", "q3"])
    for w in all_words("01", 4):
        x = "".join(w) + "#" + "".join(reversed(w))
        assert pfa_run(swapped, track_join(x, x)).p_acc == 0.0


def test_dup_fixture_brute_force():
    fx = fixture("Dup")
    for x in all_words("01", 6, 1):
        out = run_with_advice(fx.machine, fx.advice, x)
        if membership("Dup", x):
            assert out.p_acc == pytest.approx(1.0, abs=1e-12)
        else:
            assert out.p_acc == pytest.approx(0.5, abs=1e-12)


def test_biased_fixture_accepts_with_three_quarters():
    fx = fixture("biased")
    for n in range(1, 5):
        out = rqfa_run(fx.machine, "ab" * (n // 2) + "a" * (n % 2), fx.advice)
        assert out.p_acc == pytest.approx(0.75, abs=1e-12)


def test_fixture_names():
    for name in FIXTURES:
        if name != "ALL":
            assert fixture(name).machine is not None
    with pytest.raises(KeyError):
        fixture("nope")
