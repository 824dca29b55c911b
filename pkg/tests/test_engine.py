from __future__ import annotations

import math

import numpy as np
import pytest

from nashimpl.engine import (
    Card,
    ConditionNotMet,
    DollarPayoffs,
    QuantumStrategy,
    best_deviation,
    check_lambda_full,
    check_lambda_pi2,
    dollar_payoffs,
    gamma_for_sin2,
    lambda4_boundary,
    proposition_cards,
    run_algorithmic_mechanism,
    run_quantum_mechanism,
    truthful_message,
    verify_proposition,
)
from nashimpl.errors import InputError
from nashimpl.mechanism import Message, outcome_g
from nashimpl.quantum import C_OP, D_OP, HALF_PI, I_OP, LocalOp
from nashimpl.scenario import parse_scenario, to_text

FIXTURE_PAYOFFS = DollarPayoffs(3, 5, 0, 1)


def _both(op, cards):
    return [QuantumStrategy(op, cards[0]), QuantumStrategy(op, cards[1])]


def test_proposition_cards(table1):
    c1, c2 = proposition_cards(table1, "theta2")
    assert c1 == c2
    assert c1.side0 == Message("theta1", "a1", "a1", 0)
    assert c1.side1 == Message("theta2", "a2", "a1", 0)


def test_quantum_run_both_c(table1):
    cards = proposition_cards(table1, "theta2")
    for seed in range(20):
        rep = run_quantum_mechanism(table1, "theta2", _both(C_OP, cards), HALF_PI, seed)
        assert rep.branch == "quantum"
        assert rep.collapse == "CC"
        assert rep.messages == (cards[0].side0, cards[1].side0)
        assert rep.outcome == "a1"


def test_quantum_run_both_identity(table1):
    cards = proposition_cards(table1, "theta2")
    rep = run_quantum_mechanism(table1, "theta2", _both(I_OP, cards), HALF_PI, 3)
    assert rep.messages == (Message("theta1", "a1", "a1", 0),) * 2
    assert rep.rule == 1 and rep.outcome == "a1"


def test_classical_branch_uses_truthful_messages(table1):
    odd = Card(Message("theta2", "a2", "a4", 5), Message("theta2", "a2", "a3", 1))
    rep = run_quantum_mechanism(table1, "theta1", [QuantumStrategy(D_OP, odd)] * 2, HALF_PI, 0)
    m = truthful_message(table1, "theta1")
    assert rep.branch == "classical" and rep.gate is None
    assert rep.collapse == "CC" and rep.messages == (m, m)
    assert rep.outcome == outcome_g(table1.witness, table1.scr, m, m) == "a1"


def test_algorithmic_run_matches_quantum(table1):
    cards = proposition_cards(table1, "theta2")
    a = run_algorithmic_mechanism(table1, "theta2", [(0.0, HALF_PI, cards[0]), (0.0, HALF_PI, cards[1])], 7)
    q = run_quantum_mechanism(table1, "theta2", _both(C_OP, cards), HALF_PI, 7)
    assert a == q and a.lines() == q.lines()


def test_run_rejects_bad_cards(table1):
    bad = Card.constant(Message("theta1", "a2", "a1", 0))
    with pytest.raises(InputError):
        run_quantum_mechanism(table1, "theta2", [QuantumStrategy(I_OP, bad)] * 2, HALF_PI, 0)


def test_dollar_payoffs_for_both_reference_agents(table1):
    cards = proposition_cards(table1, "theta2")
    p2 = dollar_payoffs(table1, "theta2", cards, 2)
    assert p2.as_tuple() == (3, 5, 0, 1)
    assert p2.outcomes == ("a1", "a3", "a4", "a2")
    p1 = dollar_payoffs(table1, "theta2", cards, 1)
    assert p1.outcomes[1:3] == ("a4", "a3")
    assert p1.as_tuple() == (3, 5, 0, 1)


def test_constant_cards_give_flat_payoffs(table1):
    m = Message("theta1", "a1", "a1", 0)
    p = dollar_payoffs(table1, "theta2", [Card.constant(m)] * 2, 2)
    assert len(set(p.as_tuple())) == 1


def test_lambda_reports():
    assert lambda4_boundary(FIXTURE_PAYOFFS) == pytest.approx(0.4, abs=1e-12)
    at = check_lambda_full(FIXTURE_PAYOFFS, gamma_for_sin2(0.4))
    assert at.lambda4 == "boundary" and not at.holds and at.holds_weakly
    assert check_lambda_full(FIXTURE_PAYOFFS, gamma_for_sin2(0.41)).holds
    assert check_lambda_full(FIXTURE_PAYOFFS, gamma_for_sin2(0.39)).lambda4 == "fails"
    full = check_lambda_full(FIXTURE_PAYOFFS, HALF_PI)
    assert full.lambda3 == "satisfied" and full.lambda4 == "satisfied"
    assert check_lambda_full(DollarPayoffs(1, 1, 1, 1), 1.0).lambda3 == "fails"
    assert not check_lambda_full(DollarPayoffs(1, 1, 1, 1), 1.0).holds_weakly


def test_lambda_pi2():
    assert check_lambda_pi2(FIXTURE_PAYOFFS).holds
    assert check_lambda_pi2(DollarPayoffs(0, 0, 1, -1)).lambda4 == "fails"
    assert check_lambda_pi2(DollarPayoffs(2, 9, 1, 0)).holds


def _against_c(table1, gamma, density):
    cards = proposition_cards(table1, "theta2")
    return best_deviation(table1, "theta2", _both(C_OP, cards), 2, gamma, density, "fixed")


@pytest.mark.parametrize("s2", [0.0, 0.1, 0.25, 0.35])
def test_best_op_deviation_converges_to_lambda4_bound(table1, s2):
    gamma = gamma_for_sin2(s2)
    values = [_against_c(table1, gamma, d).best for d in (31, 61, 121)]
    assert abs(values[1] - values[0]) < 1e-3 and abs(values[2] - values[1]) < 1e-3
    p = FIXTURE_PAYOFFS
    assert values[-1] == pytest.approx(p.cd * math.cos(gamma) ** 2 + p.dc * math.sin(gamma) ** 2, abs=1e-6)


def test_verify_proposition_at_full_entanglement(table1):
    v = verify_proposition(table1, "theta2", HALF_PI, 61)
    assert v.branch == "quantum" and v.gate == ("theta1", "a1")
    assert v.outcome == "a1" and v.outcome_in_f is False
    assert v.is_equilibrium and v.worst_gain <= 1e-9
    assert v.consistent


def test_verify_proposition_weak_entanglement(table1):
    v = verify_proposition(table1, "theta2", gamma_for_sin2(0.25), 61)
    assert v.lambda_reports[2].lambda4 == "fails"
    assert not v.is_equilibrium
    assert v.worst_gain >= 0.74
    assert v.consistent


def test_verify_proposition_boundary_is_neutral(table1):
    v = verify_proposition(table1, "theta2", gamma_for_sin2(0.4), 61)
    assert v.predicted is None
    assert v.worst_gain < 1e-6


def test_free_cards_break_the_candidate(table1):
    # rewriting both card sides opens the integer game; the candidate stops being stable
    v = verify_proposition(table1, "theta2", HALF_PI, 21, card_space="free")
    assert not v.is_equilibrium
    assert v.worst_gain == pytest.approx(2.0)


def test_verify_proposition_classical_branch(table1):
    v = verify_proposition(table1, "theta1", HALF_PI, 11)
    assert v.branch == "classical"
    assert v.classical_outcomes == {"a1"} and v.consistent


def test_verify_proposition_requires_mu2(table1):
    text = to_text(table1).replace("e a2 theta2 a1 theta1: a3", "e a2 theta2 a1 theta1: a1")
    broken = parse_scenario(text)
    with pytest.raises(ConditionNotMet):
        verify_proposition(broken, "theta2", HALF_PI, 11)


def test_deviation_is_deterministic(table1):
    cards = proposition_cards(table1, "theta2")
    prof = _both(C_OP, cards)
    a = best_deviation(table1, "theta2", prof, 1, 1.0, 41)
    b = best_deviation(table1, "theta2", prof, 1, 1.0, 41)
    assert a == b
    assert np.isfinite(a.gain)


def test_bad_card_space(table1):
    cards = proposition_cards(table1, "theta2")
    with pytest.raises(InputError):
        best_deviation(table1, "theta2", _both(C_OP, cards), 1, 1.0, 11, "both")


def test_local_op_used_by_deviation_is_valid(table1):
    d = _against_c(table1, gamma_for_sin2(0.25), 61)
    assert isinstance(d.op, LocalOp)
