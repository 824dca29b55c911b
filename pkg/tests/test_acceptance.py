"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from nashimpl.cli import main
from nashimpl.conditions import search_mu2, verify_mu2
from nashimpl.engine import (
    Card,
    DollarPayoffs,
    QuantumStrategy,
    check_lambda_full,
    gamma_for_sin2,
    lambda4_boundary,
    run_algorithmic_mechanism,
    run_quantum_mechanism,
    verify_proposition,
)
from nashimpl.mechanism import Message, dispatch_rule, enumerate_nash, outcome_g, strategy_set
from nashimpl.quantum import (
    C_OP,
    D_OP,
    HALF_PI,
    I_OP,
    LocalOp,
    collapse_distribution,
    entangled_start,
    entangler_matrix,
    final_state,
    strategy_matrix,
)
from nashimpl.scenario import Scenario, from_json, parse_scenario, to_json, to_text

from randenv import random_environment
from test_conditions import WORKED_C, WORKED_E, WORKED_TABLE


@pytest.fixture
def verdict(capsys):
    def emit(label: str, ok: bool, detail: str = ""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else ""))
        assert ok, f"{label}: {detail}"

    return emit


def test_criterion_1_worked_mu2_verification(table1, capsys, verdict):
    t0 = time.perf_counter()
    code = main(["check-mu2", "table1"])
    out = capsys.readouterr().out
    report = verify_mu2(table1.env, table1.scr, table1.witness)
    elapsed = time.perf_counter() - t0

    w = table1.witness
    got = {(c.theta_star, c.rule, tuple(c.subject)): (c.left, c.right) for c in report.checks}
    want = {k: (frozenset(l), frozenset(r)) for k, (l, r) in WORKED_TABLE.items()}
    inter_ok = all(
        w.c(1, a, t) & w.c(2, b, p) == {
            ("a1", "theta1", "a1", "theta1"): {"a1", "a4"},
            ("a1", "theta1", "a2", "theta2"): {"a2", "a4"},
            ("a2", "theta2", "a1", "theta1"): {"a3"},
            ("a2", "theta2", "a2", "theta2"): {"a2"},
        }[(a, t, b, p)]
        for (a, t, b, p) in WORKED_E
    )
    table_lines = [l for l in out.splitlines() if "] rule " in l]
    printed = all(
        f"{'{' + ','.join(sorted(l)) + '}'} & {'{' + ','.join(sorted(r)) + '}'}" in line
        for line, (l, r) in zip(table_lines, WORKED_TABLE.values())
    )
    ok = (
        code == 0
        and report.satisfied
        and dict(w.c_sets) == WORKED_C
        and dict(w.e_map) == WORKED_E
        and inter_ok
        and got == want
        and len(table_lines) == len(WORKED_TABLE)
        and printed
        and elapsed < 1.0
    )
    verdict("1 worked mu2 verification", ok, f"{len(report.checks)} rule checks, {elapsed:.3f}s")


def test_criterion_2_classical_implementation(table1, verdict):
    u = table1.utility_table()
    w = table1.witness
    n_strat = len(strategy_set(table1.env, table1.scr, w, range(3)))
    t0 = time.perf_counter()
    outs = {t: enumerate_nash(table1.env, table1.scr, w, u, t, 2).outcomes for t in table1.env.profiles}
    elapsed = time.perf_counter() - t0
    ok = outs == {"theta1": {"a1"}, "theta2": {"a2"}} and n_strat**2 == 576 and elapsed < 5.0
    verdict("2 classical implementation", ok, f"{n_strat**2} pairs per profile, {elapsed:.3f}s")


def test_criterion_3_quantum_exactness(verdict):
    cc = collapse_distribution(final_state(HALF_PI, C_OP, C_OP))["CC"]
    cd = collapse_distribution(final_state(HALF_PI, I_OP, D_OP))["CD"]
    psi = entangler_matrix(math.pi / 3) @ np.array([1, 0, 0, 0], dtype=complex)
    want = np.array([math.cos(math.pi / 6), 0, 0, 1j * math.sin(math.pi / 6)])
    ok = (
        abs(cc - 1) <= 1e-12
        and abs(cd - 1) <= 1e-12
        and np.max(np.abs(psi - want)) <= 1e-12
        and np.max(np.abs(entangled_start(math.pi / 3).amplitudes - want)) <= 1e-12
    )
    verdict("3 quantum pipeline exactness", ok, f"P(CC)={cc!r} P(CD)={cd!r}")


def test_criterion_4_threshold(verdict):
    p = DollarPayoffs(3, 5, 0, 1)
    s = lambda4_boundary(p)
    below = check_lambda_full(p, gamma_for_sin2(0.4 - 1e-6))
    above = check_lambda_full(p, gamma_for_sin2(0.4 + 1e-6))
    at = check_lambda_full(p, gamma_for_sin2(0.4))
    ok = (
        abs(s - 0.4) <= 1e-9
        and below.lambda4 == "fails"
        and above.lambda4 == "satisfied"
        and at.lambda4 == "boundary"
    )
    verdict("4 lambda'4 threshold", ok, f"sin^2 = {s!r}")


def test_criterion_5_proposition(table1, verdict):
    v = verify_proposition(table1, "theta2", HALF_PI, 61)
    weak = verify_proposition(table1, "theta2", gamma_for_sin2(0.25), 61)
    ok = (
        v.branch == "quantum"
        and v.is_equilibrium
        and v.worst_gain <= 1e-9
        and v.outcome == "a1"
        and v.outcome not in table1.scr("theta2")
        and table1.scr("theta2") == {"a2"}
        and not weak.is_equilibrium
        and weak.worst_gain >= 0.74
    )
    verdict(
        "5 coordinated quantum equilibrium",
        ok,
        f"pi/2 gain {v.worst_gain:.2e}, outcome {v.outcome}; sin^2=0.25 gain {weak.worst_gain:.4f}",
    )


def _random_message(rng, sc: Scenario) -> Message:
    pairs = sc.scr.pairs(sc.env)
    a, t = pairs[rng.integers(len(pairs))]
    b = sc.env.outcomes[rng.integers(len(sc.env.outcomes))]
    return Message(t, a, b, int(rng.integers(0, 4)))


def test_criterion_6_mechanism_equivalence(table1, verdict):
    rng = np.random.default_rng(2024)
    mismatches = 0
    quantum_branch = 0
    for i in range(1000):
        theta = table1.env.profiles[rng.integers(2)]
        inputs = []
        for _ in range(2):
            xi, phi = rng.uniform(0, math.pi), rng.uniform(0, HALF_PI)
            inputs.append((xi, phi, Card(_random_message(rng, table1), _random_message(rng, table1))))
        seed = int(rng.integers(0, 2**32))
        a = run_algorithmic_mechanism(table1, theta, inputs, seed)
        q = run_quantum_mechanism(
            table1, theta, [QuantumStrategy(LocalOp(x, p), c) for x, p, c in inputs], HALF_PI, seed
        )
        mismatches += a != q or a.lines() != q.lines()
        quantum_branch += q.branch == "quantum"
    ok = mismatches == 0 and quantum_branch > 0
    verdict("6 quantum/algorithmic equivalence", ok, f"1000 runs, {mismatches} mismatches")


def test_criterion_7_property_suites(table1, verdict):
    # unitarity and normalisation over a grid
    unit_ok = True
    for gamma in np.linspace(0, HALF_PI, 9):
        j = entangler_matrix(gamma)
        unit_ok &= np.allclose(j.conj().T @ j, np.eye(4), atol=1e-12)
        for xi in np.linspace(0, math.pi, 13):
            for phi in np.linspace(0, HALF_PI, 7):
                op = LocalOp(xi, phi)
                w = strategy_matrix(op)
                unit_ok &= np.allclose(w.conj().T @ w, np.eye(2), atol=1e-12)
                unit_ok &= abs(final_state(gamma, op, D_OP).norm - 1) < 1e-12

    # dispatch totality and integer-class exactness
    rng = np.random.default_rng(7)
    w, f = table1.witness, table1.scr
    dispatch_ok = True
    for _ in range(2000):
        s1, s2 = _random_message(rng, table1), _random_message(rng, table1)
        s1 = Message(s1.theta, s1.a, s1.b, int(rng.integers(0, 30)))
        s2 = Message(s2.theta, s2.a, s2.b, int(rng.integers(0, 30)))
        rule = dispatch_rule(s1, s2)
        out = outcome_g(w, f, s1, s2)
        dispatch_ok &= rule in range(1, 7) and out in table1.env.outcomes
        shift = int(rng.integers(1, 100))
        t1 = Message(s1.theta, s1.a, s1.b, s1.n + shift if s1.n else 0)
        t2 = Message(s2.theta, s2.a, s2.b, s2.n + shift if s2.n else 0)
        dispatch_ok &= outcome_g(w, f, t1, t2) == out

    # search -> verify round trip through both serialised forms
    rng = np.random.default_rng(99)
    found = 0
    trip_ok = True
    for _ in range(50):
        env, scr = random_environment(rng, int(rng.integers(1, 5)), int(rng.integers(1, 3)))
        wit = search_mu2(env, scr)
        if wit is None:
            continue
        found += 1
        trip_ok &= verify_mu2(env, scr, wit).satisfied
        sc = Scenario(env, scr, witness=wit, utility_mode="rank")
        for back in (parse_scenario(to_text(sc)), from_json(to_json(sc))):
            trip_ok &= back == sc and verify_mu2(back.env, back.scr, back.witness).satisfied
    ok = unit_ok and dispatch_ok and trip_ok and found > 0
    verdict("7 property suites", ok, f"{found}/50 random environments admit a witness")
