"""Recompute every headline number for the bundled fixture and diff against a results file.

Results file lines look like ``key = value  # origin``; ``origin`` is either
``published`` (a value printed in the source material) or ``derived``
(computed independently here).  Numbers compare with an absolute tolerance
of 1e-9, everything else as exact strings.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .conditions import verify_mu2
from .engine import (
    HALF_PI,
    dollar_payoffs,
    gamma_for_sin2,
    lambda4_boundary,
    proposition_cards,
    verify_proposition,
)
from .mechanism import implements_check
from .quantum import C_OP, D_OP, I_OP, collapse_distribution, entangled_start, final_state
from .scenario import Scenario, parse_scenario
from .social_choice import AGENTS, check_lambda_ordinal, lower_contour, maximal_set

NUMERIC_TOL = 1e-9


def fixture_text(name: str = "table1.scn") -> str:
    return resources.files("nashimpl").joinpath("data").joinpath(name).read_text(encoding="utf-8")


def load_fixture(name: str = "table1.scn") -> Scenario:
    return parse_scenario(fixture_text(name))


def expected_path() -> Path:
    return Path(str(resources.files("nashimpl").joinpath("data").joinpath("expected_results.txt")))


def fmt_set(env, xs) -> str:
    return "{" + ",".join(env.sort_outcomes(xs)) + "}"


def _num(x: float) -> str:
    return f"{x:.12g}"


def compute_results(sc: Scenario, grid_density: int = 61) -> dict[str, str]:
    env, f = sc.env, sc.scr
    w = sc.require_witness()
    u = sc.utility_table()
    out: dict[str, str] = {}
    out["outcomes"] = str(len(env.outcomes))
    out["profiles"] = str(len(env.profiles))
    for t in env.profiles:
        out[f"f({t})"] = fmt_set(env, f(t))

    pairs = f.pairs(env)
    for (a, t) in pairs:
        for j in AGENTS:
            out[f"L_{j}({a},{t})"] = fmt_set(env, lower_contour(env, j, a, t))
            out[f"C_{j}({a},{t})"] = fmt_set(env, w.c(j, a, t))
            out[f"M_{j}(C_{j}({a},{t}),{t})"] = fmt_set(env, maximal_set(env, j, w.c(j, a, t), t))
    for (a, t), (b, p) in itertools.product(pairs, repeat=2):
        out[f"e({a},{t},{b},{p})"] = w.e(a, t, b, p)
        out[f"C_1({a},{t})&C_2({b},{p})"] = fmt_set(env, w.c(1, a, t) & w.c(2, b, p))

    report = verify_mu2(env, f, w)
    for c in report.checks:
        subject = ",".join(str(x) for x in c.subject)
        out[f"mu2[{c.theta_star}] rule {c.rule} ({subject})"] = (
            f"{fmt_set(env, c.left)} & {fmt_set(env, c.right)} = {fmt_set(env, c.intersection)}"
        )
    out["mu2 satisfied"] = str(report.satisfied).lower()

    for t in env.profiles:
        gate = check_lambda_ordinal(env, f, t)
        out[f"gate({t})"] = "none" if gate is None else f"{gate[0]} {gate[1]}"

    impl = implements_check(env, f, w, u, 2)
    for t, (eq, _) in impl.per_profile.items():
        out[f"equilibrium outcomes({t})"] = fmt_set(env, eq)
    out["implements"] = str(impl.implements).lower()

    psi1 = entangled_start(math.pi / 3).amplitudes
    out["J(pi/3)|CC> re"] = " ".join(_num(z.real) for z in psi1)
    out["J(pi/3)|CC> im"] = " ".join(_num(z.imag) for z in psi1)
    out["P(CC | pi/2, C, C)"] = _num(collapse_distribution(final_state(HALF_PI, C_OP, C_OP))["CC"])
    out["P(CD | pi/2, I, D)"] = _num(collapse_distribution(final_state(HALF_PI, I_OP, D_OP))["CD"])

    for t in env.profiles:
        if check_lambda_ordinal(env, f, t) is None:
            continue
        cards = proposition_cards(sc, t)
        for j in AGENTS:
            p = dollar_payoffs(sc, t, cards, j)
            out[f"payoffs({t}, agent {j})"] = " ".join(_num(x) for x in p.as_tuple())
            out[f"payoff outcomes({t}, agent {j})"] = " ".join(p.outcomes)
            s = lambda4_boundary(p)
            out[f"lambda4 boundary sin^2({t}, agent {j})"] = "none" if s is None else _num(s)
        v = verify_proposition(sc, t, HALF_PI, grid_density)
        out[f"proposition({t}, pi/2) outcome"] = v.outcome
        out[f"proposition({t}, pi/2) outcome in f"] = str(v.outcome_in_f).lower()
        out[f"proposition({t}, pi/2) equilibrium"] = str(v.is_equilibrium).lower()
        v = verify_proposition(sc, t, gamma_for_sin2(0.25), grid_density)
        out[f"proposition({t}, sin^2=0.25) equilibrium"] = str(v.is_equilibrium).lower()
        out[f"proposition({t}, sin^2=0.25) best gain"] = _num(v.worst_gain)
    return out


@dataclass(frozen=True)
class ExpectedEntry:
    key: str
    value: str
    origin: str
    line: int


def parse_expected(text: str) -> list[ExpectedEntry]:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body, _, comment = raw.partition("#")
        if not body.strip():
            continue
        key, sep, value = body.partition(" = ")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        origin = comment.strip()
        if origin not in ("published", "derived"):
            raise ValueError(f"line {lineno}: origin must be 'published' or 'derived'")
        entries.append(ExpectedEntry(key.strip(), value.strip(), origin, lineno))
    return entries


def values_match(expected: str, actual: str) -> bool:
    if expected == actual:
        return True
    e, a = expected.split(), actual.split()
    if len(e) != len(a):
        return False
    try:
        return all(abs(float(x) - float(y)) <= NUMERIC_TOL for x, y in zip(e, a))
    except ValueError:
        return False


def compare(entries: list[ExpectedEntry], actual: dict[str, str]) -> list[tuple[ExpectedEntry, str | None, bool]]:
    rows = []
    for entry in entries:
        got = actual.get(entry.key)
        rows.append((entry, got, got is not None and values_match(entry.value, got)))
    return rows
