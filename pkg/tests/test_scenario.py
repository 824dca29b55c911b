from __future__ import annotations

import math

import numpy as np
import pytest

from nashimpl.conditions import search_mu2
from nashimpl.errors import ScenarioSemanticError, ScenarioSyntaxError
from nashimpl.mechanism import UtilityTable
from nashimpl.reproduce import fixture_text
from nashimpl.scenario import (
    Scenario,
    from_json,
    load_scenario,
    parse_angle,
    parse_scenario,
    to_json,
    to_text,
)

from randenv import random_environment

MINIMAL = """\
outcomes: x y
profiles: t
rank 1 t: x > y
rank 2 t: y > x
f t: x
"""


def test_fixture_parses(table1):
    assert table1.env.outcomes == ("a1", "a2", "a3", "a4")
    assert table1.env.profiles == ("theta1", "theta2")
    assert table1.scr("theta1") == {"a1"} and table1.scr("theta2") == {"a2"}
    assert table1.gamma == pytest.approx(math.pi / 2)
    assert table1.seed == 7 and table1.reference_agent == 2


def test_round_trips(table1):
    assert parse_scenario(to_text(table1)) == table1
    assert from_json(to_json(table1)) == table1
    assert to_text(parse_scenario(to_text(table1))) == to_text(table1)
    assert to_json(from_json(to_json(table1))) == to_json(table1)


def test_digest_is_stable(table1):
    again = parse_scenario(fixture_text())
    assert again.digest() == table1.digest()
    assert len(table1.digest()) == 64


def test_load_by_suffix(tmp_path, table1):
    p = tmp_path / "s.json"
    p.write_text(to_json(table1))
    assert load_scenario(p) == table1
    q = tmp_path / "s.scn"
    q.write_text(to_text(table1))
    assert load_scenario(q) == table1


@pytest.mark.parametrize(
    "text, expect",
    [
        ("pi/2", math.pi / 2),
        ("pi", math.pi),
        ("2*pi/3", 2 * math.pi / 3),
        ("0.25", 0.25),
    ],
)
def test_parse_angle(text, expect):
    assert parse_angle(text) == pytest.approx(expect)


def test_parse_angle_rejects_junk():
    with pytest.raises(ValueError):
        parse_angle("half")


def test_minimal_scenario():
    sc = parse_scenario(MINIMAL)
    assert sc.witness is None and sc.utilities is None
    with pytest.raises(ScenarioSemanticError):
        sc.require_witness()
    with pytest.raises(ScenarioSemanticError):
        sc.utility_table()
    assert sc.utility_table(allow_rank_default=True) == UtilityTable.rank_default(sc.env)


def test_syntax_errors_carry_position():
    with pytest.raises(ScenarioSyntaxError) as exc:
        parse_scenario(MINIMAL + "bogus line without colon\n")
    assert exc.value.line == 6
    with pytest.raises(ScenarioSyntaxError) as exc:
        parse_scenario(MINIMAL + "seed: seven\n")
    assert exc.value.line == 6 and "line 6" in str(exc.value)


@pytest.mark.parametrize(
    "edit, needle",
    [
        (lambda s: s.replace("f t: x\n", "f t:\n"), "f(t) empty"),
        (lambda s: s.replace("rank 1 t: x > y", "rank 1 t: x"), "omits y"),
        (lambda s: s.replace("rank 1 t: x > y", "rank 1 t: x > x"), ""),
        (lambda s: s.replace("outcomes: x y", "outcomes:"), "outcome"),
        (lambda s: s + "f t: y\n", ""),
    ],
)
def test_semantic_errors(edit, needle):
    with pytest.raises(ScenarioSemanticError) as exc:
        parse_scenario(edit(MINIMAL))
    assert needle in str(exc.value)


def test_inconsistent_utilities_rejected():
    text = MINIMAL + "utilities: explicit\nu 1 t: x=0 y=1\nu 2 t: x=0 y=1\n"
    with pytest.raises(ScenarioSemanticError) as exc:
        parse_scenario(text)
    assert "agent 1" in str(exc.value)


def test_random_scenarios_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(30):
        env, f = random_environment(rng, int(rng.integers(1, 5)), int(rng.integers(1, 3)))
        sc = Scenario(env, f, witness=search_mu2(env, f), utility_mode="rank", seed=int(rng.integers(0, 99)))
        assert parse_scenario(to_text(sc)) == sc
        assert from_json(to_json(sc)) == sc
