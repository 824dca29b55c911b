"""Command-line front end.

Exit codes: 0 success, 2 usage, 3 scenario syntax, 4 semantic or input error,
5 a checked condition does not hold, 6 reproduction mismatch.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .conditions import search_mu2, verify_mu2
from .engine import (
    CARD_SPACES,
    Card,
    ConditionNotMet,
    QuantumStrategy,
    check_lambda_full,
    check_lambda_pi2,
    dollar_payoffs,
    proposition_cards,
    run_algorithmic_mechanism,
    run_quantum_mechanism,
    verify_proposition,
)
from .errors import InputError, ScenarioSemanticError, ScenarioSyntaxError
from .mechanism import Message, enumerate_nash
from .quantum import NAMED_OPS, LocalOp
from .reproduce import compare, compute_results, expected_path, fixture_text, parse_expected
from .scenario import Scenario, load_scenario, parse_angle, parse_scenario, to_json, to_text
from .social_choice import AGENTS, check_lambda_ordinal

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_SEMANTIC = 4
EXIT_CONDITION = 5
EXIT_MISMATCH = 6

SCENARIO_DIR_ENV = "NASHIMPL_SCENARIO_DIR"
BUILTINS = {"table1": "table1.scn"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def resolve_scenario(name: str) -> Scenario:
    """A path, a file in $NASHIMPL_SCENARIO_DIR, or a builtin name."""
    path = Path(name)
    if path.exists():
        return load_scenario(path)
    base = os.environ.get(SCENARIO_DIR_ENV)
    if base and not path.is_absolute():
        cand = Path(base) / name
        if cand.exists():
            return load_scenario(cand)
    key = path.stem if path.name in BUILTINS.values() else name
    if key in BUILTINS:
        return parse_scenario(fixture_text(BUILTINS[key]))
    raise FileNotFoundError(name)


def _angle(text: str) -> float:
    try:
        return parse_angle(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _op(text: str) -> LocalOp:
    if text in NAMED_OPS:
        return NAMED_OPS[text]
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"operation must be C, I, D or 'xi,phi', got {text!r}")
    try:
        return LocalOp(parse_angle(parts[0]), parse_angle(parts[1]))
    except (ValueError, InputError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _message(text: str) -> Message:
    parts = [p.strip() for p in text.strip("()").split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"message must be 'theta,a,b,n', got {text!r}")
    try:
        n = int(parts[3])
    except ValueError:
        raise argparse.ArgumentTypeError(f"integer announcement {parts[3]!r} is not an int") from None
    return Message(parts[0], parts[1], parts[2], n)


def _card(text: str) -> Card:
    """``theta,a,b,n`` for a constant card or ``side0/side1``."""
    sides = text.split("/")
    if len(sides) == 1:
        return Card.constant(_message(sides[0]))
    if len(sides) == 2:
        return Card(_message(sides[0]), _message(sides[1]))
    raise argparse.ArgumentTypeError(f"card must have one or two sides, got {text!r}")


def _fmt(env, xs) -> str:
    return "{" + ",".join(env.sort_outcomes(xs)) + "}"


def _header(args, sc: Scenario | None, seed: int | None) -> list[str]:
    out = [f"# nashimpl {__version__}", f"# command: {' '.join(args.argv)}"]
    if sc is not None:
        out.append(f"# scenario: sha256:{sc.digest()}")
    if seed is not None:
        out.append(f"# seed: {seed}")
    return out


def _theta(sc: Scenario, args) -> list[str]:
    if args.theta is None:
        return list(sc.env.profiles)
    sc.env.check_profile(args.theta)
    return [args.theta]


# --- subcommands --------------------------------------------------------------


def cmd_check_mu2(args) -> tuple[list[str], int]:
    sc = resolve_scenario(args.scenario)
    env, f = sc.env, sc.scr
    lines = _header(args, sc, None)
    if args.search:
        w = search_mu2(env, f)
        if w is None:
            return lines + ["witness: none found", "result: not satisfied"], EXIT_CONDITION
        lines.append("witness: found by search")
    else:
        w = sc.require_witness()
        lines.append("witness: from scenario")
    lines.append(f"B = {_fmt(env, w.b_set)}")
    for (a, t) in f.pairs(env):
        for j in AGENTS:
            lines.append(f"C_{j}({a},{t}) = {_fmt(env, w.c(j, a, t))}")
    for (a, t) in f.pairs(env):
        for (b, p) in f.pairs(env):
            lines.append(
                f"e({a},{t},{b},{p}) = {w.e(a, t, b, p)} in "
                f"{_fmt(env, w.c(1, a, t) & w.c(2, b, p))}"
            )
    report = verify_mu2(env, f, w)
    for c in report.checks:
        mark = "ok" if c.ok else "FAIL"
        lines.append(
            f"[{c.theta_star}] rule {c.rule}: {c.left_label} & {c.right_label} = "
            f"{_fmt(env, c.left)} & {_fmt(env, c.right)} = {_fmt(env, c.intersection)}  {mark}"
        )
    for v in report.violations:
        lines.append(f"violation: rule {v.rule} at {v.subject}: {v.detail}")
    lines.append("result: " + ("satisfied" if report.satisfied else "not satisfied"))
    return lines, EXIT_OK if report.satisfied else EXIT_CONDITION


def cmd_check_lambda(args) -> tuple[list[str], int]:
    sc = resolve_scenario(args.scenario)
    gamma = sc.gamma if args.gamma is None else args.gamma
    lines = _header(args, sc, None) + [f"gamma: {gamma!r}"]
    any_hold = False
    for t in _theta(sc, args):
        gate = check_lambda_ordinal(sc.env, sc.scr, t)
        if gate is None:
            lines.append(f"[{t}] ordinal lambda'1/lambda'2: fails")
            continue
        lines.append(f"[{t}] ordinal lambda'1/lambda'2: holds with theta'={gate[0]} a'={gate[1]}")
        cards = proposition_cards(sc, t)
        hold_full = hold_pi2 = True
        for j in AGENTS:
            p = dollar_payoffs(sc, t, cards, j, allow_rank_default=args.rank_utilities)
            full, pi2 = check_lambda_full(p, gamma), check_lambda_pi2(p)
            hold_full &= full.holds
            hold_pi2 &= pi2.holds
            nums = " ".join(f"{x:g}" for x in p.as_tuple())
            lines.append(f"[{t}] agent {j} payoffs cc cd dc dd = {nums} ({' '.join(p.outcomes)})")
            lines.append(
                f"[{t}] agent {j} lambda'3: {full.lambda3}; lambda'4: {full.lambda4} "
                f"(rhs {round(full.lambda4_rhs, 12) + 0.0:g}); lambda'4 at pi/2: {pi2.lambda4}"
            )
        lines.append(f"[{t}] lambda' at gamma: {'holds' if hold_full else 'fails'}")
        lines.append(f"[{t}] lambda' at pi/2: {'holds' if hold_pi2 else 'fails'}")
        any_hold |= hold_full
    return lines, EXIT_OK if any_hold else EXIT_CONDITION


def cmd_equilibria(args) -> tuple[list[str], int]:
    sc = resolve_scenario(args.scenario)
    w = sc.require_witness()
    u = sc.utility_table(args.rank_utilities)
    lines = _header(args, sc, None) + [f"n_cap: {args.n_cap}"]
    ok = True
    for t in _theta(sc, args):
        eq = enumerate_nash(sc.env, sc.scr, w, u, t, args.n_cap)
        want = sc.scr(t)
        match = eq.outcomes == want
        ok &= match
        lines.append(
            f"[{t}] {len(eq.equilibria)} equilibria, outcomes {_fmt(sc.env, eq.outcomes)}, "
            f"f = {_fmt(sc.env, want)}  {'ok' if match else 'MISMATCH'}"
        )
        if args.list:
            for s1, s2, out in eq.equilibria:
                lines.append(f"  {s1} {s2} -> {out}")
    return lines, EXIT_OK if ok else EXIT_CONDITION


def cmd_run(args) -> tuple[list[str], int]:
    sc = resolve_scenario(args.scenario)
    seed = sc.seed if args.seed is None else args.seed
    theta = args.theta if args.theta is not None else sc.env.profiles[-1]
    sc.env.check_profile(theta)
    default_cards = proposition_cards(sc, theta)
    cards = (args.card1 or default_cards[0], args.card2 or default_cards[1])
    ops = (args.op1, args.op2)
    if args.mech == "algorithmic":
        if args.gamma is not None:
            raise InputError("the algorithmic mechanism fixes gamma at pi/2")
        rep = run_algorithmic_mechanism(
            sc, theta, [(ops[0].xi, ops[0].phi, cards[0]), (ops[1].xi, ops[1].phi, cards[1])], seed
        )
    else:
        gamma = sc.gamma if args.gamma is None else args.gamma
        strategies = [QuantumStrategy(ops[i], cards[i]) for i in range(2)]
        rep = run_quantum_mechanism(sc, theta, strategies, gamma, seed)
    return _header(args, sc, seed) + rep.lines(), EXIT_OK


def cmd_verify_proposition(args) -> tuple[list[str], int]:
    sc = resolve_scenario(args.scenario)
    gamma = sc.gamma if args.gamma is None else args.gamma
    lines = _header(args, sc, sc.seed) + [
        f"gamma: {gamma!r}",
        f"grid: {args.grid}x{(args.grid + 1) // 2}",
        f"card space: {args.card_space}",
    ]
    ok = True
    for t in _theta(sc, args):
        v = verify_proposition(
            sc, t, gamma, args.grid, args.card_space, allow_rank_default=args.rank_utilities
        )
        if v.branch == "classical":
            lines.append(
                f"[{t}] classical branch: equilibrium outcomes {_fmt(sc.env, v.classical_outcomes)}, "
                f"f = {_fmt(sc.env, v.scr_value)}"
            )
        else:
            s1, s2 = v.candidate
            lines.append(f"[{t}] candidate: both C, cards {s1.card.side0}/{s1.card.side1}")
            lines.append(f"[{t}] outcome: {v.outcome} ({'in' if v.outcome_in_f else 'not in'} f = "
                         f"{_fmt(sc.env, v.scr_value)})")
            for j in AGENTS:
                d, lam = v.deviations[j], v.lambda_reports[j]
                lines.append(
                    f"[{t}] agent {j}: lambda'3 {lam.lambda3}, lambda'4 {lam.lambda4}; "
                    f"baseline {d.baseline:.9f}, best deviation {d.best:.9f}, gain {d.gain:.3e} "
                    f"via op=({d.op.xi:.6f},{d.op.phi:.6f}) card={d.card.side0}/{d.card.side1}"
                )
            lines.append(f"[{t}] worst deviation gain: {v.worst_gain:.3e}")
            lines.append(f"[{t}] equilibrium: {'yes' if v.is_equilibrium else 'no'}")
            predicted = {True: "equilibrium", False: "no equilibrium", None: "boundary"}[v.predicted]
            lines.append(f"[{t}] payoff conditions predict: {predicted}")
        lines.append(f"[{t}] consistent: {'yes' if v.consistent else 'no'}")
        ok &= v.consistent
    return lines, EXIT_OK if ok else EXIT_CONDITION


def cmd_reproduce(args) -> tuple[list[str], int]:
    sc = resolve_scenario(args.scenario)
    path = Path(args.expected) if args.expected else expected_path()
    entries = parse_expected(path.read_text(encoding="utf-8"))
    rows = compare(entries, compute_results(sc, args.grid))
    lines = _header(args, sc, sc.seed)
    bad = 0
    for entry, got, ok in rows:
        if ok:
            lines.append(f"ok    {entry.key} = {entry.value}  [{entry.origin}]")
        else:
            bad += 1
            lines.append(f"FAIL  {entry.key}: expected {entry.value}, got {got}  [{entry.origin}]")
    lines.append(f"{len(rows) - bad}/{len(rows)} values match")
    return lines, EXIT_OK if bad == 0 else EXIT_MISMATCH


def cmd_convert(args) -> tuple[list[str], int]:
    sc = resolve_scenario(args.scenario)
    text = to_json(sc) if args.to == "json" else to_text(sc)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        return [], EXIT_OK
    return text.rstrip("\n").split("\n"), EXIT_OK


# --- wiring -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nashimpl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nashimpl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("scenario", help="scenario file, or a builtin name such as 'table1'")
        p.set_defaults(func=func)
        return p

    p = add("check-mu2", cmd_check_mu2, "verify (or search for) a mu2 witness")
    p.add_argument("--search", action="store_true", help="ignore the scenario's witness and search")

    p = add("check-lambda", cmd_check_lambda, "ordinal and payoff coordination conditions")
    p.add_argument("--gamma", type=_angle)
    p.add_argument("--theta")
    p.add_argument("--rank-utilities", action="store_true")

    p = add("equilibria", cmd_equilibria, "pure equilibria of the classical mechanism")
    p.add_argument("--theta")
    p.add_argument("--n-cap", type=int, default=2)
    p.add_argument("--list", action="store_true", help="print every equilibrium profile")
    p.add_argument("--rank-utilities", action="store_true")

    p = add("run", cmd_run, "one seeded execution of the quantum or algorithmic mechanism")
    p.add_argument("--mech", choices=("quantum", "algorithmic"), default="quantum")
    p.add_argument("--theta")
    p.add_argument("--gamma", type=_angle)
    p.add_argument("--seed", type=int)
    p.add_argument("--op1", type=_op, default=NAMED_OPS["C"])
    p.add_argument("--op2", type=_op, default=NAMED_OPS["C"])
    p.add_argument("--card1", type=_card, help="'theta,a,b,n' or 'side0/side1'")
    p.add_argument("--card2", type=_card)

    p = add("verify-proposition", cmd_verify_proposition, "check the coordinated quantum profile")
    p.add_argument("--theta")
    p.add_argument("--gamma", type=_angle)
    p.add_argument("--grid", type=int, default=61, help="xi points; phi uses (grid+1)//2")
    p.add_argument("--card-space", choices=CARD_SPACES, default="side1")
    p.add_argument("--rank-utilities", action="store_true")

    p = add("reproduce-paper", cmd_reproduce, "recompute the fixture's reference values and diff")
    p.add_argument("--expected", help="results file (default: the bundled one)")
    p.add_argument("--grid", type=int, default=61)

    p = add("convert", cmd_convert, "rewrite a scenario in canonical text or JSON form")
    p.add_argument("--to", choices=("text", "json"), default="json")
    p.add_argument("-o", "--output")
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = ["nashimpl", *argv]
    try:
        lines, code = args.func(args)
    except ScenarioSyntaxError as exc:
        print(f"nashimpl: syntax error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"nashimpl: no such scenario: {exc.args[-1] if exc.args else exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConditionNotMet as exc:
        print(f"nashimpl: {exc}", file=sys.stderr)
        return EXIT_CONDITION
    except (ScenarioSemanticError, InputError) as exc:
        print(f"nashimpl: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    if lines:
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
