"""Scenario files: a line-oriented text form and a canonical JSON form.

Text grammar (one statement per line, ``#`` starts a comment)::

    file       = { line } ;
    line       = [ statement ] [ "#" { char } ] newline ;
    statement  = header ":" body ;
    header     = "outcomes" | "profiles"
               | "rank" agent profile         (* body: ranking *)
               | "f" profile                  (* body: labels *)
               | "B"                          (* body: labels *)
               | "C" agent outcome profile    (* body: labels *)
               | "e" outcome profile outcome profile   (* body: label *)
               | "utilities"                  (* body: "explicit" | "rank" *)
               | "u" agent profile            (* body: label "=" number { label "=" number } *)
               | "gamma"                      (* body: number | [ int "*" ] "pi" [ "/" int ] *)
               | "reference-agent"            (* body: "1" | "2" *)
               | "seed" ;                     (* body: int *)
    ranking    = class { ">" class } ;
    class      = label { "~" label } ;
    labels     = label { label } ;
    agent      = "1" | "2" ;

Labels are runs of characters other than whitespace and ``: > ~ = #``.
Statements may come in any order; each header may appear once.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

from .conditions import Mu2Witness
from .errors import InputError, ScenarioSemanticError, ScenarioSyntaxError
from .mechanism import UtilityTable
from .quantum import HALF_PI, check_gamma
from .social_choice import AGENTS, Environment, Scr, format_ranking

FORMAT_VERSION = 1

_LABEL = re.compile(r"[^\s:>~=#]+")
_PI_EXPR = re.compile(r"^(?:(\d+)\s*\*\s*)?pi(?:\s*/\s*(\d+))?$")


@dataclass(frozen=True)
class Scenario:
    env: Environment
    scr: Scr
    witness: Mu2Witness | None = None
    utilities: UtilityTable | None = None
    utility_mode: str | None = None  # "explicit", "rank" or None
    gamma: float = HALF_PI
    reference_agent: int = 2
    seed: int = 0

    def utility_table(self, allow_rank_default: bool = False) -> UtilityTable:
        if self.utility_mode == "rank" or (self.utilities is None and allow_rank_default):
            return UtilityTable.rank_default(self.env)
        if self.utilities is None:
            raise ScenarioSemanticError("scenario has no utilities (add 'u' lines or 'utilities: rank')")
        return self.utilities

    def require_witness(self) -> Mu2Witness:
        if self.witness is None:
            raise ScenarioSemanticError("scenario has no mu2 witness (B, C and e lines)")
        return self.witness

    def digest(self) -> str:
        return hashlib.sha256(to_json(self).encode("utf-8")).hexdigest()


def _labels(body: str, line: int, col: int) -> list[str]:
    out = []
    for tok in body.split():
        if not _LABEL.fullmatch(tok):
            raise ScenarioSyntaxError(f"bad label {tok!r}", line, col + body.index(tok))
        out.append(tok)
    return out


def parse_angle(text: str) -> float:
    """A float literal or ``[k*]pi[/m]``."""
    text = text.strip()
    m = _PI_EXPR.match(text)
    if not m:
        return float(text)
    k = int(m.group(1) or 1)
    d = int(m.group(2) or 1)
    if d == 0:
        raise ValueError("division by zero")
    return k * math.pi / d


def _parse_gamma(body: str, line: int, col: int) -> float:
    try:
        value = parse_angle(body)
    except ValueError:
        raise ScenarioSyntaxError(f"gamma must be a number or k*pi/m, got {body.strip()!r}", line, col) from None
    try:
        return check_gamma(value)
    except InputError as exc:
        raise ScenarioSemanticError(str(exc), line) from None


def _agent(tok: str, line: int, col: int) -> int:
    if tok not in ("1", "2"):
        raise ScenarioSyntaxError(f"agent must be 1 or 2, got {tok!r}", line, col)
    return int(tok)


_ARITY = {
    "outcomes": 0, "profiles": 0, "rank": 2, "f": 1, "B": 0, "C": 3, "e": 4,
    "utilities": 0, "u": 2, "gamma": 0, "reference-agent": 0, "seed": 0,
}


def _statements(text: str):
    seen: dict[tuple, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        if not content.strip():
            continue
        if ":" not in content:
            col = len(content) - len(content.lstrip()) + 1
            raise ScenarioSyntaxError("expected 'header: body'", lineno, col)
        head, body = content.split(":", 1)
        body_col = len(head) + 2
        parts = head.split()
        if not parts:
            raise ScenarioSyntaxError("missing header before ':'", lineno, 1)
        key, args = parts[0], parts[1:]
        if key not in _ARITY:
            raise ScenarioSyntaxError(f"unknown header {key!r}", lineno, head.index(key) + 1)
        if len(args) != _ARITY[key]:
            raise ScenarioSyntaxError(
                f"'{key}' takes {_ARITY[key]} argument(s), got {len(args)}", lineno, 1
            )
        for a in args:
            if not _LABEL.fullmatch(a):
                raise ScenarioSyntaxError(f"bad label {a!r}", lineno, head.index(a) + 1)
        ident = (key, *args)
        if ident in seen:
            raise ScenarioSemanticError(
                f"duplicate statement '{' '.join(ident)}' (first on line {seen[ident]})", lineno
            )
        seen[ident] = lineno
        yield lineno, key, args, body, body_col


def parse_scenario(text: str) -> Scenario:
    outcomes = profiles = None
    rank_lines: dict[tuple[int, str], tuple[int, str, int]] = {}
    f_lines: dict[str, tuple[int, list[str]]] = {}
    b_line = None
    c_lines: dict[tuple[int, str, str], tuple[int, list[str]]] = {}
    e_lines: dict[tuple[str, str, str, str], tuple[int, str]] = {}
    u_lines: dict[tuple[int, str], tuple[int, dict[str, float]]] = {}
    utility_mode = None
    gamma, reference_agent, seed = HALF_PI, 2, 0
    decl_line = {}

    for line, key, args, body, col in _statements(text):
        if key in ("outcomes", "profiles"):
            labels = _labels(body, line, col)
            decl_line[key] = line
            if key == "outcomes":
                outcomes = labels
            else:
                profiles = labels
        elif key == "rank":
            rank_lines[(_agent(args[0], line, 1), args[1])] = (line, body.strip(), col)
        elif key == "f":
            f_lines[args[0]] = (line, _labels(body, line, col))
        elif key == "B":
            b_line = (line, _labels(body, line, col))
        elif key == "C":
            c_lines[(_agent(args[0], line, 1), args[1], args[2])] = (line, _labels(body, line, col))
        elif key == "e":
            vals = _labels(body, line, col)
            if len(vals) != 1:
                raise ScenarioSyntaxError("e takes exactly one outcome", line, col)
            e_lines[tuple(args)] = (line, vals[0])
        elif key == "utilities":
            mode = body.strip()
            if mode not in ("explicit", "rank"):
                raise ScenarioSyntaxError("utilities must be 'explicit' or 'rank'", line, col)
            utility_mode = mode
        elif key == "u":
            vals = {}
            for tok in body.split():
                name, eq, num = tok.partition("=")
                if not eq or not _LABEL.fullmatch(name):
                    raise ScenarioSyntaxError(f"expected outcome=number, got {tok!r}", line, col + body.index(tok))
                try:
                    vals[name] = float(num)
                except ValueError:
                    raise ScenarioSyntaxError(f"bad number {num!r}", line, col + body.index(tok)) from None
                if not math.isfinite(vals[name]):
                    raise ScenarioSemanticError(f"utility for {name} is not finite", line)
            u_lines[(_agent(args[0], line, 1), args[1])] = (line, vals)
        elif key == "gamma":
            gamma = _parse_gamma(body, line, col)
        elif key == "reference-agent":
            reference_agent = _agent(body.strip(), line, col)
        elif key == "seed":
            try:
                seed = int(body.strip())
            except ValueError:
                raise ScenarioSyntaxError(f"seed must be an integer, got {body.strip()!r}", line, col) from None
            if seed < 0:
                raise ScenarioSemanticError("seed must be non-negative", line)

    if not outcomes:
        raise ScenarioSemanticError("outcome list is empty or missing", decl_line.get("outcomes"))
    if not profiles:
        raise ScenarioSemanticError("profile list is empty or missing", decl_line.get("profiles"))

    def known_profile(t, line):
        if t not in profiles:
            raise ScenarioSemanticError(f"unknown profile {t}", line)

    def known_outcomes(xs, line):
        for x in xs:
            if x not in outcomes:
                raise ScenarioSemanticError(f"unknown outcome {x}", line)

    rankings = {}
    for (j, t), (line, body, col) in rank_lines.items():
        known_profile(t, line)
        classes = []
        for chunk in body.split(">"):
            members = [m.strip() for m in chunk.split("~")]
            if any(not _LABEL.fullmatch(m) for m in members):
                raise ScenarioSyntaxError("malformed ranking", line, col)
            classes.append(members)
        flat = [x for c in classes for x in c]
        dup = sorted({x for x in flat if flat.count(x) > 1})
        if dup:
            raise ScenarioSemanticError(f"ranking for agent {j} at {t} repeats {', '.join(dup)}", line)
        known_outcomes(flat, line)
        missing = [x for x in outcomes if x not in flat]
        if missing:
            raise ScenarioSemanticError(f"ranking for agent {j} at {t} omits {', '.join(missing)}", line)
        rankings[(j, t)] = tuple(frozenset(c) for c in classes)
    for t in profiles:
        for j in AGENTS:
            if (j, t) not in rankings:
                raise ScenarioSemanticError(f"no ranking for agent {j} at {t}")
    try:
        env = Environment(outcomes, profiles, rankings)
    except InputError as exc:
        raise ScenarioSemanticError(str(exc)) from None

    assignment = {}
    for t, (line, xs) in f_lines.items():
        known_profile(t, line)
        known_outcomes(xs, line)
        if not xs:
            raise ScenarioSemanticError(f"f({t}) empty", line)
        assignment[t] = frozenset(xs)
    for t in profiles:
        if t not in assignment:
            raise ScenarioSemanticError(f"f({t}) is not given")
    scr = Scr(assignment)

    witness = None
    if b_line or c_lines or e_lines:
        if b_line is None:
            raise ScenarioSemanticError("witness given without a B line")
        known_outcomes(b_line[1], b_line[0])
        for (j, a, t), (line, xs) in c_lines.items():
            known_outcomes([a], line)
            known_profile(t, line)
            known_outcomes(xs, line)
        for (a, t, b, p), (line, x) in e_lines.items():
            known_outcomes([a, b, x], line)
            known_profile(t, line)
            known_profile(p, line)
        witness = Mu2Witness(
            frozenset(b_line[1]),
            {k: frozenset(xs) for k, (_, xs) in c_lines.items()},
            {k: x for k, (_, x) in e_lines.items()},
        )

    utilities = None
    if u_lines:
        if utility_mode == "rank":
            raise ScenarioSemanticError("'utilities: rank' conflicts with explicit 'u' lines")
        utility_mode = "explicit"
        values = {}
        for (j, t), (line, vals) in u_lines.items():
            known_profile(t, line)
            known_outcomes(vals, line)
            missing = [x for x in outcomes if x not in vals]
            if missing:
                raise ScenarioSemanticError(f"utilities for agent {j} at {t} omit {', '.join(missing)}", line)
            for x, v in vals.items():
                values[(j, t, x)] = v
        utilities = UtilityTable(values)
        for t in profiles:
            for j in AGENTS:
                if (j, t) not in u_lines:
                    raise ScenarioSemanticError(f"no utilities for agent {j} at {t}")
        bad = utilities.inconsistency(env)
        if bad is not None:
            j, t, x, y = bad
            raise ScenarioSemanticError(
                f"utilities of agent {j} at {t} disagree with the ranking on {x}, {y}", u_lines[(j, t)][0]
            )
    elif utility_mode == "explicit":
        raise ScenarioSemanticError("'utilities: explicit' but no 'u' lines")

    return Scenario(env, scr, witness, utilities, utility_mode, gamma, reference_agent, seed)


def _num(x: float) -> str:
    return repr(float(x))


def to_text(sc: Scenario) -> str:
    """Canonical text form; ``parse_scenario(to_text(sc)) == sc``."""
    env = sc.env
    out = [
        f"outcomes: {' '.join(env.outcomes)}",
        f"profiles: {' '.join(env.profiles)}",
        "",
    ]
    for t in env.profiles:
        for j in AGENTS:
            out.append(f"rank {j} {t}: {format_ranking(env.rankings[(j, t)], env.outcomes)}")
    out.append("")
    for t in env.profiles:
        out.append(f"f {t}: {' '.join(env.sort_outcomes(sc.scr(t)))}")
    w = sc.witness
    if w is not None:
        out.append("")
        out.append(f"B: {' '.join(env.sort_outcomes(w.b_set))}".rstrip())
        for key in _sorted_c_keys(env, w):
            j, a, t = key
            out.append(f"C {j} {a} {t}: {' '.join(env.sort_outcomes(w.c_sets[key]))}".rstrip())
        for key in _sorted_e_keys(env, w):
            out.append(f"e {' '.join(key)}: {w.e_map[key]}")
    if sc.utility_mode is not None:
        out.append("")
        out.append(f"utilities: {sc.utility_mode}")
        if sc.utility_mode == "explicit":
            for t in env.profiles:
                for j in AGENTS:
                    vals = " ".join(f"{x}={_num(sc.utilities(j, t, x))}" for x in env.outcomes)
                    out.append(f"u {j} {t}: {vals}")
    out.append("")
    out.append(f"gamma: {_num(sc.gamma)}")
    out.append(f"reference-agent: {sc.reference_agent}")
    out.append(f"seed: {sc.seed}")
    return "\n".join(out) + "\n"


def _idx(env: Environment):
    oi = {x: i for i, x in enumerate(env.outcomes)}
    pi = {x: i for i, x in enumerate(env.profiles)}
    return lambda x: oi.get(x, len(oi)), lambda t: pi.get(t, len(pi))


def _sorted_c_keys(env: Environment, w: Mu2Witness):
    o, p = _idx(env)
    return sorted(w.c_sets, key=lambda k: (p(k[2]), o(k[1]), k[0]))


def _sorted_e_keys(env: Environment, w: Mu2Witness):
    o, p = _idx(env)
    return sorted(w.e_map, key=lambda k: (p(k[1]), o(k[0]), p(k[3]), o(k[2])))


def to_json(sc: Scenario) -> str:
    """Canonical machine-readable form (sorted keys, declared orders preserved)."""
    env = sc.env
    doc: dict = {
        "format": FORMAT_VERSION,
        "outcomes": list(env.outcomes),
        "profiles": list(env.profiles),
        "rankings": [
            {"agent": j, "profile": t, "classes": [env.sort_outcomes(c) for c in env.rankings[(j, t)]]}
            for t in env.profiles
            for j in AGENTS
        ],
        "scr": {t: env.sort_outcomes(sc.scr(t)) for t in env.profiles},
        "gamma": sc.gamma,
        "reference_agent": sc.reference_agent,
        "seed": sc.seed,
        "utility_mode": sc.utility_mode,
        "witness": None,
        "utilities": None,
    }
    w = sc.witness
    if w is not None:
        doc["witness"] = {
            "B": env.sort_outcomes(w.b_set),
            "C": [
                {"agent": k[0], "outcome": k[1], "profile": k[2], "set": env.sort_outcomes(w.c_sets[k])}
                for k in _sorted_c_keys(env, w)
            ],
            "e": [list(k) + [w.e_map[k]] for k in _sorted_e_keys(env, w)],
        }
    if sc.utility_mode == "explicit":
        doc["utilities"] = [
            {"agent": j, "profile": t, "values": {x: sc.utilities(j, t, x) for x in env.outcomes}}
            for t in env.profiles
            for j in AGENTS
        ]
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def from_json(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    if doc.get("format") != FORMAT_VERSION:
        raise ScenarioSemanticError(f"unsupported scenario format {doc.get('format')!r}")
    try:
        env = Environment(
            doc["outcomes"],
            doc["profiles"],
            {(r["agent"], r["profile"]): tuple(frozenset(c) for c in r["classes"]) for r in doc["rankings"]},
        )
        scr = Scr({t: frozenset(v) for t, v in doc["scr"].items()})
        scr.validate(env)
        witness = None
        if doc.get("witness") is not None:
            wd = doc["witness"]
            witness = Mu2Witness(
                frozenset(wd["B"]),
                {(c["agent"], c["outcome"], c["profile"]): frozenset(c["set"]) for c in wd["C"]},
                {tuple(row[:4]): row[4] for row in wd["e"]},
            )
        utilities = None
        if doc.get("utilities") is not None:
            utilities = UtilityTable(
                {(r["agent"], r["profile"], x): v for r in doc["utilities"] for x, v in r["values"].items()}
            )
            utilities.validate(env)
        return Scenario(
            env, scr, witness, utilities, doc.get("utility_mode"),
            check_gamma(float(doc["gamma"])), int(doc["reference_agent"]), int(doc["seed"]),
        )
    except KeyError as exc:
        raise ScenarioSemanticError(f"missing field {exc.args[0]!r}") from None
    except InputError as exc:
        raise ScenarioSemanticError(str(exc)) from None


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        return from_json(text)
    return parse_scenario(text)
