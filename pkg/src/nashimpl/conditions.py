"""Verification and exhaustive search of the Moore-Repullo conditions mu / mu2."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import InputError, SearchSpaceError
from .social_choice import AGENTS, Environment, Scr, lower_contour, maximal_set, other

RULE_IDS = ("i", "ii", "iii", "iv", "a-max", "witness-shape")


@dataclass(frozen=True)
class Mu2Witness:
    """B, the sets C_j(a, theta) keyed by (j, a, theta), and e keyed by (a, theta, b, phi)."""

    b_set: frozenset[str]
    c_sets: Mapping[tuple[int, str, str], frozenset[str]]
    e_map: Mapping[tuple[str, str, str, str], str]

    def __post_init__(self):
        object.__setattr__(self, "b_set", frozenset(self.b_set))
        object.__setattr__(self, "c_sets", {k: frozenset(v) for k, v in self.c_sets.items()})
        object.__setattr__(self, "e_map", dict(self.e_map))

    def c(self, j: int, a: str, theta: str) -> frozenset[str]:
        try:
            return self.c_sets[(j, a, theta)]
        except KeyError:
            raise InputError(f"witness has no C_{j}({a},{theta})") from None

    def e(self, a: str, theta: str, b: str, phi: str) -> str:
        try:
            return self.e_map[(a, theta, b, phi)]
        except KeyError:
            raise InputError(f"witness has no e({a},{theta},{b},{phi})") from None


@dataclass(frozen=True)
class Violation:
    rule: str
    subject: tuple
    detail: str
    sets: Mapping[str, frozenset[str]] = field(default_factory=dict)


@dataclass(frozen=True)
class RuleCheck:
    """One displayed ``M(...) & M(...)`` computation for a given theta*."""

    rule: str
    theta_star: str
    subject: tuple
    left_label: str
    left: frozenset[str]
    right_label: str
    right: frozenset[str]
    watched: frozenset[str]  # elements whose presence in the intersection forces membership in f
    ok: bool

    @property
    def intersection(self) -> frozenset[str]:
        return self.left & self.right


@dataclass
class ConditionReport:
    violations: list[Violation] = field(default_factory=list)
    checks: list[RuleCheck] = field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        return not self.violations


def lower_contour_witness(env: Environment, f: Scr, b_set: Iterable[str] | None = None) -> Mu2Witness:
    """Witness with C_j(a, theta) = L_j(a, theta) & B and e the first common element.

    Always shape-valid when every a in f(theta) lies in B; it need not satisfy mu2.
    """
    b = frozenset(env.outcomes if b_set is None else b_set)
    c_sets = {
        (j, a, t): lower_contour(env, j, a, t) & b for (a, t) in f.pairs(env) for j in AGENTS
    }
    e_map = {}
    for (a, t), (b2, p) in itertools.product(f.pairs(env), repeat=2):
        common = env.sort_outcomes(c_sets[(1, a, t)] & c_sets[(2, b2, p)])
        if not common:
            raise InputError(f"C_1({a},{t}) and C_2({b2},{p}) are disjoint")
        e_map[(a, t, b2, p)] = common[0]
    return Mu2Witness(b, c_sets, e_map)


def _fmt(xs: Iterable[str], env: Environment) -> str:
    return "{" + ",".join(env.sort_outcomes(xs)) + "}"


def _check_shape(env: Environment, f: Scr, w: Mu2Witness, report: ConditionReport) -> None:
    bad = report.violations
    unknown = w.b_set - set(env.outcomes)
    if unknown:
        bad.append(Violation("witness-shape", ("B",), f"B names unknown outcomes {sorted(unknown)}"))
    pairs = f.pairs(env)
    required_c = {(j, a, t) for (a, t) in pairs for j in AGENTS}
    for key in sorted(required_c - set(w.c_sets)):
        bad.append(Violation("witness-shape", key, "C_%d(%s,%s) missing" % key))
    for key in sorted(set(w.c_sets) - required_c):
        bad.append(Violation("witness-shape", key, "C_%d(%s,%s) given outside the domain" % key))
    for (j, a, t) in sorted(required_c & set(w.c_sets)):
        c = w.c_sets[(j, a, t)]
        if not c <= w.b_set:
            bad.append(Violation(
                "witness-shape", (j, a, t),
                f"C_{j}({a},{t}) = {_fmt(c, env)} is not a subset of B",
                {"C": c, "B": w.b_set},
            ))
        if a not in c:
            bad.append(Violation(
                "witness-shape", (j, a, t), f"{a} not in C_{j}({a},{t}) = {_fmt(c, env)}", {"C": c}
            ))
    required_e = {(a, t, b, p) for (a, t) in pairs for (b, p) in pairs}
    for key in sorted(required_e - set(w.e_map)):
        bad.append(Violation("witness-shape", key, "e(%s,%s,%s,%s) missing" % key))
    for key in sorted(set(w.e_map) - required_e):
        bad.append(Violation("witness-shape", key, "e(%s,%s,%s,%s) given outside the domain" % key))
    for (a, t, b, p) in sorted(required_e & set(w.e_map)):
        if (1, a, t) not in w.c_sets or (2, b, p) not in w.c_sets:
            continue
        common = w.c_sets[(1, a, t)] & w.c_sets[(2, b, p)]
        e = w.e_map[(a, t, b, p)]
        if e not in common:
            bad.append(Violation(
                "witness-shape", (a, t, b, p),
                f"e({a},{t},{b},{p}) = {e} not in C_1({a},{t}) & C_2({b},{p}) = {_fmt(common, env)}",
                {"intersection": common},
            ))


def verify_mu2(env: Environment, f: Scr, w: Mu2Witness) -> ConditionReport:
    """Check every clause of condition mu2 for the given witness.

    Shape problems are reported as ``witness-shape`` violations; the rule
    checks still run on whatever parts of the witness are present.
    """
    f.validate(env)
    report = ConditionReport()
    _check_shape(env, f, w, report)
    pairs = f.pairs(env)
    b_set = w.b_set & set(env.outcomes)

    def has_c(j, a, t):
        return bool(w.c_sets.get((j, a, t)))

    for (a, t) in pairs:
        for j in AGENTS:
            if not has_c(j, a, t):
                continue
            top = maximal_set(env, j, w.c_sets[(j, a, t)], t)
            if a not in top:
                report.violations.append(Violation(
                    "a-max", (j, a, t),
                    f"{a} not in M_{j}(C_{j}({a},{t}),{t}) = {_fmt(top, env)}", {"M": top},
                ))

    def record(rule, ts, subject, llab, left, rlab, right, watched):
        hit = (left & right & watched) - f(ts)
        check = RuleCheck(rule, ts, subject, llab, left, rlab, right, frozenset(watched), not hit)
        report.checks.append(check)
        if hit:
            report.violations.append(Violation(
                rule, (ts,) + subject,
                f"at {ts}: {llab} & {rlab} = {_fmt(left & right, env)} contains "
                f"{_fmt(hit, env)} outside f({ts}) = {_fmt(f(ts), env)}",
                {"left": left, "right": right, "f": f(ts)},
            ))

    for ts in env.profiles:
        mb = {j: maximal_set(env, j, b_set, ts) for j in AGENTS} if b_set else None
        for (a, t) in pairs:
            if has_c(1, a, t) and has_c(2, a, t):
                record(
                    "i", ts, (a, t),
                    f"M_1(C_1({a},{t}),{ts})", maximal_set(env, 1, w.c_sets[(1, a, t)], ts),
                    f"M_2(C_2({a},{t}),{ts})", maximal_set(env, 2, w.c_sets[(2, a, t)], ts),
                    {a},
                )
        if mb is not None:
            for j in AGENTS:
                k = other(j)
                for (a, t) in pairs:
                    if has_c(j, a, t):
                        left = maximal_set(env, j, w.c_sets[(j, a, t)], ts)
                        record(
                            "ii", ts, (j, a, t),
                            f"M_{j}(C_{j}({a},{t}),{ts})", left,
                            f"M_{k}(B,{ts})", mb[k],
                            left & mb[k],
                        )
            record("iii", ts, (), f"M_1(B,{ts})", mb[1], f"M_2(B,{ts})", mb[2], mb[1] & mb[2])
        for (a, t) in pairs:
            for (b, p) in pairs:
                key = (a, t, b, p)
                if key not in w.e_map or not (has_c(1, a, t) and has_c(2, b, p)):
                    continue
                record(
                    "iv", ts, key,
                    f"M_1(C_1({a},{t}),{ts})", maximal_set(env, 1, w.c_sets[(1, a, t)], ts),
                    f"M_2(C_2({b},{p}),{ts})", maximal_set(env, 2, w.c_sets[(2, b, p)], ts),
                    {w.e_map[key]},
                )
    return report


def _candidate_sets(env: Environment, j: int, a: str, t: str, b_set: frozenset[str]) -> list[frozenset[str]]:
    # a in M_j(C, t) iff C is inside the lower contour set, so nothing else can work
    base = lower_contour(env, j, a, t) & b_set
    rest = env.sort_outcomes(base - {a})
    out = [base]
    for size in range(len(rest) - 1, -1, -1):
        for combo in itertools.combinations(rest, size):
            out.append(frozenset(combo) | {a})
    return out


def search_mu2(
    env: Environment,
    f: Scr,
    b_fixed: Iterable[str] | None = None,
    *,
    max_outcomes: int = 8,
    max_profiles: int = 4,
) -> Mu2Witness | None:
    """Exhaustively look for a mu2 witness with B fixed (default: B = A).

    Each C_j(a, theta) is tried first as the lower contour set, then as every
    smaller subset containing a.  The choice is solved as a constraint problem
    over the pairs (a, theta): rules (i)/(ii) and the diagonal part of (iv)
    prune each pair's domain, the off-diagonal part of (iv) links pairs.
    """
    f.validate(env)
    if len(env.outcomes) > max_outcomes or len(env.profiles) > max_profiles:
        raise SearchSpaceError(
            f"search guard: |A|={len(env.outcomes)} (max {max_outcomes}), "
            f"|Theta|={len(env.profiles)} (max {max_profiles})"
        )
    b_set = frozenset(env.outcomes if b_fixed is None else b_fixed)
    for x in b_set:
        env.check_outcome(x)
    if not b_set:
        return None
    pairs = f.pairs(env)
    if any(a not in b_set for a, _ in pairs):
        return None

    m_cache: dict[tuple[int, frozenset[str], str], frozenset[str]] = {}

    def M(j, c, ts):
        key = (j, c, ts)
        if key not in m_cache:
            m_cache[key] = maximal_set(env, j, c, ts)
        return m_cache[key]

    for ts in env.profiles:
        if (M(1, b_set, ts) & M(2, b_set, ts)) - f(ts):
            return None

    def side_ok(j, c):
        k = other(j)
        return all(not ((M(j, c, ts) & M(k, b_set, ts)) - f(ts)) for ts in env.profiles)

    e_cache: dict[tuple[frozenset[str], frozenset[str]], str | None] = {}

    def pick_e(c1, c2):
        key = (c1, c2)
        if key not in e_cache:
            e_cache[key] = None
            for e in env.sort_outcomes(c1 & c2):
                if all(
                    e in f(ts) or e not in (M(1, c1, ts) & M(2, c2, ts)) for ts in env.profiles
                ):
                    e_cache[key] = e
                    break
        return e_cache[key]

    domains: list[list[tuple[frozenset[str], frozenset[str]]]] = []
    for (a, t) in pairs:
        ones = [c for c in _candidate_sets(env, 1, a, t, b_set) if side_ok(1, c)]
        twos = [c for c in _candidate_sets(env, 2, a, t, b_set) if side_ok(2, c)]
        dom = []
        for c1, c2 in itertools.product(ones, twos):
            if any(a not in f(ts) and a in (M(1, c1, ts) & M(2, c2, ts)) for ts in env.profiles):
                continue
            if pick_e(c1, c2) is None:
                continue
            dom.append((c1, c2))
        if not dom:
            return None
        domains.append(dom)

    def compatible(x, y):
        return pick_e(x[0], y[1]) is not None and pick_e(y[0], x[1]) is not None

    n = len(pairs)
    # arc consistency before backtracking
    changed = True
    while changed:
        changed = False
        for p in range(n):
            for q in range(n):
                if p == q:
                    continue
                kept = [x for x in domains[p] if any(compatible(x, y) for y in domains[q])]
                if len(kept) != len(domains[p]):
                    if not kept:
                        return None
                    domains[p] = kept
                    changed = True

    chosen: list[tuple[frozenset[str], frozenset[str]]] = []

    def extend(i):
        if i == n:
            return True
        for x in domains[i]:
            if all(compatible(x, y) for y in chosen):
                chosen.append(x)
                if extend(i + 1):
                    return True
                chosen.pop()
        return False

    if not extend(0):
        return None

    c_sets = {}
    for (a, t), (c1, c2) in zip(pairs, chosen):
        c_sets[(1, a, t)] = c1
        c_sets[(2, a, t)] = c2
    e_map = {
        (a, t, b, p): pick_e(c_sets[(1, a, t)], c_sets[(2, b, p)])
        for (a, t) in pairs
        for (b, p) in pairs
    }
    return Mu2Witness(b_set, c_sets, e_map)
