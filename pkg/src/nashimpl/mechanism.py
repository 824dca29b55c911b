"""The Moore-Repullo outcome function and brute-force pure Nash enumeration."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .conditions import Mu2Witness
from .errors import InputError
from .social_choice import AGENTS, Environment, Scr


@dataclass(frozen=True, order=True)
class Message:
    """One agent's announcement (theta_j, a_j, b_j, n_j)."""

    theta: str
    a: str
    b: str
    n: int = 0

    def __str__(self) -> str:
        return f"({self.theta},{self.a},{self.b},{self.n})"


def check_message(m: Message, f: Scr, w: Mu2Witness) -> None:
    if not isinstance(m.n, int) or isinstance(m.n, bool) or m.n < 0:
        raise InputError(f"integer announcement must be a non-negative int, got {m.n!r}")
    if m.a not in f(m.theta):
        raise InputError(f"message {m}: {m.a} is not in f({m.theta})")
    if m.b not in w.b_set:
        raise InputError(f"message {m}: {m.b} is not in B")


def dispatch_rule(s1: Message, s2: Message) -> int:
    """Which of rules (1)-(6) decides g at this message pair."""
    if (s1.a, s1.theta) == (s2.a, s2.theta):
        return 1
    n1, n2 = s1.n, s2.n
    if n1 == 0 and n2 == 0:
        return 2
    if n2 == 0:
        return 3
    if n1 == 0:
        return 4
    if n1 >= n2:
        return 5
    return 6


def outcome_g(w: Mu2Witness, f: Scr, s1: Message, s2: Message, *, validate: bool = True) -> str:
    if validate:
        check_message(s1, f, w)
        check_message(s2, f, w)
    rule = dispatch_rule(s1, s2)
    if rule == 1:
        return s1.a
    compromise = w.e(s2.a, s2.theta, s1.a, s1.theta)
    if rule == 2:
        return compromise
    if rule == 3:
        return s1.b if s1.b in w.c(1, s2.a, s2.theta) else compromise
    if rule == 4:
        return s2.b if s2.b in w.c(2, s1.a, s1.theta) else compromise
    if rule == 5:
        return s1.b
    return s2.b


@dataclass(frozen=True)
class UtilityTable:
    """Cardinal utilities keyed by (agent, profile, outcome)."""

    values: Mapping[tuple[int, str, str], float]

    def __post_init__(self):
        object.__setattr__(self, "values", {k: float(v) for k, v in self.values.items()})

    def __call__(self, j: int, theta: str, a: str) -> float:
        try:
            return self.values[(j, theta, a)]
        except KeyError:
            raise InputError(f"no utility for agent {j} at {theta} for {a}") from None

    @classmethod
    def rank_default(cls, env: Environment) -> "UtilityTable":
        """|A| - rank with 1-based positions, ties sharing the mean position."""
        n = len(env.outcomes)
        values = {}
        for (j, t), ranking in env.rankings.items():
            pos = 1
            for cls_ in ranking:
                mid = pos + (len(cls_) - 1) / 2
                for x in cls_:
                    values[(j, t, x)] = n - mid
                pos += len(cls_)
        return cls(values)

    def inconsistency(self, env: Environment) -> tuple[int, str, str, str] | None:
        """First (agent, profile, x, y) where the numbers contradict the ranking."""
        for t in env.profiles:
            for j in AGENTS:
                for x in env.outcomes:
                    self(j, t, x)
                for x, y in itertools.combinations(env.outcomes, 2):
                    rx, ry = env.rank(j, t, x), env.rank(j, t, y)
                    ux, uy = self(j, t, x), self(j, t, y)
                    if (rx < ry) != (ux > uy) or (rx == ry) != (ux == uy):
                        return j, t, x, y
        return None

    def validate(self, env: Environment) -> None:
        bad = self.inconsistency(env)
        if bad is not None:
            j, t, x, y = bad
            raise InputError(f"utilities of agent {j} at {t} disagree with the ranking on {x}, {y}")

    def rescaled(self, scale: Mapping[int, float], shift: Mapping[int, float]) -> "UtilityTable":
        return UtilityTable(
            {(j, t, x): scale[j] * v + shift[j] for (j, t, x), v in self.values.items()}
        )


def strategy_set(env: Environment, f: Scr, w: Mu2Witness, n_values) -> list[Message]:
    bs = env.sort_outcomes(w.b_set)
    return [
        Message(t, a, b, n)
        for (a, t) in f.pairs(env)
        for b in bs
        for n in n_values
    ]


@dataclass
class EquilibriumSet:
    equilibria: list[tuple[Message, Message, str]] = field(default_factory=list)

    @property
    def outcomes(self) -> frozenset[str]:
        return frozenset(o for _, _, o in self.equilibria)


def enumerate_nash(
    env: Environment,
    f: Scr,
    w: Mu2Witness,
    u: UtilityTable,
    theta_true: str,
    n_cap: int = 2,
) -> EquilibriumSet:
    """All pure equilibria of (g, theta_true) with announcements up to ``n_cap``.

    g reads the integers only through comparisons with zero and with each
    other, so a deviation by j against an opponent announcing n is fully
    covered by n_j in {0, ..., n + 1}.
    """
    if n_cap < 2:
        raise InputError("n_cap must be at least 2")
    env.check_profile(theta_true)
    profiles = strategy_set(env, f, w, range(n_cap + 1))
    stems = [(m.theta, m.a, m.b) for m in strategy_set(env, f, w, [0])]
    deviations: dict[int, list[Message]] = {}

    def devs(n_opp):
        if n_opp not in deviations:
            deviations[n_opp] = [Message(t, a, b, n) for (t, a, b) in stems for n in range(n_opp + 2)]
        return deviations[n_opp]

    g_cache: dict[tuple[Message, Message], str] = {}

    def g(s1, s2):
        key = (s1, s2)
        if key not in g_cache:
            g_cache[key] = outcome_g(w, f, s1, s2, validate=False)
        return g_cache[key]

    result = EquilibriumSet()
    for s1, s2 in itertools.product(profiles, repeat=2):
        out = g(s1, s2)
        u1, u2 = u(1, theta_true, out), u(2, theta_true, out)
        if any(u(1, theta_true, g(d, s2)) > u1 for d in devs(s2.n)):
            continue
        if any(u(2, theta_true, g(s1, d)) > u2 for d in devs(s1.n)):
            continue
        result.equilibria.append((s1, s2, out))
    return result


@dataclass
class ImplementationReport:
    per_profile: dict[str, tuple[frozenset[str], frozenset[str]]]

    @property
    def implements(self) -> bool:
        return all(eq == want for eq, want in self.per_profile.values())

    @property
    def failing(self) -> list[str]:
        return [t for t, (eq, want) in self.per_profile.items() if eq != want]


def implements_check(
    env: Environment, f: Scr, w: Mu2Witness, u: UtilityTable, n_cap: int = 2
) -> ImplementationReport:
    """Compare equilibrium outcomes with f(theta) in every profile."""
    per = {}
    for t in env.profiles:
        per[t] = (enumerate_nash(env, f, w, u, t, n_cap).outcomes, f(t))
    return ImplementationReport(per)
