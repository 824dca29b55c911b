"""Finite two-agent environments, social choice rules and preference queries.

Preferences are weak orders stored as indifference classes listed from best
to worst, so ``rank == 0`` is the top class and a smaller rank is better.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import InputError

AGENTS = (1, 2)

Ranking = tuple[frozenset[str], ...]


def other(j: int) -> int:
    return 2 if j == 1 else 1


def parse_ranking(text: str) -> Ranking:
    """Parse ``"a3 > a1 ~ a2 > a4"`` into indifference classes."""
    classes = []
    for chunk in text.split(">"):
        members = [m.strip() for m in chunk.split("~")]
        if any(not m for m in members):
            raise InputError(f"malformed ranking {text!r}")
        classes.append(frozenset(members))
    return tuple(classes)


def format_ranking(ranking: Ranking, order: Iterable[str]) -> str:
    order = list(order)
    parts = []
    for cls in ranking:
        parts.append(" ~ ".join(x for x in order if x in cls))
    return " > ".join(parts)


@dataclass(frozen=True)
class Environment:
    outcomes: tuple[str, ...]
    profiles: tuple[str, ...]
    rankings: Mapping[tuple[int, str], Ranking]
    _rank: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "profiles", tuple(self.profiles))
        if not self.outcomes:
            raise InputError("outcome set is empty")
        if not self.profiles:
            raise InputError("profile set is empty")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise InputError("duplicate outcome label")
        if len(set(self.profiles)) != len(self.profiles):
            raise InputError("duplicate profile label")
        expected = {(j, t) for j in AGENTS for t in self.profiles}
        extra = set(self.rankings) - expected
        if extra:
            raise InputError(f"rankings given for unknown (agent, profile) keys {sorted(extra)}")
        outcome_set = set(self.outcomes)
        rank: dict[tuple[int, str], dict[str, int]] = {}
        for j, t in sorted(expected, key=lambda k: (self.profiles.index(k[1]), k[0])):
            if (j, t) not in self.rankings:
                raise InputError(f"no ranking for agent {j} at {t}")
            seen: dict[str, int] = {}
            for level, cls in enumerate(self.rankings[(j, t)]):
                if not cls:
                    raise InputError(f"ranking for agent {j} at {t} has an empty class")
                for x in cls:
                    if x not in outcome_set:
                        raise InputError(f"ranking for agent {j} at {t} names unknown outcome {x}")
                    if x in seen:
                        raise InputError(f"ranking for agent {j} at {t} repeats {x}")
                    seen[x] = level
            missing = [x for x in self.outcomes if x not in seen]
            if missing:
                raise InputError(f"ranking for agent {j} at {t} omits {', '.join(missing)}")
            rank[(j, t)] = seen
        frozen = {k: tuple(frozenset(c) for c in v) for k, v in self.rankings.items()}
        object.__setattr__(self, "rankings", frozen)
        object.__setattr__(self, "_rank", rank)

    @classmethod
    def from_text(cls, outcomes, profiles, rankings: Mapping[tuple[int, str], str]) -> "Environment":
        return cls(outcomes, profiles, {k: parse_ranking(v) for k, v in rankings.items()})

    def check_outcome(self, a: str) -> None:
        if a not in self.outcomes:
            raise InputError(f"unknown outcome {a!r}")

    def check_profile(self, theta: str) -> None:
        if theta not in self.profiles:
            raise InputError(f"unknown profile {theta!r}")

    def check_agent(self, j: int) -> None:
        if j not in AGENTS:
            raise InputError(f"agent must be 1 or 2, got {j!r}")

    def rank(self, j: int, theta: str, a: str) -> int:
        self.check_agent(j)
        self.check_profile(theta)
        self.check_outcome(a)
        return self._rank[(j, theta)][a]

    def weakly_prefers(self, j: int, theta: str, x: str, y: str) -> bool:
        """x R_j(theta) y."""
        return self.rank(j, theta, x) <= self.rank(j, theta, y)

    def strictly_prefers(self, j: int, theta: str, x: str, y: str) -> bool:
        return self.rank(j, theta, x) < self.rank(j, theta, y)

    def sort_outcomes(self, xs: Iterable[str]) -> list[str]:
        """Order a collection by the declared outcome order."""
        xs = set(xs)
        return [a for a in self.outcomes if a in xs]


@dataclass(frozen=True)
class Scr:
    """Social choice rule: profile -> nonempty set of outcomes."""

    assignment: Mapping[str, frozenset[str]]

    def __post_init__(self):
        object.__setattr__(
            self, "assignment", {t: frozenset(v) for t, v in self.assignment.items()}
        )

    def __call__(self, theta: str) -> frozenset[str]:
        try:
            return self.assignment[theta]
        except KeyError:
            raise InputError(f"f is undefined at profile {theta!r}") from None

    def validate(self, env: Environment) -> None:
        for t in env.profiles:
            if t not in self.assignment:
                raise InputError(f"f({t}) is not given")
            if not self.assignment[t]:
                raise InputError(f"f({t}) empty")
            for a in self.assignment[t]:
                if a not in env.outcomes:
                    raise InputError(f"f({t}) contains unknown outcome {a}")
        extra = set(self.assignment) - set(env.profiles)
        if extra:
            raise InputError(f"f given at unknown profiles {sorted(extra)}")

    def pairs(self, env: Environment) -> list[tuple[str, str]]:
        """All (a, theta) with a in f(theta), in declared order."""
        return [(a, t) for t in env.profiles for a in env.sort_outcomes(self(t))]


def lower_contour(env: Environment, j: int, a: str, theta: str) -> frozenset[str]:
    r = env.rank(j, theta, a)
    return frozenset(x for x in env.outcomes if env._rank[(j, theta)][x] >= r)


def maximal_set(env: Environment, j: int, c_set: Iterable[str], theta: str) -> frozenset[str]:
    c_set = frozenset(c_set)
    if not c_set:
        raise InputError("maximal set of an empty set is undefined")
    ranks = {c: env.rank(j, theta, c) for c in c_set}
    best = min(ranks.values())
    return frozenset(c for c, r in ranks.items() if r == best)


def pareto_improves(env: Environment, theta: str, x: str, y: str) -> bool:
    """x R_j y for both agents and x P_k y for at least one."""
    weak = all(env.weakly_prefers(j, theta, x, y) for j in AGENTS)
    return weak and any(env.strictly_prefers(j, theta, x, y) for j in AGENTS)


def _indifferent(env: Environment, theta: str, x: str, y: str) -> bool:
    return all(env.rank(j, theta, x) == env.rank(j, theta, y) for j in AGENTS)


def check_lambda_ordinal(env: Environment, f: Scr, theta: str) -> tuple[str, str] | None:
    """Find the profile the agents would jointly rather have announced.

    Returns ``(theta', a')`` where ``a' in f(theta')`` Pareto-improves on some
    ``a in f(theta)`` at ``theta`` and is not Pareto-beaten by the improving
    outcome of any other such profile.  Candidates that tie (both agents
    indifferent) are resolved by declared profile order.
    """
    env.check_profile(theta)
    current = f(theta)
    improving: dict[str, list[str]] = {}
    for t in env.profiles:
        if t == theta:
            continue
        hits = [
            a2 for a2 in env.sort_outcomes(f(t))
            if any(pareto_improves(env, theta, a2, a) for a in current)
        ]
        if hits:
            improving[t] = hits

    for t, hits in improving.items():
        for a_prime in hits:
            if all(
                any(
                    pareto_improves(env, theta, a_prime, a2) or _indifferent(env, theta, a_prime, a2)
                    for a2 in others
                )
                for t2, others in improving.items()
                if t2 != t
            ):
                return t, a_prime
    return None
