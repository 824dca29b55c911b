"""The entangled-coin mechanism, its classical simulation, and the payoff conditions.

Both mechanisms share one skeleton: a gate decides between the classical
branch (everyone reports truthfully, coins untouched) and the quantum branch
(cards are read side 0 or side 1 according to each collapsed coin).  They
differ only in how the collapse distribution is computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .conditions import verify_mu2
from .errors import InputError
from .mechanism import Message, check_message, dispatch_rule, enumerate_nash, outcome_g
from .quantum import (
    BASIS,
    C_OP,
    HALF_PI,
    I_OP,
    RNG_NAME,
    CollapseDistribution,
    LocalOp,
    algorithm_distribution,
    check_gamma,
    collapse_distribution,
    final_state,
    sample_collapse,
)
from .scenario import Scenario
from .social_choice import AGENTS, check_lambda_ordinal, other

DEVIATION_TOL = 1e-9
BOUNDARY_TOL = 1e-12


class ConditionNotMet(InputError):
    """A precondition on the scenario (such as mu2) does not hold."""


@dataclass(frozen=True)
class Card:
    side0: Message
    side1: Message

    @classmethod
    def constant(cls, m: Message) -> "Card":
        return cls(m, m)

    def side(self, coin: str) -> Message:
        return self.side0 if coin == "C" else self.side1


@dataclass(frozen=True)
class QuantumStrategy:
    op: LocalOp
    card: Card


@dataclass(frozen=True)
class RunReport:
    theta_true: str
    branch: str  # "classical" or "quantum"
    gate: tuple[str, str] | None
    gamma: float
    seed: int
    rng: str
    ops: tuple[LocalOp, LocalOp]
    cards: tuple[Card, Card]
    probabilities: tuple[float, float, float, float]
    collapse: str
    messages: tuple[Message, Message]
    rule: int
    outcome: str

    def lines(self) -> list[str]:
        p = " ".join(f"{b}={x:.12f}" for b, x in zip(BASIS, self.probabilities))
        gate = "none" if self.gate is None else f"{self.gate[0]} {self.gate[1]}"
        out = [
            f"theta_true: {self.theta_true}",
            f"branch: {self.branch}",
            f"gate: {gate}",
            f"gamma: {self.gamma!r}",
            f"rng: {self.rng} seed={self.seed}",
        ]
        for j in AGENTS:
            op, card = self.ops[j - 1], self.cards[j - 1]
            out.append(f"agent {j}: op=({op.xi!r},{op.phi!r}) card={card.side0}/{card.side1}")
        out += [
            f"distribution: {p}",
            f"collapse: {self.collapse}",
            f"messages: {self.messages[0]} {self.messages[1]}",
            f"rule: {self.rule}",
            f"outcome: {self.outcome}",
        ]
        return out


def placeholder(sc: Scenario) -> str:
    """Concrete value for a don't-care b: the first member of B."""
    w = sc.require_witness()
    return sc.env.sort_outcomes(w.b_set)[0]


def truthful_message(sc: Scenario, theta: str) -> Message:
    a = sc.env.sort_outcomes(sc.scr(theta))[0]
    return Message(theta, a, placeholder(sc), 0)


def proposition_cards(sc: Scenario, theta_true: str) -> tuple[Card, Card]:
    """Side 0 announces the gate's (theta', a'); side 1 is the truthful report."""
    gate = check_lambda_ordinal(sc.env, sc.scr, theta_true)
    if gate is None:
        m = truthful_message(sc, theta_true)
        return Card.constant(m), Card.constant(m)
    t2, a2 = gate
    card = Card(Message(t2, a2, placeholder(sc), 0), truthful_message(sc, theta_true))
    return card, card


def _run(
    sc: Scenario,
    theta_true: str,
    ops: tuple[LocalOp, LocalOp],
    cards: tuple[Card, Card],
    gamma: float,
    seed: int,
    distribution: Callable[[LocalOp, LocalOp], CollapseDistribution],
) -> RunReport:
    sc.env.check_profile(theta_true)
    w = sc.require_witness()
    for card in cards:
        check_message(card.side0, sc.scr, w)
        check_message(card.side1, sc.scr, w)
    gate = check_lambda_ordinal(sc.env, sc.scr, theta_true)
    if gate is None:
        m = truthful_message(sc, theta_true)
        ops = (I_OP, I_OP)
        cards = (Card.constant(m), Card.constant(m))
        probs = (1.0, 0.0, 0.0, 0.0)
        label = "CC"
        branch = "classical"
    else:
        # 12 decimals keeps replays stable across arithmetic paths
        d = distribution(*ops).rounded(12)
        probs = d.probabilities
        label = sample_collapse(d, seed)
        branch = "quantum"
    s1, s2 = cards[0].side(label[0]), cards[1].side(label[1])
    return RunReport(
        theta_true=theta_true,
        branch=branch,
        gate=gate,
        gamma=gamma,
        seed=int(seed),
        rng=RNG_NAME,
        ops=ops,
        cards=cards,
        probabilities=probs,
        collapse=label,
        messages=(s1, s2),
        rule=dispatch_rule(s1, s2),
        outcome=outcome_g(w, sc.scr, s1, s2),
    )


def run_quantum_mechanism(
    sc: Scenario,
    theta_true: str,
    strategies: Sequence[QuantumStrategy],
    gamma: float,
    seed: int,
) -> RunReport:
    gamma = check_gamma(gamma)
    s1, s2 = strategies

    def dist(op1, op2):
        return collapse_distribution(final_state(gamma, op1, op2))

    return _run(sc, theta_true, (s1.op, s2.op), (s1.card, s2.card), gamma, seed, dist)


def run_algorithmic_mechanism(
    sc: Scenario,
    theta_true: str,
    inputs: Sequence[tuple[float, float, Card]],
    seed: int,
) -> RunReport:
    """Classical simulation: entanglement is pinned at pi/2."""
    (x1, p1, c1), (x2, p2, c2) = inputs
    ops = (LocalOp(x1, p1), LocalOp(x2, p2))

    def dist(op1, op2):
        return CollapseDistribution(algorithm_distribution(op1.xi, op1.phi, op2.xi, op2.phi))

    return _run(sc, theta_true, ops, (c1, c2), HALF_PI, seed, dist)


@dataclass(frozen=True)
class DollarPayoffs:
    """Payoffs to ``reference_agent`` viewed as the second agent.

    In ``cd`` the other agent's coin shows C and the reference agent's shows D.
    """

    cc: float
    cd: float
    dc: float
    dd: float
    reference_agent: int = 2
    outcomes: tuple[str, str, str, str] | None = None

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.cc, self.cd, self.dc, self.dd


def physical_label(reference_agent: int, label: str) -> str:
    """Map a (other, reference) coin pattern to the (agent 1, agent 2) basis label."""
    return label if reference_agent == 2 else label[::-1]


def dollar_payoffs(
    sc: Scenario,
    theta_true: str,
    cards: Sequence[Card],
    reference_agent: int,
    *,
    allow_rank_default: bool = False,
) -> DollarPayoffs:
    sc.env.check_agent(reference_agent)
    w = sc.require_witness()
    u = sc.utility_table(allow_rank_default)
    values, outs = [], []
    for label in BASIS:
        phys = physical_label(reference_agent, label)
        s1, s2 = cards[0].side(phys[0]), cards[1].side(phys[1])
        out = outcome_g(w, sc.scr, s1, s2)
        outs.append(out)
        values.append(u(reference_agent, theta_true, out))
    return DollarPayoffs(*values, reference_agent=reference_agent, outcomes=tuple(outs))


def _status(lhs: float, rhs: float) -> str:
    if abs(lhs - rhs) <= BOUNDARY_TOL * max(1.0, abs(lhs), abs(rhs)):
        return "boundary"
    return "satisfied" if lhs > rhs else "fails"


@dataclass(frozen=True)
class LambdaReport:
    """Payoff conditions for one reference agent.

    ``lambda4`` is strict; ``"boundary"`` marks exact equality, where the weak
    reading holds and the strict one does not.
    """

    lambda3: str
    lambda4: str
    lambda4_rhs: float
    gamma: float | None = None

    @property
    def holds(self) -> bool:
        return self.lambda3 == "satisfied" and self.lambda4 == "satisfied"

    @property
    def holds_weakly(self) -> bool:
        return self.lambda3 == "satisfied" and self.lambda4 in ("satisfied", "boundary")


def _strict(lhs: float, rhs: float) -> str:
    return "satisfied" if _status(lhs, rhs) == "satisfied" else "fails"


def check_lambda_full(p: DollarPayoffs, gamma: float) -> LambdaReport:
    gamma = check_gamma(gamma)
    c2 = math.cos(gamma) ** 2
    s2 = math.sin(gamma) ** 2
    rhs = p.cd * c2 + p.dc * s2
    return LambdaReport(_strict(p.cc, p.dd), _status(p.cc, rhs), rhs, gamma)


def check_lambda_pi2(p: DollarPayoffs) -> LambdaReport:
    return LambdaReport(_strict(p.cc, p.dd), _status(p.cc, p.dc), p.dc, HALF_PI)


def lambda4_boundary(p: DollarPayoffs) -> float | None:
    """sin^2(gamma) at which cc == cd cos^2 + dc sin^2, or None if it never crosses."""
    if p.cd == p.dc:
        return None
    s = (p.cd - p.cc) / (p.cd - p.dc)
    return s if 0.0 <= s <= 1.0 else None


def gamma_for_sin2(s: float) -> float:
    return math.asin(math.sqrt(s))


# --- deviation analysis -------------------------------------------------------

CARD_SPACES = ("fixed", "side1", "free")


def op_grid(density: int) -> list[LocalOp]:
    """``density`` points for xi over [0, pi] and (density + 1) // 2 for phi over [0, pi/2]."""
    if density < 2:
        raise InputError("grid density must be at least 2")
    xs = np.linspace(0.0, math.pi, density)
    ps = np.linspace(0.0, HALF_PI, (density + 1) // 2)
    return [LocalOp(float(x), float(p)) for x in xs for p in ps]


def _coin_matrix(gamma: float, agent: int, own: LocalOp, opp: LocalOp) -> np.ndarray:
    """P[own coin, opponent coin] for ``agent`` playing ``own``."""
    ops = (own, opp) if agent == 1 else (opp, own)
    d = collapse_distribution(final_state(gamma, *ops)).probabilities
    m = np.zeros((2, 2))
    for label, p in zip(BASIS, d):
        m["CD".index(label[agent - 1]), "CD".index(label[other(agent) - 1])] = p
    return m


@dataclass(frozen=True)
class Deviation:
    agent: int
    baseline: float
    best: float
    op: LocalOp
    card: Card

    @property
    def gain(self) -> float:
        return self.best - self.baseline


def best_deviation(
    sc: Scenario,
    theta_true: str,
    profile: Sequence[QuantumStrategy],
    agent: int,
    gamma: float,
    grid_density: int,
    card_space: str = "side1",
    n_cap: int = 2,
    *,
    allow_rank_default: bool = False,
) -> Deviation:
    """Largest expected utility ``agent`` can reach against the fixed opponent.

    Expected utility is exact over the four collapse branches.  Given the
    coin probabilities, side 0 and side 1 are chosen independently, so each
    side is optimised separately per grid point.
    """
    if card_space not in CARD_SPACES:
        raise InputError(f"card space must be one of {CARD_SPACES}")
    gamma = check_gamma(gamma)
    w = sc.require_witness()
    u = sc.utility_table(allow_rank_default)
    k = other(agent)
    mine, theirs = profile[agent - 1], profile[k - 1]
    opp_sides = (theirs.card.side0, theirs.card.side1)
    n_top = max(n_cap, max(m.n for m in opp_sides) + 1)
    space = [
        Message(t, a, b, n)
        for (a, t) in sc.scr.pairs(sc.env)
        for b in sc.env.sort_outcomes(w.b_set)
        for n in range(n_top + 1)
    ]

    def value_rows(options):
        rows = np.empty((len(options), 2))
        for i, m in enumerate(options):
            for c, opp in enumerate(opp_sides):
                pair = (m, opp) if agent == 1 else (opp, m)
                rows[i, c] = u(agent, theta_true, outcome_g(w, sc.scr, *pair, validate=False))
        return rows

    side0_opts = [mine.card.side0] if card_space in ("fixed", "side1") else space
    side1_opts = [mine.card.side1] if card_space == "fixed" else space
    v0, v1 = value_rows(side0_opts), value_rows(side1_opts)

    base_p = _coin_matrix(gamma, agent, mine.op, theirs.op)
    baseline = float(base_p[0] @ value_rows([mine.card.side0])[0] + base_p[1] @ value_rows([mine.card.side1])[0])

    ops = op_grid(grid_density) + [C_OP, I_OP, LocalOp(math.pi, 0.0), LocalOp(math.pi, HALF_PI), mine.op]
    probs = np.stack([_coin_matrix(gamma, agent, op, theirs.op) for op in ops])
    score0 = probs[:, 0, :] @ v0.T
    score1 = probs[:, 1, :] @ v1.T
    best0, best1 = score0.argmax(axis=1), score1.argmax(axis=1)
    total = score0.max(axis=1) + score1.max(axis=1)
    g = int(total.argmax())
    card = Card(side0_opts[best0[g]], side1_opts[best1[g]])
    return Deviation(agent, baseline, float(total[g]), ops[g], card)


@dataclass
class PropositionVerdict:
    theta_true: str
    gamma: float
    branch: str
    gate: tuple[str, str] | None = None
    candidate: tuple[QuantumStrategy, QuantumStrategy] | None = None
    outcome: str | None = None
    outcome_in_f: bool | None = None
    lambda_reports: dict[int, LambdaReport] = field(default_factory=dict)
    lambda_pi2_reports: dict[int, LambdaReport] = field(default_factory=dict)
    payoffs: dict[int, DollarPayoffs] = field(default_factory=dict)
    deviations: dict[int, Deviation] = field(default_factory=dict)
    card_space: str = "side1"
    classical_outcomes: frozenset[str] | None = None
    scr_value: frozenset[str] = frozenset()

    @property
    def is_equilibrium(self) -> bool | None:
        if self.branch == "classical":
            return None
        return all(d.gain <= DEVIATION_TOL for d in self.deviations.values())

    @property
    def predicted(self) -> bool | None:
        """What the payoff conditions predict for the candidate; None on a boundary."""
        if self.branch == "classical":
            return None
        reports = self.lambda_reports.values()
        if all(r.holds for r in reports):
            return True
        if all(r.holds_weakly for r in reports):
            return None
        return False

    @property
    def consistent(self) -> bool:
        if self.branch == "classical":
            return self.classical_outcomes == frozenset(self.scr_value)
        return self.predicted is None or self.predicted == self.is_equilibrium

    @property
    def worst_gain(self) -> float:
        return max((d.gain for d in self.deviations.values()), default=0.0)


def verify_proposition(
    sc: Scenario,
    theta_true: str,
    gamma: float,
    grid_density: int = 61,
    card_space: str = "side1",
    n_cap: int = 2,
    *,
    allow_rank_default: bool = False,
) -> PropositionVerdict:
    """Build the coordinated profile and test it against every grid and card deviation.

    With ``card_space="side1"`` side 0 of each card is the one the mechanism
    prescribes in its quantum branch and agents deviate on side 1 and on the
    coin operation; ``"free"`` lets them rewrite both sides.
    """
    gamma = check_gamma(gamma)
    sc.env.check_profile(theta_true)
    w = sc.require_witness()
    u = sc.utility_table(allow_rank_default)
    report = verify_mu2(sc.env, sc.scr, w)
    if not report.satisfied:
        raise ConditionNotMet("scenario does not satisfy mu2; the proposition does not apply")

    verdict = PropositionVerdict(theta_true, gamma, "classical", card_space=card_space)
    verdict.scr_value = sc.scr(theta_true)
    gate = check_lambda_ordinal(sc.env, sc.scr, theta_true)
    if gate is None:
        verdict.classical_outcomes = enumerate_nash(sc.env, sc.scr, w, u, theta_true, n_cap).outcomes
        return verdict

    verdict.branch = "quantum"
    verdict.gate = gate
    cards = proposition_cards(sc, theta_true)
    candidate = (QuantumStrategy(C_OP, cards[0]), QuantumStrategy(C_OP, cards[1]))
    verdict.candidate = candidate
    run = run_quantum_mechanism(sc, theta_true, candidate, gamma, sc.seed)
    verdict.outcome = run.outcome
    verdict.outcome_in_f = run.outcome in sc.scr(theta_true)
    for j in AGENTS:
        p = dollar_payoffs(sc, theta_true, cards, j, allow_rank_default=allow_rank_default)
        verdict.payoffs[j] = p
        verdict.lambda_reports[j] = check_lambda_full(p, gamma)
        verdict.lambda_pi2_reports[j] = check_lambda_pi2(p)
        verdict.deviations[j] = best_deviation(
            sc, theta_true, candidate, j, gamma, grid_density, card_space, n_cap,
            allow_rank_default=allow_rank_default,
        )
    return verdict
