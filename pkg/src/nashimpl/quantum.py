"""Exact two-qubit simulation of the entangled-coin protocol.

Basis order is (CC, CD, DC, DD); the first letter is agent 1's coin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

BASIS = ("CC", "CD", "DC", "DD")
RNG_NAME = "numpy.random.PCG64"
HALF_PI = math.pi / 2

_SLACK = 1e-12


def _in_range(x: float, hi: float) -> bool:
    return -_SLACK <= x <= hi + _SLACK


@dataclass(frozen=True)
class LocalOp:
    """Parameters of one agent's local unitary: xi in [0, pi], phi in [0, pi/2]."""

    xi: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.xi) and math.isfinite(self.phi)):
            raise InputError("local operation parameters must be finite")
        if not _in_range(self.xi, math.pi):
            raise InputError(f"xi={self.xi} outside [0, pi]")
        if not _in_range(self.phi, HALF_PI):
            raise InputError(f"phi={self.phi} outside [0, pi/2]")


I_OP = LocalOp(0.0, 0.0)
D_OP = LocalOp(math.pi, HALF_PI)
C_OP = LocalOp(0.0, HALF_PI)
NAMED_OPS = {"I": I_OP, "D": D_OP, "C": C_OP}


def check_gamma(gamma: float) -> float:
    if not (math.isfinite(gamma) and _in_range(gamma, HALF_PI)):
        raise InputError(f"gamma={gamma} outside [0, pi/2]")
    return float(gamma)


def strategy_matrix(op: LocalOp) -> np.ndarray:
    c, s = math.cos(op.xi / 2), math.sin(op.xi / 2)
    return np.array(
        [
            [np.exp(1j * op.phi) * c, 1j * s],
            [1j * s, np.exp(-1j * op.phi) * c],
        ],
        dtype=complex,
    )


def entangler_matrix(gamma: float) -> np.ndarray:
    """cos(gamma/2) I(x)I + i sin(gamma/2) sx(x)sx."""
    gamma = check_gamma(gamma)
    c, s = math.cos(gamma / 2), 1j * math.sin(gamma / 2)
    return np.array(
        [
            [c, 0, 0, s],
            [0, c, s, 0],
            [0, s, c, 0],
            [s, 0, 0, c],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class QuantumState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (4,):
            raise InputError("a two-qubit state has exactly 4 amplitudes")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, label: str) -> complex:
        return complex(self.amplitudes[BASIS.index(label)])


def entangled_start(gamma: float) -> QuantumState:
    """J|CC>, which is nonzero only on CC and DD."""
    gamma = check_gamma(gamma)
    return QuantumState([math.cos(gamma / 2), 0, 0, 1j * math.sin(gamma / 2)])


def final_state(gamma: float, op1: LocalOp, op2: LocalOp) -> QuantumState:
    """J^dagger (w1 (x) w2) J |CC>.

    J|CC> only touches CC and DD, so only the first and last columns of
    w1 (x) w2 are ever needed.
    """
    gamma = check_gamma(gamma)
    w1, w2 = strategy_matrix(op1), strategy_matrix(op2)
    first = np.kron(w1[:, 0], w2[:, 0])
    last = np.kron(w1[:, 1], w2[:, 1])
    psi2 = math.cos(gamma / 2) * first + 1j * math.sin(gamma / 2) * last
    psi3 = entangler_matrix(gamma).conj().T @ psi2
    return QuantumState(psi3 / np.linalg.norm(psi3))


def algorithm_distribution(xi1: float, phi1: float, xi2: float, phi2: float) -> tuple[float, ...]:
    """Steps 1-5 of the classical two-agent algorithm, entanglement fixed at pi/2.

    Written out in scalar arithmetic so that it shares no code with
    :func:`final_state`.
    """
    op1, op2 = LocalOp(xi1, phi1), LocalOp(xi2, phi2)
    # step 2: leftmost and rightmost columns of w1 (x) w2
    c1, s1 = math.cos(op1.xi / 2), math.sin(op1.xi / 2)
    c2, s2 = math.cos(op2.xi / 2), math.sin(op2.xi / 2)
    e1, e2 = complex(math.cos(op1.phi), math.sin(op1.phi)), complex(math.cos(op2.phi), math.sin(op2.phi))
    left = (e1 * c1 * e2 * c2, e1 * c1 * 1j * s2, 1j * s1 * e2 * c2, -s1 * s2)
    right = (-s1 * s2, 1j * s1 * c2 / e2, c1 / e1 * 1j * s2, c1 * c2 / (e1 * e2))
    # step 3: psi2 = (left + i right) / sqrt 2
    r = 1 / math.sqrt(2)
    psi2 = [r * (lv + 1j * rv) for lv, rv in zip(left, right)]
    # step 4: psi3 = J_{pi/2}^dagger psi2
    psi3 = (
        r * (psi2[0] - 1j * psi2[3]),
        r * (psi2[1] - 1j * psi2[2]),
        r * (psi2[2] - 1j * psi2[1]),
        r * (psi2[3] - 1j * psi2[0]),
    )
    # step 5: squared magnitudes
    probs = [abs(z) ** 2 for z in psi3]
    total = sum(probs)
    return tuple(p / total for p in probs)


@dataclass(frozen=True)
class CollapseDistribution:
    probabilities: tuple[float, float, float, float]

    def __post_init__(self):
        p = tuple(float(x) for x in self.probabilities)
        if len(p) != 4:
            raise InputError("a collapse distribution has exactly 4 entries")
        if any(x < -1e-12 for x in p):
            raise InputError(f"negative probability in {p}")
        if abs(sum(p) - 1.0) > 1e-9:
            raise InputError(f"probabilities sum to {sum(p)}, not 1")
        object.__setattr__(self, "probabilities", tuple(max(x, 0.0) for x in p))

    def __getitem__(self, label: str) -> float:
        return self.probabilities[BASIS.index(label)]

    def rounded(self, digits: int = 12) -> "CollapseDistribution":
        return CollapseDistribution(tuple(round(x, digits) + 0.0 for x in self.probabilities))


def collapse_distribution(st: QuantumState) -> CollapseDistribution:
    if abs(st.norm - 1.0) > 1e-9:
        raise InputError(f"state is not normalized (norm {st.norm})")
    return CollapseDistribution(tuple(float(abs(z) ** 2) for z in st.amplitudes))


def sample_collapse(d: CollapseDistribution, seed: int) -> str:
    """Draw one basis label from ``d`` with a PCG64 generator seeded by ``seed``."""
    u = np.random.Generator(np.random.PCG64(int(seed))).random()
    acc = 0.0
    for label, p in zip(BASIS, d.probabilities):
        acc += p
        if u < acc:
            return label
    # rounding left the cumulative total a hair under u
    return [label for label, p in zip(BASIS, d.probabilities) if p > 0][-1]


def qubit_values(label: str) -> tuple[str, str]:
    """``"CD"`` -> (agent 1's coin, agent 2's coin)."""
    return label[0], label[1]
