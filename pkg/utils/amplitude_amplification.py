"""
Amplitude amplification over a register-defined good subspace.

A PreparationProgram records the unitary steps that build a state from
|0...0>, so the reflection A S_0 A^-1 can be replayed exactly. One round is

    Q = -A S_0 A^-1 S_good

where the leading sign keeps real non-negative amplitudes non-negative and
does not change any probability.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from utils.config import REDUCTION_TOL
from utils.errors import ValidationError, SimulationError
from utils.statevector import init_basis, reflect_about_zero

logger = logging.getLogger("AmplitudeAmplification")


@dataclass(frozen=True)
class GoodSubspace:
    """Basis states whose registers carry the listed labels."""

    conditions: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.conditions:
            raise ValidationError("a good subspace needs at least one register condition")
        object.__setattr__(self, 'conditions', dict(self.conditions))

    def validate(self, layout):
        for name, label in self.conditions.items():
            layout.check_label(name, label)

    def __hash__(self):
        return hash(tuple(sorted(self.conditions.items())))


@dataclass
class ProgramStep:
    """One invertible step; `kind` tags steps that resource counting cares about."""

    name: str
    forward: Callable
    backward: Callable
    kind: str = "unitary"


class PreparationProgram:
    """
    Ordered invertible steps that map |0...0> to a pre-measurement state.
    """

    def __init__(self, layout, backend="dense", work_registers=None, zero_registers=None):
        """
        Initialize an empty program.

        Args:
            layout: RegisterLayout the program acts on
            backend: Simulation backend for the initial state
            work_registers: Trailing registers stored densely by the block backend
            zero_registers: Registers reflected by S_0 (default: all)
        """
        self.layout = layout
        self.backend = backend
        self.work_registers = work_registers
        self.zero_registers = tuple(zero_registers) if zero_registers else None
        self.steps = []

    def then(self, name, forward, backward=None, kind="unitary"):
        """
        Append a step; a missing backward means the step is its own inverse.

        Returns:
            self, for chaining
        """
        self.steps.append(ProgramStep(name, forward, backward or forward, kind))
        return self

    def extend(self, other):
        if other.layout != self.layout:
            raise ValidationError("cannot join programs over different layouts")
        self.steps.extend(other.steps)
        return self

    def initial_state(self):
        return init_basis(self.layout, {}, backend=self.backend,
                          work_registers=self.work_registers)

    def run(self, state=None):
        """Apply every step in order (from |0...0> when no state is given)."""
        if state is None:
            state = self.initial_state()
        for step in self.steps:
            logger.debug(f"forward {step.name}")
            state = step.forward(state)
        return state

    def inverse(self, state):
        """Apply the inverse program A^-1."""
        for step in reversed(self.steps):
            logger.debug(f"backward {step.name}")
            state = step.backward(state)
        return state

    def count(self, kind):
        return sum(1 for step in self.steps if step.kind == kind)

    @property
    def multiplication_count(self):
        return self.count("multiply")

    def __len__(self):
        return len(self.steps)

    def __repr__(self):
        names = ", ".join(step.name for step in self.steps)
        return f"PreparationProgram([{names}])"


def success_probability(state, good):
    """
    Exact probability mass of the good subspace.

    Args:
        state: Normalized state
        good: GoodSubspace

    Returns:
        Probability in [0, 1]
    """
    good.validate(state.layout)
    return float(np.clip(state.probability(good.conditions), 0.0, 1.0))


def optimal_rounds(p):
    """
    Number of rounds k maximizing sin^2((2k+1) * arcsin(sqrt(p))).

    Args:
        p: Initial success probability in (0, 1]

    Returns:
        Non-negative integer k
    """
    if not 0.0 < p <= 1.0 + 1e-12:
        raise ValidationError(f"success probability must lie in (0, 1], got {p}")
    theta = np.arcsin(np.sqrt(min(p, 1.0)))
    return max(0, int(round(np.pi / (4.0 * theta) - 0.5)))


def amplified_probability(p, rounds):
    """Closed-form success probability after `rounds` rounds."""
    theta = np.arcsin(np.sqrt(min(max(p, 0.0), 1.0)))
    return float(np.sin((2 * rounds + 1) * theta) ** 2)


def grover_iterate(state, program, good):
    """One round Q = -A S_0 A^-1 S_good."""
    state = state.phase_flip(good.conditions)
    state = program.inverse(state)
    state = reflect_about_zero(state, program.zero_registers)
    state = program.run(state)
    return state.scaled(-1.0)


def grover_iterate_inverse(state, program, good):
    """Q^-1 = -S_good A S_0 A^-1."""
    state = program.inverse(state)
    state = reflect_about_zero(state, program.zero_registers)
    state = program.run(state)
    state = state.phase_flip(good.conditions)
    return state.scaled(-1.0)


def amplified_step(program, good, rounds, name=None):
    """
    A single ProgramStep running `program` followed by `rounds` rounds of Q.

    Lets an amplified sub-preparation sit inside a larger program whose own
    amplification replays it exactly.
    """
    good.validate(program.layout)

    def forward(state):
        state = program.run(state)
        for _ in range(rounds):
            state = grover_iterate(state, program, good)
        return state

    def backward(state):
        for _ in range(rounds):
            state = grover_iterate_inverse(state, program, good)
        return program.inverse(state)

    return ProgramStep(name or f"amplified[{rounds}]", forward, backward, "amplified")


def amplify(state, program, good, rounds):
    """
    Apply `rounds` rounds of Q to a state produced by `program`.

    Args:
        state: State equal to program.run() up to 1e-9
        program: PreparationProgram
        good: GoodSubspace
        rounds: Number of rounds (>= 0)

    Returns:
        Amplified state
    """
    if isinstance(rounds, bool) or not isinstance(rounds, (int, np.integer)) or rounds < 0:
        raise ValidationError(f"rounds must be a non-negative integer, got {rounds!r}")
    good.validate(state.layout)

    reference = program.run()
    overlap = abs(reference.inner(state)) ** 2
    if overlap < 1.0 - REDUCTION_TOL:
        raise SimulationError(
            f"state does not match the preparation program (overlap {overlap:.12f})"
        )

    p0 = success_probability(state, good)
    for k in range(int(rounds)):
        state = grover_iterate(state, program, good)
        logger.debug(f"round {k + 1}: good probability {success_probability(state, good):.12f}")

    if rounds:
        final = success_probability(state, good)
        if final < p0:
            logger.warning(f"amplification overshoot: {p0:.6f} -> {final:.6f} after {rounds} rounds")
    return state
