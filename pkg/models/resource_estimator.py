"""
Closed-form cost accounting: inequality test versus a Newton-Raphson
reciprocal, counted in multiplication-module invocations.
"""

import logging
import math
from dataclasses import dataclass, asdict

import numpy as np

from models.prep_algorithms import counting_oracle_inverse
from utils.amplitude_amplification import optimal_rounds
from utils.errors import SimulationError, ValidationError
from utils.quantum_arithmetic import OracleData, ScalarConstant

logger = logging.getLogger("ResourceEstimator")


@dataclass(frozen=True)
class CostModel:
    """Multiplications, qubit overhead factor and amplification rounds."""

    multiplications: int
    extra_qubit_factor: float = 0.0
    aa_rounds: int = 0

    def __post_init__(self):
        if self.multiplications < 0 or self.extra_qubit_factor < 0 or self.aa_rounds < 0:
            raise ValidationError(f"cost fields must be non-negative: {self}")

    def to_dict(self):
        return asdict(self)


def cost_inequality_method():
    """Multiply and uncompute: two multiplications at any precision."""
    return CostModel(multiplications=2, extra_qubit_factor=0.0, aa_rounds=0)


def newton_iterations(epsilon):
    """ceil(log2(log2(1/epsilon))) iterations for precision epsilon in (0, 0.5)."""
    if not 0.0 < epsilon < 0.5:
        raise ValidationError(f"epsilon must lie in (0, 0.5), got {epsilon}")
    # log2 of 1/epsilon is exact for powers of two
    bits = -math.log2(epsilon)
    return int(math.ceil(math.log2(bits) - 1e-12))


def cost_newton_raphson(epsilon):
    """
    Cost of a Newton-Raphson reciprocal reaching precision epsilon.

    Args:
        epsilon: Target precision in (0, 0.5)

    Returns:
        CostModel with 4 multiplications per iteration and one qubit copy per iteration
    """
    k = newton_iterations(epsilon)
    return CostModel(multiplications=4 * k, extra_qubit_factor=float(k), aa_rounds=0)


def aa_rounds_concrete(data, C, m):
    """
    Rounds planned by the preparation for the exact discrete success probability.

    Args:
        data: OracleData
        C: Comparator constant
        m: Grid bits

    Returns:
        optimal_rounds(sum_i (t_i / 2**m)**2 / d)
    """
    if not isinstance(data, OracleData):
        data = OracleData(tuple(data))
    ScalarConstant.for_inverse(C, data)

    counts = np.array([counting_oracle_inverse(a, C, m) for a in data.alphas], dtype=float)
    p = float(np.sum((counts / (1 << m)) ** 2) / data.d)
    rounds = optimal_rounds(p)

    ideal = np.linalg.norm(C / data.as_array().astype(float))
    bound = math.ceil((math.pi / 4.0) * math.sqrt(data.d) / ideal) + 1
    if rounds > bound:
        raise SimulationError(f"{rounds} rounds exceed the asymptotic bound {bound} (p={p})")
    return rounds


def compare_methods(epsilon, data=None, C=1, m=None):
    """
    Side-by-side cost of both reciprocal methods.

    Args:
        epsilon: Target precision for Newton-Raphson
        data: Optional OracleData for concrete amplification rounds
        C: Comparator constant
        m: Grid bits (default: ceil(log2(1/epsilon)))

    Returns:
        Dictionary of CostModel dictionaries keyed by method
    """
    inequality = cost_inequality_method()
    newton = cost_newton_raphson(epsilon)
    if data is not None:
        if m is None:
            m = max(1, int(math.ceil(-math.log2(epsilon))))
        rounds = aa_rounds_concrete(data, C, m)
        inequality = CostModel(inequality.multiplications, inequality.extra_qubit_factor, rounds)
        newton = CostModel(newton.multiplications, newton.extra_qubit_factor, rounds)

    logger.info(f"epsilon={epsilon}: inequality {inequality.multiplications} vs "
                f"newton {newton.multiplications} multiplications")
    return {'inequality': inequality.to_dict(), 'newton': newton.to_dict()}
