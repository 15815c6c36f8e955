"""
Black-box state preparation by inequality test.

The preparations build a PreparationProgram over a register layout, measure
the raw success probability of the accepted branch, optionally amplify it,
post-select exactly and read the index register back as amplitudes:

1. prepare_inverse   amplitudes ~ C / alpha_i
2. prepare_division  amplitudes ~ beta_i / alpha_i
3. prepare_general   amplitudes ~ f(alpha_i) through a FunctionTablePair
4. prepare_uniform   amplitudes 1/sqrt(d) for any d

The counting oracles give the exact discrete semantics of every amplitude:
t_i = #{j in [0, 2**m) : the inequality test accepts j}.
"""

import logging
from dataclasses import dataclass, field, fields, replace

import numpy as np

from utils.amplitude_amplification import (
    GoodSubspace,
    PreparationProgram,
    amplified_step,
    amplify,
    optimal_rounds,
    success_probability,
)
from utils.config import (
    BLOCK_INDEX_QUBITS,
    REPORT_TOL,
    SUPPORT_TOL,
    UNITARY_TOL,
    get_max_qubits,
)
from utils.errors import PrepError, SimulationError, ValidationError
from utils.fixed_point import FixedPointFormat
from utils.quantum_arithmetic import (
    OracleData,
    PredicateMode,
    ScalarConstant,
    XorLoad,
    apply_function_to_register,
    compare_flag,
    compare_general,
    multiply_in_place,
    oracle_load,
    oracle_unload,
    uncompute_multiply,
)
from utils.statevector import (
    Register,
    RegisterLayout,
    apply_hadamard_layer,
    apply_ry,
    fidelity,
    get_backend,
    project_and_renormalize,
    register_amplitudes,
)

logger = logging.getLogger("PrepAlgorithms")

INDEX_GOOD = {'anc1': 0, 'anc2': 0}
ACCEPTED = {'A': 0, 'flag': 0}


@dataclass(frozen=True)
class InversePrepConfig:
    """Configuration of one inverse-coefficient preparation."""

    data: OracleData
    C: int = 1
    m: int = 4
    aa_rounds: object = 'auto'
    backend: str = 'dense'

    def __post_init__(self):
        if not isinstance(self.data, OracleData):
            object.__setattr__(self, 'data', OracleData(tuple(self.data)))
        if isinstance(self.m, bool) or not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise ValidationError(f"m must be an integer >= 1, got {self.m!r}")
        get_backend(self.backend)
        _check_rounds(self.aa_rounds)
        self.constant()

    def constant(self):
        return ScalarConstant.for_inverse(self.C, self.data)


@dataclass
class PrepReport:
    """Outcome of a preparation run."""

    post_selected_amplitudes: list
    success_probability_raw: float
    aa_rounds_used: int
    success_probability_final: float
    multiplication_count: int
    fidelity_vs_target: float
    max_componentwise_error: float
    mode: str = "inverse"
    m: int = 0
    backend: str = "dense"
    counts: list = field(default_factory=list)
    target_amplitudes: list = field(default_factory=list)

    FLOAT_FIELDS = ('success_probability_raw', 'success_probability_final',
                    'fidelity_vs_target', 'max_componentwise_error')
    VECTOR_FIELDS = ('post_selected_amplitudes', 'target_amplitudes')
    EXACT_FIELDS = ('aa_rounds_used', 'multiplication_count', 'mode', 'm', 'counts')

    def to_dict(self):
        return {
            'mode': self.mode,
            'backend': self.backend,
            'm': int(self.m),
            'post_selected_amplitudes': [float(a) for a in self.post_selected_amplitudes],
            'target_amplitudes': [float(a) for a in self.target_amplitudes],
            'counts': [int(t) for t in self.counts],
            'success_probability_raw': float(self.success_probability_raw),
            'aa_rounds_used': int(self.aa_rounds_used),
            'success_probability_final': float(self.success_probability_final),
            'multiplication_count': int(self.multiplication_count),
            'fidelity_vs_target': float(self.fidelity_vs_target),
            'max_componentwise_error': float(self.max_componentwise_error),
        }

    @classmethod
    def from_dict(cls, values):
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in values.items() if k in names})

    def matches(self, other, tol=REPORT_TOL):
        """
        Compare two reports field by field (backend excluded).

        Args:
            other: PrepReport
            tol: Absolute tolerance on real-valued fields

        Returns:
            True if every field agrees
        """
        for name in self.EXACT_FIELDS:
            if list(np.atleast_1d(getattr(self, name))) != list(np.atleast_1d(getattr(other, name))):
                return False
        for name in self.FLOAT_FIELDS:
            if abs(getattr(self, name) - getattr(other, name)) > tol:
                return False
        for name in self.VECTOR_FIELDS:
            a = np.asarray(getattr(self, name), dtype=float)
            b = np.asarray(getattr(other, name), dtype=float)
            if a.shape != b.shape or (a.size and np.max(np.abs(a - b)) > tol):
                return False
        return True


def _check_rounds(aa_rounds):
    if aa_rounds == 'auto':
        return
    if isinstance(aa_rounds, bool) or not isinstance(aa_rounds, (int, np.integer)) or aa_rounds < 0:
        raise ValidationError(f"aa_rounds must be 'auto' or an integer >= 0, got {aa_rounds!r}")


def _resolve_rounds(aa_rounds, p):
    _check_rounds(aa_rounds)
    return optimal_rounds(p) if aa_rounds == 'auto' else int(aa_rounds)


def _normalized(values):
    v = np.asarray(values, dtype=float)
    return v / np.linalg.norm(v)


def classical_target_inverse(data, C=1):
    """
    Normalized (C / alpha_i).

    Args:
        data: OracleData
        C: Positive constant (cancels in the normalization)

    Returns:
        Float vector of length d
    """
    ScalarConstant.for_inverse(C, data)
    return _normalized(C / data.as_array().astype(float))


def classical_target_division(data, betas):
    ScalarConstant.for_division(betas, data)
    return _normalized(np.asarray(betas, dtype=float) / data.as_array())


def classical_target_general(data, tables):
    tables.check_data(data)
    return _normalized([float(tables.f_value(a)) for a in data.alphas])


def counting_oracle_inverse(alpha_i, C, m):
    """
    Brute-force count of grid points passing alpha_i * j < C * 2**m.

    Args:
        alpha_i: Oracle value (>= 1)
        C: Comparator constant (>= 1)
        m: Grid bits

    Returns:
        Integer t in [1, 2**m]
    """
    if alpha_i < 1 or C < 1:
        raise ValidationError(f"counting needs alpha >= 1 and C >= 1, got {alpha_i}, {C}")
    j = np.arange(1 << m, dtype=np.int64)
    return int(np.count_nonzero(alpha_i * j < (C << m)))


def counting_oracle_general(alpha_i, tables, m):
    """Number of grid points accepted by the general predicate for one data label."""
    if m != tables.m:
        raise ValidationError(f"tables were built for m={tables.m}, got m={m}")
    return int(np.count_nonzero(tables.accepted(alpha_i)))


def uniform_theta(d):
    """R_y angle 2*arccos(sqrt(2**(l-2) / d)) for 2**(l-1) < d < 2**l."""
    l = (d - 1).bit_length()
    return 2.0 * np.arccos(np.sqrt((1 << l) / 4.0 / d))


def uniform_error_bound(eps0):
    """Lower bound 1 - 16*eps0**2 on the final probability under an angle error eps0."""
    return 1.0 - 16.0 * eps0 ** 2


def _is_power_of_two(d):
    return d & (d - 1) == 0


def _index_width(d):
    return max(1, (d - 1).bit_length())


def _layout(registers, backend):
    budget = get_max_qubits() if backend == 'dense' else BLOCK_INDEX_QUBITS
    return RegisterLayout(registers, max_qubits=budget)


def _prep_layout(d, keys, work, backend):
    """I, the key registers, anc1/anc2 when d is not a power of two, then the work registers."""
    registers = [Register('I', _index_width(d))] + list(keys)
    if not _is_power_of_two(d):
        registers += [Register('anc1', 1), Register('anc2', 1)]
    return _layout(registers + list(work), backend)


def uniform_stage_program(layout, d, theta_offset=0.0, backend='dense', work_registers=None):
    """
    H layer on I, anc1 <- [I >= d], R_y(theta) on anc2.

    The good branch anc1 = anc2 = 0 then carries probability 1/4 with the
    index uniform over d labels.
    """
    theta = uniform_theta(d) + theta_offset
    anc2 = layout.qubit('anc2', 0)
    marker = XorLoad(('I',), 'anc1', lambda i: (i >= d).astype(np.int64), name="compare[d]")

    program = PreparationProgram(layout, backend=backend, work_registers=work_registers,
                                 zero_registers=('I', 'anc1', 'anc2'))
    program.then("hadamard[I]", lambda s: apply_hadamard_layer(s, 'I'))
    program.then("compare[d]", marker.apply)
    program.then("ry[anc2]", lambda s: apply_ry(s, anc2, theta), lambda s: apply_ry(s, anc2, -theta))
    return program


def _add_index_stage(program, d, theta_offset=0.0):
    """Uniform superposition over d index labels as the first program step."""
    if _is_power_of_two(d):
        low = d.bit_length() - 1
        if low:
            program.then("hadamard[I]", lambda s: apply_hadamard_layer(s, 'I', low))
        return program

    stage = uniform_stage_program(program.layout, d, theta_offset,
                                  program.backend, program.work_registers)
    program.steps.append(amplified_step(stage, GoodSubspace(INDEX_GOOD), 1, name="uniform[I]"))
    return program


def _finish(name, program, good, aa_rounds, data, counts, ratios, target, m, multiplications,
            program_hook):
    if program_hook is not None:
        program_hook(program)

    state = program.run()
    p_raw = success_probability(state, good)
    if p_raw <= SUPPORT_TOL ** 2:
        raise SimulationError(f"{name}: accepted branch has zero probability")

    rounds = _resolve_rounds(aa_rounds, p_raw)
    state = amplify(state, program, good, rounds)
    p_final = success_probability(state, good)

    state, _ = project_and_renormalize(state, good.conditions)
    state = oracle_unload(state, data)

    amplitudes = np.real(register_amplitudes(state, 'I'))[:data.d]
    ratios = np.asarray(ratios, dtype=float)
    error = float(np.max(np.abs(amplitudes * np.sqrt(data.d * p_raw) - ratios)))

    report = PrepReport(
        post_selected_amplitudes=amplitudes.tolist(),
        success_probability_raw=p_raw,
        aa_rounds_used=rounds,
        success_probability_final=p_final,
        multiplication_count=multiplications,
        fidelity_vs_target=min(1.0, fidelity(state, 'I', target)),
        max_componentwise_error=error,
        mode=name,
        m=m,
        backend=program.backend,
        counts=[int(t) for t in counts],
        target_amplitudes=target.tolist(),
    )
    logger.info(f"{name}: d={data.d}, m={m}, p_raw={p_raw:.6f}, rounds={rounds}, "
                f"p_final={p_final:.6f}, max error={error:.3e}")
    return state, report


def _ratio_program(data, thresholds, m, backend):
    layout = _prep_layout(
        data.d,
        [Register('B', data.n)],
        [Register('A', m + data.n, FixedPointFormat(m + data.n, m)), Register('flag', 1)],
        backend,
    )
    program = PreparationProgram(layout, backend=backend, work_registers=('A', 'flag'))
    _add_index_stage(program, data.d)
    program.then("oracle",
                 lambda s: oracle_load(s, data),
                 lambda s: oracle_load(s, data, strict=False))
    program.then("hadamard[A]", lambda s: apply_hadamard_layer(s, 'A', m))
    program.then("multiply", multiply_in_place, uncompute_multiply, kind="multiply")
    program.then("compare", lambda s: compare_flag(s, thresholds))
    program.then("uncompute", uncompute_multiply, multiply_in_place, kind="multiply")
    program.then("hadamard[A]", lambda s: apply_hadamard_layer(s, 'A', m))
    return program


def _good_subspace(d):
    conditions = dict(ACCEPTED)
    if not _is_power_of_two(d):
        conditions.update(INDEX_GOOD)
    return GoodSubspace(conditions)


def prepare_inverse(config, program_hook=None):
    """
    Prepare sum_i (C / alpha_i) |i>, normalized, from the oracle.

    Args:
        config: InversePrepConfig
        program_hook: Optional callable receiving the program before it runs

    Returns:
        (post-selected state, PrepReport)
    """
    data, m = config.data, config.m
    C = config.constant().value
    program = _ratio_program(data, C << m, m, config.backend)
    counts = [counting_oracle_inverse(a, C, m) for a in data.alphas]
    ratios = [C / a for a in data.alphas]
    return _finish("inverse", program, _good_subspace(data.d), config.aa_rounds, data,
                   counts, ratios, classical_target_inverse(data, C), m,
                   program.multiplication_count, program_hook)


def prepare_division(data, betas, m, aa_rounds='auto', backend='dense', program_hook=None):
    """
    Prepare sum_i (beta_i / alpha_i) |i>, normalized, with per-index thresholds.

    Returns:
        (post-selected state, PrepReport)
    """
    if not isinstance(data, OracleData):
        data = OracleData(tuple(data))
    constant = ScalarConstant.for_division(betas, data)
    get_backend(backend)
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m}")

    program = _ratio_program(data, constant.thresholds(m), m, backend)
    counts = [counting_oracle_inverse(a, b, m) for a, b in zip(data.alphas, constant.values)]
    ratios = [b / a for a, b in zip(data.alphas, constant.values)]
    return _finish("division", program, _good_subspace(data.d), aa_rounds, data,
                   counts, ratios, classical_target_division(data, constant.values), m,
                   program.multiplication_count, program_hook)


def prepare_general(data, tables, m=None, aa_rounds='auto', backend='dense', program_hook=None):
    """
    Prepare sum_i f(alpha_i) |i>, normalized, for f given by a FunctionTablePair.

    Args:
        data: OracleData (zero values allowed when f(0) is defined)
        tables: Validated FunctionTablePair
        m: Grid bits (must equal tables.m)
        aa_rounds: 'auto' or a round count
        backend: 'dense' or 'block'
        program_hook: Optional callable receiving the program before it runs

    Returns:
        (post-selected state, PrepReport)
    """
    if not isinstance(data, OracleData):
        data = OracleData(tuple(data), allow_zero=True)
    m = tables.m if m is None else m
    if m != tables.m:
        raise ValidationError(f"tables were built for m={tables.m}, got m={m}")
    if data.n > tables.n:
        raise ValidationError(f"data needs {data.n} bits, tables cover {tables.n}")
    tables.check_data(data)
    get_backend(backend)

    data = OracleData(data.alphas, n=tables.n, allow_zero=True)
    layout = _prep_layout(
        data.d,
        [
            Register('B', tables.n),
            Register('G', tables.g_format.width, tables.g_format),
            Register('Hinv', tables.hinv_format.width, tables.hinv_format),
        ],
        [Register('A', m, FixedPointFormat(m, m)), Register('flag', 1)],
        backend,
    )

    program = PreparationProgram(layout, backend=backend, work_registers=('A', 'flag'))
    _add_index_stage(program, data.d)
    program.then("oracle",
                 lambda s: oracle_load(s, data),
                 lambda s: oracle_load(s, data, strict=False))
    program.then("U_g",
                 lambda s: apply_function_to_register(s, 'B', 'G', tables.g_table),
                 lambda s: apply_function_to_register(s, 'B', 'G', tables.g_table, strict=False),
                 kind="function")
    program.then("hadamard[A]", lambda s: apply_hadamard_layer(s, 'A', m))
    program.then("U_hinv",
                 lambda s: apply_function_to_register(s, 'A', 'Hinv', tables.hinv_table),
                 lambda s: apply_function_to_register(s, 'A', 'Hinv', tables.hinv_table, strict=False),
                 kind="function")
    comparator_kind = "product_compare" if tables.mode is PredicateMode.PRODUCT else "compare"
    program.then("compare", lambda s: compare_general(s, tables.mode), kind=comparator_kind)
    program.then("U_hinv^-1",
                 lambda s: apply_function_to_register(s, 'A', 'Hinv', tables.hinv_table, strict=False),
                 lambda s: apply_function_to_register(s, 'A', 'Hinv', tables.hinv_table),
                 kind="function")
    program.then("hadamard[A]", lambda s: apply_hadamard_layer(s, 'A', m))
    program.then("U_g^-1",
                 lambda s: apply_function_to_register(s, 'B', 'G', tables.g_table, strict=False),
                 lambda s: apply_function_to_register(s, 'B', 'G', tables.g_table),
                 kind="function")

    counts = [counting_oracle_general(a, tables, m) for a in data.alphas]
    ratios = [float(tables.f_value(a)) for a in data.alphas]
    # forming and uncomputing g*h^-1 inside the comparator
    multiplications = 2 * program.count("product_compare")
    state, report = _finish("general", program, _good_subspace(data.d), aa_rounds, data,
                            counts, ratios, classical_target_general(data, tables), m,
                            multiplications, program_hook)
    return state, report


def prepare_uniform(d, backend='dense', theta_offset=0.0):
    """
    Prepare (1/sqrt(d)) sum_{i<d} |i>.

    Powers of two need only a Hadamard layer; any other d uses the comparison
    against d, the calibrated R_y and exactly one amplification round.

    Args:
        d: Dimension (>= 1)
        backend: 'dense' or 'block'
        theta_offset: Error added to the R_y angle

    Returns:
        (post-selected state, PrepReport)
    """
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)) or d < 1:
        raise ValidationError(f"d must be an integer >= 1, got {d!r}")
    d = int(d)
    get_backend(backend)

    layout = _prep_layout(d, [], [], backend)
    if _is_power_of_two(d):
        program = PreparationProgram(layout, backend=backend, work_registers=('I',))
        _add_index_stage(program, d)
        state = program.run()
        p_raw = p_final = 1.0
        rounds = 0
    else:
        program = uniform_stage_program(layout, d, theta_offset, backend, ('anc1', 'anc2'))
        good = GoodSubspace(INDEX_GOOD)
        state = program.run()
        p_raw = success_probability(state, good)
        rounds = 1
        state = amplify(state, program, good, rounds)
        p_final = success_probability(state, good)
        state, _ = project_and_renormalize(state, good.conditions)

    amplitudes = np.real(register_amplitudes(state, 'I'))[:d]
    target = np.full(d, 1.0 / np.sqrt(d))
    report = PrepReport(
        post_selected_amplitudes=amplitudes.tolist(),
        success_probability_raw=p_raw,
        aa_rounds_used=rounds,
        success_probability_final=p_final,
        multiplication_count=0,
        fidelity_vs_target=min(1.0, fidelity(state, 'I', target)),
        max_componentwise_error=float(np.max(np.abs(amplitudes - target))),
        mode="uniform",
        m=0,
        backend=backend,
        counts=[],
        target_amplitudes=target.tolist(),
    )
    logger.info(f"uniform: d={d}, p_raw={p_raw:.6f}, p_final={p_final:.12f}")
    return state, report


def uniform_theta_perturbation(d, eps0):
    """
    Final good probability of prepare_uniform when R_y uses theta - eps0.

    Args:
        d: Dimension with 2**(l-1) < d < 2**l
        eps0: Angle error in [0, 0.2)

    Returns:
        (final probability, lower bound 1 - 16*eps0**2)

    Raises:
        SimulationError: if the final probability falls below the bound
    """
    if d < 3 or _is_power_of_two(d):
        raise ValidationError(f"perturbation analysis needs d strictly between powers of two, got {d}")
    if not 0.0 <= eps0 < 0.2:
        raise ValidationError(f"eps0 must lie in [0, 0.2), got {eps0}")

    _, report = prepare_uniform(d, theta_offset=-eps0)
    probability = report.success_probability_final
    bound = uniform_error_bound(eps0)
    if probability < bound - UNITARY_TOL:
        raise SimulationError(
            f"d={d}, eps0={eps0}: final probability {probability:.12f} below bound {bound:.12f}"
        )
    return probability, bound


def simulate_equivalence_check(config, fault=None):
    """
    Run one configuration on both backends and compare the reports.

    Args:
        config: InversePrepConfig (its backend field is overridden)
        fault: Optional program hook applied to the block run only

    Returns:
        True iff both reports agree within REPORT_TOL
    """
    _, dense = prepare_inverse(replace(config, backend='dense'))
    try:
        _, block = prepare_inverse(replace(config, backend='block'), program_hook=fault)
    except PrepError as e:
        logger.warning(f"block backend run failed: {e}")
        return False

    agree = dense.matches(block, REPORT_TOL)
    if not agree:
        logger.warning(f"backends disagree for alphas={config.data.alphas}, m={config.m}")
    return agree
