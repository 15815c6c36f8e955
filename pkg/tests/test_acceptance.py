"""
End-to-end checks of the preparations against independent brute-force counts.
"""

import numpy as np
import pytest

from data.data_generator import OracleDataGenerator
from models.prep_algorithms import (
    InversePrepConfig,
    prepare_division,
    prepare_general,
    prepare_inverse,
    prepare_uniform,
    simulate_equivalence_check,
    uniform_theta_perturbation,
)
from models.resource_estimator import cost_inequality_method, cost_newton_raphson
from utils.amplitude_amplification import amplified_probability
from utils.quantum_arithmetic import OracleData, builtin_function_tables


def brute_force_count(alpha, numerator, m):
    return sum(1 for j in range(2 ** m) if alpha * j < numerator * 2 ** m)


def normalized(values):
    v = np.asarray(values, dtype=float)
    return v / np.linalg.norm(v)


@pytest.fixture(scope="module")
def inverse_suite():
    return OracleDataGenerator(seed=2024).generate_inverse_suite(200, aa_rounds=0, backend='block')


def test_inverse_suite_matches_counts(inverse_suite):
    for config in inverse_suite:
        _, report = prepare_inverse(config)
        counts = [brute_force_count(a, config.C, config.m) for a in config.data.alphas]
        assert report.counts == counts
        assert np.max(np.abs(np.array(report.post_selected_amplitudes) - normalized(counts))) < 1e-10
        assert report.multiplication_count == 2

        ratios = config.C / config.data.as_array()
        assert np.max(np.abs(np.array(counts) / 2 ** config.m - ratios)) < 2.0 ** -config.m
        assert report.max_componentwise_error < 2.0 ** -config.m


def test_error_sweep_for_three_five():
    errors = []
    for m in range(2, 9):
        _, report = prepare_inverse(InversePrepConfig(OracleData((3, 5)), C=1, m=m, aa_rounds=0))
        assert report.max_componentwise_error <= 2.0 ** -m
        errors.append(report.max_componentwise_error)
    assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))


def test_success_probability_identity():
    generator = OracleDataGenerator(seed=77)
    generator.set_parameter_ranges({'d': (2, 5), 'n': (2, 3), 'm': (2, 4)})
    for _ in range(20):
        config = generator.sample_inverse_config(aa_rounds='auto', backend='block')
        _, amplified = prepare_inverse(config)
        _, raw = prepare_inverse(InversePrepConfig(config.data, config.C, config.m,
                                                   aa_rounds=0, backend='block'))

        t = np.array(raw.counts) / 2 ** config.m
        assert raw.success_probability_raw == pytest.approx(np.sum(t ** 2) / config.data.d, abs=1e-10)
        assert amplified.success_probability_final == pytest.approx(
            amplified_probability(amplified.success_probability_raw, amplified.aa_rounds_used),
            abs=1e-10)
        overlap = np.dot(amplified.post_selected_amplitudes, raw.post_selected_amplitudes)
        assert overlap ** 2 >= 1 - 1e-10


@pytest.mark.parametrize("d", [d for d in range(3, 65) if d & (d - 1)])
def test_uniform_for_every_dimension(d):
    _, report = prepare_uniform(d)
    assert report.success_probability_raw == pytest.approx(0.25, abs=1e-12)
    assert report.success_probability_final == pytest.approx(1.0, abs=1e-10)
    assert np.max(np.abs(np.array(report.post_selected_amplitudes) - d ** -0.5)) < 1e-10


@pytest.mark.parametrize("d", [d for d in range(3, 33) if d & (d - 1)])
def test_uniform_angle_robustness(d):
    for eps0 in (1e-3, 1e-2, 5e-2, 1e-1):
        probability, bound = uniform_theta_perturbation(d, eps0)
        assert probability >= 1 - 16 * eps0 ** 2
        assert bound == pytest.approx(1 - 16 * eps0 ** 2)


@pytest.mark.parametrize("m", [4, 6, 8])
def test_inverse_square_root_worked_example(m):
    tables = builtin_function_tables('inv_sqrt_1p', 4, m)
    for alpha in range(16):
        t = int(np.count_nonzero(tables.accepted(alpha)))
        assert t == sum(1 for j in range(2 ** m) if (1 + alpha) * j * j < 4 ** m)
        assert abs(t / 2 ** m - 1 / np.sqrt(1 + alpha)) < 2.0 ** -m

    for alphas in [(3,), (0, 3), (1, 8, 15), (0, 5, 10, 15)]:
        data = OracleData(alphas, n=4, allow_zero=True)
        _, report = prepare_general(data, tables, backend='block')
        assert np.max(np.abs(np.array(report.post_selected_amplitudes)
                             - normalized(report.counts))) < 1e-10


def test_inverse_square_root_exact_half():
    tables = builtin_function_tables('inv_sqrt_1p', 4, 4)
    assert np.count_nonzero(tables.accepted(3)) / 2 ** 4 == 0.5


def test_division_suite():
    for data, betas, m in OracleDataGenerator(seed=99).generate_division_suite(50):
        _, report = prepare_division(data, betas, m, aa_rounds=0, backend='block')
        counts = [brute_force_count(a, b, m) for a, b in zip(data.alphas, betas)]
        assert report.counts == counts
        assert np.max(np.abs(np.array(report.post_selected_amplitudes) - normalized(counts))) < 1e-10
        ratios = np.array(betas) / data.as_array()
        assert np.max(np.abs(np.array(counts) / 2 ** m - ratios)) < 2.0 ** -m


def test_resource_claims():
    assert cost_newton_raphson(2.0 ** -16).multiplications == 16
    for epsilon in [2.0 ** -k for k in range(4, 65)] + [1e-2, 1e-5, 3e-9]:
        assert cost_newton_raphson(epsilon).multiplications > cost_inequality_method().multiplications


def test_backends_agree_on_sample(inverse_suite):
    for config in inverse_suite[::25]:
        assert simulate_equivalence_check(config)


@pytest.mark.slow
def test_backends_agree_on_full_suite(inverse_suite):
    for config in inverse_suite:
        assert simulate_equivalence_check(config)
