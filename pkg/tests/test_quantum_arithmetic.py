import numpy as np
import pytest

from utils.errors import SimulationError, ValidationError
from utils.fixed_point import FixedPointFormat
from utils.quantum_arithmetic import (
    FunctionTablePair,
    OracleData,
    PredicateMode,
    ScalarConstant,
    XorLoad,
    apply_function_to_register,
    builtin_function_tables,
    compare_flag,
    compare_general,
    multiply_in_place,
    multiply_permutation,
    predicate_holds,
    oracle_load,
    oracle_unload,
    register_support,
    uncompute_multiply,
    unmultiply_permutation,
)
from utils.statevector import (
    DenseStatevector,
    Register,
    RegisterLayout,
    apply_hadamard_layer,
    init_basis,
)


def labels_of(state, register):
    return register_support(state, register).tolist()


class TestOracleData:
    def test_width_defaults_to_smallest(self):
        data = OracleData((3, 5))
        assert data.n == 3
        assert data.d == 2

    def test_explicit_width(self):
        assert OracleData((1, 2), n=4).n == 4
        with pytest.raises(ValidationError):
            OracleData((9,), n=3)

    def test_zero_requires_opt_in(self):
        with pytest.raises(ValidationError):
            OracleData((0, 3))
        assert OracleData((0, 3), allow_zero=True).alphas == (0, 3)

    def test_rejects_empty_and_non_integer(self):
        with pytest.raises(ValidationError):
            OracleData(())
        with pytest.raises(ValidationError):
            OracleData((1.5,))
        with pytest.raises(ValidationError):
            OracleData((True,))

    @pytest.mark.parametrize("d,width", [(1, 1), (2, 1), (3, 2), (4, 2), (5, 3), (9, 4)])
    def test_index_width(self, d, width):
        assert OracleData(tuple(range(1, d + 1))).index_width == width

    def test_lookup_is_zero_padded(self):
        assert OracleData((3, 5, 7)).lookup().tolist() == [3, 5, 7, 0]
        assert OracleData((3, 5, 7)).lookup(3).tolist() == [3, 5, 7, 0, 0, 0, 0, 0]
        with pytest.raises(ValidationError):
            OracleData((3, 5, 7)).lookup(1)


class TestScalarConstant:
    def test_inverse_constant_bounds(self):
        data = OracleData((3, 5))
        assert ScalarConstant.for_inverse(3, data).thresholds(4) == 48
        with pytest.raises(ValidationError):
            ScalarConstant.for_inverse(0, data)
        with pytest.raises(ValidationError):
            ScalarConstant.for_inverse(4, data)

    def test_division_betas(self):
        data = OracleData((2, 4))
        assert ScalarConstant.for_division((1, 3), data).thresholds(4) == (16, 48)
        with pytest.raises(ValidationError):
            ScalarConstant.for_division((3, 3), data)
        with pytest.raises(ValidationError):
            ScalarConstant.for_division((0, 3), data)
        with pytest.raises(ValidationError):
            ScalarConstant.for_division((1,), data)

    def test_per_index_has_no_single_value(self):
        with pytest.raises(ValidationError):
            ScalarConstant.for_division((1, 1), OracleData((2, 4))).value


class TestOracle:
    def test_superposed_load(self):
        layout = RegisterLayout.from_widths(I=1, B=3)
        state = apply_hadamard_layer(init_basis(layout), 'I')
        loaded = oracle_load(state, OracleData((3, 5)))
        amps = loaded.amplitudes
        assert amps[layout.index_of({'I': 0, 'B': 3})] == pytest.approx(2 ** -0.5)
        assert amps[layout.index_of({'I': 1, 'B': 5})] == pytest.approx(2 ** -0.5)
        assert loaded.norm() == pytest.approx(1.0)

    def test_single_entry(self):
        layout = RegisterLayout.from_widths(I=1, B=3)
        loaded = oracle_load(init_basis(layout), OracleData((7,)))
        assert labels_of(loaded, 'B') == [7]

    def test_load_twice_restores_zero(self):
        layout = RegisterLayout.from_widths(I=1, B=3)
        data = OracleData((3, 5))
        state = apply_hadamard_layer(init_basis(layout), 'I')
        twice = oracle_unload(oracle_load(state, data), data)
        assert np.array_equal(twice.amplitudes, state.amplitudes)

    def test_wide_index_register(self):
        layout = RegisterLayout.from_widths(I=3, B=3)
        loaded = oracle_load(init_basis(layout, {'I': 2}), OracleData((3, 5, 7)))
        assert labels_of(loaded, 'B') == [7]

    def test_index_beyond_d_rejected(self):
        layout = RegisterLayout.from_widths(I=2, B=3)
        state = apply_hadamard_layer(init_basis(layout), 'I')
        with pytest.raises(ValidationError):
            oracle_load(state, OracleData((1, 2, 3)))

    def test_target_must_be_zero(self):
        layout = RegisterLayout.from_widths(I=1, B=3)
        with pytest.raises(ValidationError):
            oracle_load(init_basis(layout, {'B': 1}), OracleData((3, 5)))

    def test_register_too_narrow(self):
        layout = RegisterLayout.from_widths(I=1, B=2)
        with pytest.raises(ValidationError):
            oracle_load(init_basis(layout), OracleData((3, 5)))

    def test_unload_with_wrong_data(self):
        layout = RegisterLayout.from_widths(I=1, B=3)
        state = apply_hadamard_layer(init_basis(layout), 'I')
        loaded = oracle_load(state, OracleData((3, 5)))
        with pytest.raises(SimulationError):
            oracle_unload(loaded, OracleData((3, 6)))


class TestMultiplier:
    def test_three_times_two(self):
        layout = RegisterLayout.from_widths(B=2, A=4)
        out = multiply_in_place(init_basis(layout, {'B': 3, 'A': 2}))
        assert labels_of(out, 'A') == [6]
        assert labels_of(out, 'B') == [3]

    def test_alpha_one_is_identity(self):
        layout = RegisterLayout.from_widths(B=2, A=4)
        state = apply_hadamard_layer(init_basis(layout, {'B': 1}), 'A', 2)
        assert np.array_equal(multiply_in_place(state).amplitudes, state.amplitudes)

    def test_superposed_multiplicand(self):
        layout = RegisterLayout.from_widths(B=3, A=6)
        state = apply_hadamard_layer(init_basis(layout, {'B': 5}), 'A', 3)
        out = multiply_in_place(state)
        assert labels_of(out, 'A') == [5 * j for j in range(8)]

    def test_zero_multiplier_rejected(self):
        layout = RegisterLayout.from_widths(B=2, A=4)
        with pytest.raises(ValidationError):
            multiply_in_place(init_basis(layout, {'B': 0, 'A': 1}))

    def test_multiplicand_out_of_grid(self):
        layout = RegisterLayout.from_widths(B=2, A=4)
        with pytest.raises(ValidationError):
            multiply_in_place(init_basis(layout, {'B': 1, 'A': 4}))

    def test_uncompute(self):
        layout = RegisterLayout.from_widths(B=2, A=4)
        out = uncompute_multiply(init_basis(layout, {'B': 3, 'A': 6}))
        assert labels_of(out, 'A') == [2]

    def test_uncompute_rejects_non_products(self):
        layout = RegisterLayout.from_widths(B=2, A=4)
        with pytest.raises(SimulationError):
            uncompute_multiply(init_basis(layout, {'B': 3, 'A': 7}))

    def test_round_trip_on_random_state(self):
        layout = RegisterLayout.from_widths(B=2, A=5)
        rng = np.random.default_rng(7)
        amps = np.zeros(layout.dimension, dtype=np.complex128)
        for b in range(1, 4):
            for a in range(8):
                amps[layout.index_of({'B': b, 'A': a})] = rng.normal() + 1j * rng.normal()
        state = DenseStatevector(layout, amps / np.linalg.norm(amps))
        back = uncompute_multiply(multiply_in_place(state))
        assert np.array_equal(back.amplitudes, state.amplitudes)

    def test_injective_for_small_widths(self):
        for n in range(1, 7):
            for m in range(1, 7):
                grid = np.arange(1 << m)
                for alpha in range(1, 1 << n):
                    table = multiply_permutation(alpha, m, m + n).table
                    assert np.array_equal(table[:1 << m], alpha * grid)

    def test_overflow_rejected(self):
        with pytest.raises(ValidationError):
            multiply_permutation(5, 3, 4)

    def test_inverse_table_is_cached(self):
        inverse = unmultiply_permutation(3, 2, 4)
        assert unmultiply_permutation(3, 2, 4) is inverse
        forward = multiply_permutation(3, 2, 4).table
        assert np.array_equal(inverse.table[forward], np.arange(16))


class TestCompareFlag:
    @pytest.mark.parametrize("a,flag", [(5, 0), (6, 1), (15, 1), (0, 0)])
    def test_threshold_six(self, a, flag):
        layout = RegisterLayout.from_widths(A=4, flag=1)
        out = compare_flag(init_basis(layout, {'A': a}), 6)
        assert labels_of(out, 'flag') == [flag]

    @pytest.mark.parametrize("h,flag", [(11, 0), (12, 1), (13, 1)])
    def test_less_than_with_different_points(self, h, flag):
        # g = 3/2 at point 1 against h = h/8 at point 3
        layout = RegisterLayout([
            Register('G', 4, FixedPointFormat(4, 1)),
            Register('Hinv', 4, FixedPointFormat(4, 3)),
            Register('flag', 1),
        ])
        out = compare_general(init_basis(layout, {'G': 3, 'Hinv': h}), PredicateMode.LESS_THAN)
        assert labels_of(out, 'flag') == [flag]

    def test_predicate_on_arrays(self):
        g_format, h_format = FixedPointFormat(4, 1), FixedPointFormat(4, 3)
        holds = predicate_holds(3, np.arange(16), g_format, h_format, PredicateMode.LESS_THAN)
        assert np.flatnonzero(holds).tolist() == list(range(12))

    def test_accepted_count(self):
        layout = RegisterLayout.from_widths(B=2, A=6, flag=1)
        state = apply_hadamard_layer(init_basis(layout, {'B': 3}), 'A', 4)
        out = compare_flag(multiply_in_place(state), 1 << 4)
        assert out.probability({'flag': 0}) * 16 == pytest.approx(6)

    def test_per_index_thresholds(self):
        layout = RegisterLayout.from_widths(I=1, A=4, flag=1)
        first = compare_flag(init_basis(layout, {'I': 0, 'A': 5}), (3, 8))
        second = compare_flag(init_basis(layout, {'I': 1, 'A': 5}), (3, 8))
        assert labels_of(first, 'flag') == [1]
        assert labels_of(second, 'flag') == [0]

    def test_too_many_thresholds(self):
        layout = RegisterLayout.from_widths(I=1, A=4, flag=1)
        with pytest.raises(ValidationError):
            compare_flag(init_basis(layout), (1, 2, 3))

    def test_agrees_with_classical_predicate(self):
        layout = RegisterLayout.from_widths(A=5, flag=1)
        for threshold in (0, 7, 16, 31):
            for a in range(32):
                out = compare_flag(init_basis(layout, {'A': a}), threshold)
                assert labels_of(out, 'flag') == [int(a >= threshold)]


class TestFunctionRegisters:
    def test_square_table(self):
        layout = RegisterLayout.from_widths(x=3, y=6)
        out = apply_function_to_register(init_basis(layout, {'x': 5}), 'x', 'y',
                                         np.arange(8) ** 2)
        assert labels_of(out, 'y') == [25]

    def test_apply_twice_restores(self):
        layout = RegisterLayout.from_widths(x=2, y=3)
        state = apply_hadamard_layer(init_basis(layout), 'x')
        table = np.arange(4) + 1
        once = apply_function_to_register(state, 'x', 'y', table)
        twice = apply_function_to_register(once, 'x', 'y', table, strict=False)
        assert np.array_equal(twice.amplitudes, state.amplitudes)

    def test_overflow_and_dirty_target(self):
        layout = RegisterLayout.from_widths(x=2, y=2)
        with pytest.raises(ValidationError):
            apply_function_to_register(init_basis(layout), 'x', 'y', [0, 1, 4, 9])
        with pytest.raises(ValidationError):
            apply_function_to_register(init_basis(layout, {'y': 1}), 'x', 'y', [0, 1, 2, 3])
        with pytest.raises(ValidationError):
            apply_function_to_register(init_basis(layout), 'x', 'y', [0, 1])

    def test_xor_load_overflow(self):
        layout = RegisterLayout.from_widths(x=3, y=3)
        with pytest.raises(ValidationError):
            XorLoad(('x',), 'y', lambda x: x * 100).apply(init_basis(layout, {'x': 5}))


class TestCompareGeneral:
    def product_layout(self):
        return RegisterLayout([
            Register('G', 3),
            Register('Hinv', 8, FixedPointFormat(8, 8)),
            Register('flag', 1),
        ])

    def test_product_accepted(self):
        # 4 * 49/256 < 1
        state = init_basis(self.product_layout(), {'G': 4, 'Hinv': 49})
        out = compare_general(state, PredicateMode.PRODUCT)
        assert labels_of(out, 'flag') == [0]

    def test_product_boundary_rejected(self):
        state = init_basis(self.product_layout(), {'G': 4, 'Hinv': 64})
        out = compare_general(state, "product_less_than_one")
        assert labels_of(out, 'flag') == [1]

    @pytest.mark.parametrize("g,h,flag", [(5, 2, 0), (2, 5, 1), (3, 3, 1)])
    def test_less_than(self, g, h, flag):
        layout = RegisterLayout.from_widths(G=3, Hinv=3, flag=1)
        out = compare_general(init_basis(layout, {'G': g, 'Hinv': h}), PredicateMode.LESS_THAN)
        assert labels_of(out, 'flag') == [flag]


class TestFunctionTables:
    def test_inv_sqrt_accepted_counts(self):
        assert builtin_function_tables('inv_sqrt_1p', 2, 4).accepted(3).sum() == 8
        assert builtin_function_tables('inv_sqrt_1p', 2, 4).accepted(0).sum() == 16
        assert builtin_function_tables('inv_sqrt_1p', 4, 6).accepted(8).sum() == 22

    def test_inverse_tables_skip_zero(self):
        tables = builtin_function_tables('inverse', 2, 3)
        assert tables.valid_labels == (1, 2, 3)
        with pytest.raises(ValidationError):
            tables.check_data(OracleData((0, 1), allow_zero=True))

    def test_linear_rejects_zero_coefficient(self):
        tables = builtin_function_tables('linear', 2, 4)
        tables.check_data(OracleData((1, 2, 3), n=2))
        with pytest.raises(ValidationError):
            tables.check_data(OracleData((0, 2), n=2, allow_zero=True))

    def test_data_beyond_domain(self):
        with pytest.raises(ValidationError):
            builtin_function_tables('inverse', 2, 3).check_data(OracleData((5,)))

    def test_unknown_builtin(self):
        with pytest.raises(ValidationError):
            builtin_function_tables('sqrt', 2, 3)

    def test_custom_expressions(self):
        tables = FunctionTablePair.from_expressions('1/(1+x)', '1+x', 'y',
                                                    PredicateMode.PRODUCT, n=2, m=3)
        assert tables.valid_labels == (0, 1, 2, 3)
        assert tables.hinv_format.point == 3

    def test_contract_violation(self):
        with pytest.raises(ValidationError, match="alpha=0, y=0.5"):
            FunctionTablePair.from_expressions('1/(2+x)', '1+x', 'y',
                                               PredicateMode.PRODUCT, n=2, m=3)

    @pytest.mark.parametrize("target,g", [('1/(', '1+x'), ('1/(1+x)', '1+')])
    def test_unparsable_expression(self, target, g):
        with pytest.raises(ValidationError):
            FunctionTablePair.from_expressions(target, g, 'y', PredicateMode.PRODUCT, n=2, m=3)

    def test_unparsable_value(self):
        with pytest.raises(ValidationError):
            FunctionTablePair.from_values(['1', '2', '3(', '4'], ['0', '1/2'],
                                          PredicateMode.PRODUCT, '1/(1+x)', n=2, m=1)

    def test_table_sizes_checked(self):
        with pytest.raises(ValidationError):
            FunctionTablePair.from_values([1, 2], [0, 1], PredicateMode.PRODUCT, '1/x', n=2, m=1)
