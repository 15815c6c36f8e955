"""
Reversible fixed-point arithmetic on named registers.

This module provides the data-access oracle, the in-place multiplier and its
uncomputation, the inequality-test comparators and table-driven function
unitaries. Every operation is a bijection on the joint basis labels of the
registers it touches:

1. XOR loads (oracle, function tables, comparators) are involutions by
   construction: dst <- dst ^ fn(src).
2. The multiplier is a per-value permutation table verified on construction.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
import sympy

from utils.config import BLOCK_INDEX_QUBITS, REDUCTION_TOL
from utils.errors import ValidationError, SimulationError
from utils.fixed_point import FixedPointFormat
from utils.statevector import BasisPermutation

logger = logging.getLogger("QuantumArithmetic")

X = sympy.Symbol('x', nonnegative=True)
Y = sympy.Symbol('y', nonnegative=True)


def _as_int(value, what):
    if isinstance(value, bool):
        raise ValidationError(f"{what} must be an integer, got {value!r}")
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise ValidationError(f"{what} must be an integer, got {value!r}")


@dataclass(frozen=True)
class OracleData:
    """
    The classical vector accessed through the oracle |i>|0> -> |i>|alpha_i>.

    Attributes:
        alphas: d non-negative integers, each < 2**n
        n: Bit width of the value register (default: smallest that fits)
        allow_zero: Permit alpha_i = 0 (only meaningful for general f)
    """

    alphas: tuple
    n: int = None
    allow_zero: bool = False

    def __post_init__(self):
        alphas = tuple(_as_int(a, "oracle value") for a in self.alphas)
        if not alphas:
            raise ValidationError("oracle data needs at least one value (d >= 1)")
        if any(a < 0 for a in alphas):
            raise ValidationError(f"oracle values must be non-negative, got {alphas}")
        if not self.allow_zero and any(a == 0 for a in alphas):
            raise ValidationError(
                f"oracle values must be >= 1 (zero has no reciprocal), got {alphas}"
            )

        width = FixedPointFormat.integer(max(alphas)).width
        if self.n is not None:
            n = _as_int(self.n, "n")
            if n < width:
                raise ValidationError(
                    f"n={n} bits cannot hold the largest value {max(alphas)}"
                )
            width = n

        object.__setattr__(self, 'alphas', alphas)
        object.__setattr__(self, 'n', width)

    @property
    def d(self):
        return len(self.alphas)

    @property
    def index_width(self):
        """Width l of the index register, at least one qubit."""
        return max(1, (self.d - 1).bit_length())

    def as_array(self):
        return np.array(self.alphas, dtype=np.int64)

    def lookup(self, index_width=None):
        """Oracle values padded with zeros to 2**index_width entries (default: the minimal width)."""
        width = self.index_width if index_width is None else index_width
        if width < self.index_width:
            raise ValidationError(f"{width} index bits cannot address d={self.d} values")
        table = np.zeros(1 << width, dtype=np.int64)
        table[:self.d] = self.alphas
        return table


@dataclass(frozen=True)
class ScalarConstant:
    """
    Comparator constant: a single C for inverse coefficients or one beta_i
    per index for division.
    """

    values: tuple
    per_index: bool = False

    @classmethod
    def for_inverse(cls, C, data):
        C = _as_int(C, "C")
        alpha_min = min(data.alphas)
        if not 1 <= C <= alpha_min:
            raise ValidationError(f"C must satisfy 1 <= C <= min(alpha)={alpha_min}, got {C}")
        return cls((C,), per_index=False)

    @classmethod
    def for_division(cls, betas, data):
        betas = tuple(_as_int(b, "beta") for b in betas)
        if len(betas) != data.d:
            raise ValidationError(f"expected {data.d} beta values, got {len(betas)}")
        for i, (beta, alpha) in enumerate(zip(betas, data.alphas)):
            if not 1 <= beta <= alpha:
                raise ValidationError(
                    f"beta_{i}={beta} must satisfy 1 <= beta <= alpha_{i}={alpha}"
                )
        return cls(betas, per_index=True)

    @property
    def value(self):
        if self.per_index:
            raise ValidationError("a per-index constant has no single value")
        return self.values[0]

    def thresholds(self, m):
        """
        Integer comparator thresholds with the binary point aligned to m.

        Returns:
            C * 2**m as an int, or a tuple of beta_i * 2**m
        """
        if self.per_index:
            return tuple(b << m for b in self.values)
        return self.values[0] << m


class XorLoad:
    """
    dst <- dst XOR fn(joint label of src registers).

    fn receives an int64 array of joint source labels and returns an int64
    array of values that must fit the destination register.
    """

    def __init__(self, src, dst, fn, name="xor_load"):
        self.src = tuple(src)
        self.dst = dst
        self.fn = fn
        self.name = name

    def apply(self, state):
        layout = state.layout
        dst_width = layout.width(self.dst)
        dst_mask = np.int64((1 << dst_width) - 1)
        registers = self.src + (self.dst,)

        def mapper(joint):
            src_joint = joint >> np.int64(dst_width)
            values = np.asarray(self.fn(src_joint), dtype=np.int64)
            if values.size and (values.min() < 0 or values.max() > dst_mask):
                raise ValidationError(
                    f"{self.name}: value {int(values.max())} overflows "
                    f"register {self.dst} of width {dst_width}"
                )
            return (src_joint << np.int64(dst_width)) | ((joint & dst_mask) ^ values)

        return state.permuted(registers, mapper)


def register_support(state, name):
    """Sorted labels of one register carrying amplitude above the support tolerance."""
    return state.support((name,))


def _require_zero(state, name, what):
    support = register_support(state, name)
    if support.size and np.any(support != 0):
        raise ValidationError(f"{what}: register {name} must be |0>, found labels {support[:8]}")


def oracle_load(state, data, index='I', target='B', strict=True):
    """
    Apply U_o: |i>|b> -> |i>|b XOR alpha_i>.

    Args:
        state: Input state
        data: OracleData
        index: Index register name
        target: Value register name
        strict: Require the value register to start in |0>

    Returns:
        New state
    """
    layout = state.layout
    if layout.width(index) < data.index_width:
        raise ValidationError(
            f"index register {index} has {layout.width(index)} bits, "
            f"{data.index_width} needed for d={data.d}"
        )
    if layout.width(target) < data.n:
        raise ValidationError(
            f"value register {target} has {layout.width(target)} bits, {data.n} needed"
        )

    support = register_support(state, index)
    if support.size and support.max() >= data.d:
        raise ValidationError(
            f"index register {index} has amplitude on label {int(support.max())} >= d={data.d}"
        )
    if strict:
        _require_zero(state, target, "oracle_load")

    table = data.lookup(layout.width(index))
    return XorLoad((index,), target, lambda i: table[i], name="oracle").apply(state)


def oracle_unload(state, data, index='I', target='B'):
    """
    Inverse of oracle_load; the value register must return to |0>.

    Raises:
        SimulationError: if the value register marginal is not |0> within tolerance
    """
    state = oracle_load(state, data, index=index, target=target, strict=False)
    total = state.norm() ** 2
    if total == 0.0:
        raise SimulationError("oracle_unload received a zero state")
    residual = 1.0 - state.probability({target: 0}) / total
    if residual > REDUCTION_TOL:
        raise SimulationError(
            f"register {target} is not |0> after unloading the oracle (residual {residual:.3e})"
        )
    return state


@lru_cache(maxsize=512)
def multiply_permutation(alpha, m, width):
    """
    Verified bijection on a width-bit register for a fixed multiplier alpha.

    Labels j < 2**m map to alpha*j; the remaining labels fill the unused
    slots in increasing order. alpha = 0 gives the identity.

    Args:
        alpha: Multiplier value held in the control register
        m: Bits of the multiplicand grid
        width: Width of the product register

    Returns:
        BasisPermutation over the product register
    """
    size = 1 << width
    if alpha == 0:
        return BasisPermutation(('A',), np.arange(size, dtype=np.int64))
    if alpha * ((1 << m) - 1) >= size:
        raise ValidationError(
            f"product alpha*j with alpha={alpha}, m={m} overflows {width} bits"
        )

    image = alpha * np.arange(1 << m, dtype=np.int64)
    free = np.ones(size, dtype=bool)
    free[image] = False
    table = np.concatenate([image, np.flatnonzero(free).astype(np.int64)])
    return BasisPermutation(('A',), table)


@lru_cache(maxsize=512)
def unmultiply_permutation(alpha, m, width):
    """Inverse of multiply_permutation(alpha, m, width), cached alongside it."""
    return multiply_permutation(alpha, m, width).inverse()


def _multiplier_widths(layout, regB, regA):
    n = layout.width(regB)
    width = layout.width(regA)
    m = width - n
    if m < 1:
        raise ValidationError(
            f"register {regA} must be wider than {regB} (m+n bits), got {width} vs {n}"
        )
    return n, m, width


def _apply_multiplier(state, regB, regA, m, width, inverse):
    mask = np.int64((1 << width) - 1)
    permutation = unmultiply_permutation if inverse else multiply_permutation

    def mapper(joint):
        b = joint >> np.int64(width)
        a = joint & mask
        out = a.copy()
        for alpha in np.unique(b):
            sel = b == alpha
            out[sel] = permutation(int(alpha), m, width).table[a[sel]]
        return (b << np.int64(width)) | out

    return state.permuted((regB, regA), mapper)


def multiply_in_place(state, regB='B', regA='A'):
    """
    |alpha>_B |j>_A -> |alpha>_B |alpha*j>_A with A of width m+n.

    Raises:
        ValidationError: if B carries label 0 or A carries labels >= 2**m
    """
    n, m, width = _multiplier_widths(state.layout, regB, regA)

    b_support = register_support(state, regB)
    if b_support.size and b_support.min() == 0:
        raise ValidationError(f"multiplier register {regB} has support on 0 (not injective)")
    a_support = register_support(state, regA)
    if a_support.size and a_support.max() >= (1 << m):
        raise ValidationError(
            f"register {regA} has support on label {int(a_support.max())} >= 2**{m}"
        )

    logger.debug(f"Multiplying {regA} by {regB} (m={m}, n={n})")
    return _apply_multiplier(state, regB, regA, m, width, inverse=False)


def uncompute_multiply(state, regB='B', regA='A'):
    """
    Exact inverse of multiply_in_place.

    Raises:
        SimulationError: if some A label is not a multiple of its alpha
    """
    n, m, width = _multiplier_widths(state.layout, regB, regA)

    joint = state.support((regB, regA))
    b = joint >> np.int64(width)
    a = joint & np.int64((1 << width) - 1)
    active = b > 0
    bad = active & ((a % np.where(active, b, 1) != 0) | (a // np.where(active, b, 1) >= (1 << m)))
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise SimulationError(
            f"register {regA} label {int(a[k])} is not a product of alpha={int(b[k])} "
            f"and an {m}-bit value"
        )

    return _apply_multiplier(state, regB, regA, m, width, inverse=True)


def compare_flag(state, threshold, regA='A', flag='flag', index='I'):
    """
    flag <- flag XOR [A >= threshold].

    Args:
        state: Input state
        threshold: Integer threshold (C * 2**m), or one threshold per index label
        regA: Compared register
        flag: One-qubit flag register
        index: Index register selecting per-index thresholds

    Returns:
        New state
    """
    if np.ndim(threshold) == 0:
        thr = np.int64(_as_int(threshold, "threshold"))
        return XorLoad(
            (regA,), flag, lambda a: (a >= thr).astype(np.int64), name="compare"
        ).apply(state)

    per_index = np.zeros(1 << state.layout.width(index), dtype=np.int64)
    values = [_as_int(t, "threshold") for t in threshold]
    if len(values) > per_index.size:
        raise ValidationError(
            f"{len(values)} thresholds exceed the {per_index.size} labels of {index}"
        )
    per_index[:len(values)] = values
    a_width = state.layout.width(regA)
    a_mask = np.int64((1 << a_width) - 1)

    def flagged(joint):
        i = joint >> np.int64(a_width)
        return ((joint & a_mask) >= per_index[i]).astype(np.int64)

    return XorLoad((index, regA), flag, flagged, name="compare").apply(state)


def apply_function_to_register(state, src, dst, table, strict=True):
    """
    |x>_src |0>_dst -> |x>_src |table[x]>_dst.

    Args:
        state: Input state
        src: Source register name
        dst: Destination register name
        table: Integer labels, one per source label
        strict: Require dst to start in |0> (off for the uncompute direction)

    Returns:
        New state
    """
    table = np.asarray(table, dtype=np.int64).reshape(-1)
    src_size = 1 << state.layout.width(src)
    if table.size != src_size:
        raise ValidationError(
            f"function table has {table.size} entries, register {src} has {src_size} labels"
        )
    dst_width = state.layout.width(dst)
    if table.min() < 0 or table.max() >= (1 << dst_width):
        raise ValidationError(
            f"function output {int(table.max())} overflows register {dst} of width {dst_width}"
        )
    if strict:
        _require_zero(state, dst, "apply_function_to_register")
    return XorLoad((src,), dst, lambda x: table[x], name=f"U[{src}->{dst}]").apply(state)


class PredicateMode(str, Enum):
    """Inequality accepted by the general comparator."""

    LESS_THAN = "less_than"
    PRODUCT = "product_less_than_one"


def predicate_holds(g_labels, h_labels, g_format, h_format, mode):
    """
    Evaluate the acceptance predicate on integer labels.

    LESS_THAN tests h < g, PRODUCT tests g*h < 1, both on the fixed-point
    values of the labels and computed exactly in integers.
    """
    mode = PredicateMode(mode)
    if g_format.width + h_format.width > BLOCK_INDEX_QUBITS:
        raise ValidationError(
            f"comparand widths {g_format.width}+{h_format.width} exceed int64 arithmetic"
        )
    g = np.asarray(g_labels, dtype=np.int64)
    h = np.asarray(h_labels, dtype=np.int64)
    if mode is PredicateMode.PRODUCT:
        # g*h < 2**(pg+ph) cannot overflow: it has at most wg+wh bits
        return g * h < (np.int64(1) << np.int64(g_format.point + h_format.point))
    common = max(g_format.point, h_format.point)
    return h_format.aligned(h, common) < g_format.aligned(g, common)


def compare_general(state, mode, regG='G', regH='Hinv', flag='flag'):
    """
    flag <- flag XOR [NOT predicate(g, h)], so |0>_flag marks the accepted branch.

    Fixed-point formats of both comparands come from the layout's registers.
    """
    layout = state.layout
    g_format = layout.register(regG).fmt
    h_format = layout.register(regH).fmt
    h_width = layout.width(regH)
    h_mask = np.int64((1 << h_width) - 1)

    def rejected(joint):
        g = joint >> np.int64(h_width)
        h = joint & h_mask
        return (~predicate_holds(g, h, g_format, h_format, mode)).astype(np.int64)

    return XorLoad((regG, regH), flag, rejected, name="compare_general").apply(state)


def _parse_expression(value, what, symbols=None):
    """
    sympify a value or expression, reporting parse failures as ValidationError.

    Plain strings without symbols go through nsimplify so '0.1' stays 1/10.
    """
    try:
        if isinstance(value, str) and symbols is None:
            return sympy.nsimplify(value)
        return sympy.sympify(value, locals=symbols)
    except (sympy.SympifyError, SyntaxError, TypeError) as e:
        raise ValidationError(f"cannot parse {what} {value!r}: {e}")


def _is_dyadic(value):
    return value.is_Rational and (int(value.q) & (int(value.q) - 1)) == 0


def _choose_point(values, fallback):
    """Smallest binary point representing every dyadic value exactly, else the fallback."""
    if all(_is_dyadic(v) for v in values):
        return max(int(v.q).bit_length() - 1 for v in values)
    return fallback


def _encode_values(values, point, what):
    for k, v in enumerate(values):
        if not (v.is_real and v.is_finite) or v < 0:
            raise ValidationError(f"{what}[{k}] = {v} is not a finite non-negative value")
    fmt = FixedPointFormat.fitting(values, point)
    return np.array([fmt.encode(v) for v in values], dtype=np.int64), fmt


@dataclass(eq=False)
class FunctionTablePair:
    """
    Forward table g over the n-bit data labels and backward table h^-1 over
    the m-bit grid y = j / 2**m, tied to a target f by the contract

        predicate(g(alpha), h^-1(j)) holds  <=>  j / 2**m < f(alpha)

    which is checked exhaustively on construction for every label where f is
    a finite non-negative number.
    """

    g_table: np.ndarray
    hinv_table: np.ndarray
    g_format: FixedPointFormat
    hinv_format: FixedPointFormat
    mode: PredicateMode
    target: sympy.Expr
    n: int
    m: int
    name: str = "custom"
    valid_labels: tuple = field(default=(), init=False)

    def __post_init__(self):
        self.mode = PredicateMode(self.mode)
        self.g_table = np.asarray(self.g_table, dtype=np.int64).reshape(-1)
        self.hinv_table = np.asarray(self.hinv_table, dtype=np.int64).reshape(-1)
        if self.g_table.size != (1 << self.n):
            raise ValidationError(f"g table needs {1 << self.n} entries, got {self.g_table.size}")
        if self.hinv_table.size != (1 << self.m):
            raise ValidationError(
                f"h^-1 table needs {1 << self.m} entries, got {self.hinv_table.size}"
            )
        for table, fmt, what in ((self.g_table, self.g_format, "g"),
                                 (self.hinv_table, self.hinv_format, "h^-1")):
            if table.min() < 0 or table.max() >= fmt.size:
                raise ValidationError(f"{what} table values do not fit {fmt}")
        self.target = _parse_expression(self.target, "target f", {'x': X})
        self.valid_labels = tuple(self._check_contract())

    def f_value(self, label):
        """Exact target value f(label) as a sympy number."""
        return sympy.simplify(self.target.subs(X, label))

    def _check_contract(self):
        grid = np.arange(1 << self.m, dtype=np.int64)
        grid_format = FixedPointFormat(self.m, self.m)
        valid = []
        for label in range(1 << self.n):
            f = self.f_value(label)
            if not (f.is_real and f.is_finite) or f < 0:
                continue
            cut = min(1 << self.m, int(sympy.ceiling(f * (1 << self.m))))
            row = predicate_holds(self.g_table[label], self.hinv_table,
                                  self.g_format, self.hinv_format, self.mode)
            expected = grid < cut
            if not np.array_equal(row, expected):
                j = int(np.flatnonzero(row != expected)[0])
                raise ValidationError(
                    f"function tables '{self.name}' violate the contract at alpha={label}, "
                    f"y={grid_format.value(j)}: predicate gives {bool(row[j])}, "
                    f"y < f(alpha)={f} gives {bool(expected[j])}"
                )
            valid.append(label)
        logger.debug(f"Function tables '{self.name}' validated on {len(valid)} labels")
        return valid

    def check_data(self, data):
        """Reject oracle values outside the table domain or with f(alpha) outside (0, 1]."""
        for i, alpha in enumerate(data.alphas):
            if alpha >= (1 << self.n):
                raise ValidationError(f"alpha_{i}={alpha} exceeds the {self.n}-bit table domain")
            f = self.f_value(alpha)
            if alpha not in self.valid_labels or not (0 < f <= 1):
                raise ValidationError(
                    f"f(alpha_{i}) = f({alpha}) = {f} must lie in (0, 1]"
                )

    def accepted(self, alpha):
        """Boolean row of the predicate over the m-bit grid for one data label."""
        return predicate_holds(self.g_table[alpha], self.hinv_table,
                               self.g_format, self.hinv_format, self.mode)

    @classmethod
    def from_values(cls, g_values, hinv_values, mode, target, n, m, name="custom",
                    g_point=None, hinv_point=None):
        """
        Build tables from exact values.

        Args:
            g_values: 2**n numbers, g at each data label
            hinv_values: 2**m numbers, h^-1 at each grid point j / 2**m
            mode: PredicateMode or its string value
            target: sympy expression of f in the symbol x
            n, m: Data and grid widths
            name: Label used in messages and reports
            g_point, hinv_point: Binary points (default: exact if dyadic, else 2m+n)

        Returns:
            Validated FunctionTablePair
        """
        g_values = [_parse_expression(v, "g value") for v in g_values]
        hinv_values = [_parse_expression(v, "h^-1 value") for v in hinv_values]
        fallback = 2 * m + n
        if g_point is None:
            g_point = _choose_point(g_values, fallback)
        if hinv_point is None:
            hinv_point = _choose_point(hinv_values, fallback)

        g_table, g_format = _encode_values(g_values, g_point, "g")
        hinv_table, hinv_format = _encode_values(hinv_values, hinv_point, "h^-1")
        return cls(g_table, hinv_table, g_format, hinv_format, mode,
                   _parse_expression(target, "target f", {'x': X}), n, m, name)

    @classmethod
    def from_expressions(cls, target, g, hinv, mode, n, m, name="custom"):
        """
        Tabulate g(x) over x in [0, 2**n) and h^-1(y) over y = j / 2**m.

        Expressions may be sympy objects or strings in the symbols x and y.
        """
        target = _parse_expression(target, "target f", {'x': X})
        g = _parse_expression(g, "g", {'x': X})
        hinv = _parse_expression(hinv, "h^-1", {'y': Y})
        grid = FixedPointFormat(m, m)
        g_values = [sympy.simplify(g.subs(X, k)) for k in range(1 << n)]
        hinv_values = [sympy.simplify(hinv.subs(Y, grid.rational(j))) for j in range(1 << m)]
        return cls.from_values(g_values, hinv_values, mode, target, n, m, name)


BUILTIN_FUNCTIONS = {
    # name: (f, g, h^-1, predicate)
    'inv_sqrt_1p': (1 / sympy.sqrt(1 + X), 1 + X, Y ** 2, PredicateMode.PRODUCT),
    'inverse': (1 / X, X, Y, PredicateMode.PRODUCT),
    'linear': (None, None, Y, PredicateMode.LESS_THAN),
}


@lru_cache(maxsize=64)
def builtin_function_tables(name, n, m):
    """
    Named table pairs.

    inv_sqrt_1p: f = 1/sqrt(1+x) via g = 1+x, h^-1 = y**2 and g*h^-1 < 1
    inverse:     f = 1/x via g = x, h^-1 = y and g*h^-1 < 1
    linear:      f = x / 2**n via g = x / 2**n, h^-1 = y and h^-1 < g

    Args:
        name: One of BUILTIN_FUNCTIONS
        n: Data label width
        m: Grid width

    Returns:
        FunctionTablePair
    """
    if name not in BUILTIN_FUNCTIONS:
        raise ValidationError(
            f"unknown builtin function {name!r}; choose from {sorted(BUILTIN_FUNCTIONS)}"
        )
    f, g, hinv, mode = BUILTIN_FUNCTIONS[name]
    if name == 'linear':
        f = g = X / (1 << n)
    return FunctionTablePair.from_expressions(f, g, hinv, mode, n, m, name=name)
