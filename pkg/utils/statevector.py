"""
Exact statevector simulation over named multi-register layouts.

Two backends share one interface:

1. DenseStatevector keeps all 2**total_qubits amplitudes in one array.
2. BlockStatevector keeps the state as a set of blocks sum_k |k> (x) phi_k,
   where k runs over the labels of the leading "key" registers that carry
   amplitude and phi_k is dense over the trailing "work" registers only.

Every public operation returns a new state; amplitude arrays are read-only.
Basis permutations move amplitudes without arithmetic, so they are exact.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from utils.config import (
    get_max_qubits,
    BLOCK_INDEX_QUBITS,
    REDUCTION_TOL,
    SUPPORT_TOL,
    PRUNE_TOL,
)
from utils.errors import ValidationError, SimulationError
from utils.fixed_point import FixedPointFormat

logger = logging.getLogger("StateVector")

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)


def ry_matrix(theta):
    """
    Real rotation about the y axis.

    Args:
        theta: Rotation angle in radians

    Returns:
        2x2 matrix mapping |0> to cos(theta/2)|0> + sin(theta/2)|1>
    """
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


@dataclass(frozen=True)
class Register:
    """A named block of qubits with a fixed-point interpretation."""

    name: str
    width: int
    fmt: FixedPointFormat = None

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name.isidentifier():
            raise ValidationError(f"register name must be an identifier, got {self.name!r}")
        if not isinstance(self.width, (int, np.integer)) or self.width < 1:
            raise ValidationError(f"register {self.name} needs width >= 1, got {self.width}")
        if self.fmt is None:
            object.__setattr__(self, 'fmt', FixedPointFormat(int(self.width), 0))
        elif self.fmt.width != self.width:
            raise ValidationError(
                f"register {self.name}: format width {self.fmt.width} != register width {self.width}"
            )


class RegisterLayout:
    """
    Ordered named registers mapped onto global qubit indices.

    The first register holds the most significant bits of the global basis
    index, so a C-ordered reshape of the amplitude array has one axis per
    register in layout order. Global qubit q is bit q of the basis index.
    """

    def __init__(self, registers, max_qubits=None):
        """
        Build a layout.

        Args:
            registers: Iterable of Register or (name, width[, fmt]) tuples
            max_qubits: Qubit cap; defaults to the configured dense budget
        """
        regs = []
        for reg in registers:
            regs.append(reg if isinstance(reg, Register) else Register(*reg))

        if not regs:
            raise ValidationError("a layout needs at least one register")

        names = [r.name for r in regs]
        if len(set(names)) != len(names):
            raise ValidationError(f"register names must be unique, got {names}")

        self.registers = tuple(regs)
        self.total_qubits = sum(r.width for r in regs)
        self.max_qubits = get_max_qubits() if max_qubits is None else int(max_qubits)

        if self.total_qubits > self.max_qubits:
            raise ValidationError(
                f"layout needs {self.total_qubits} qubits, budget is {self.max_qubits}"
            )

        self._position = {r.name: i for i, r in enumerate(regs)}
        self._offset = {}
        offset = 0
        for reg in reversed(regs):
            self._offset[reg.name] = offset
            offset += reg.width

    @classmethod
    def from_widths(cls, max_qubits=None, **widths):
        """Shorthand: RegisterLayout.from_widths(I=2, B=3)."""
        return cls([(name, width) for name, width in widths.items()], max_qubits=max_qubits)

    @property
    def names(self):
        return tuple(r.name for r in self.registers)

    @property
    def dimension(self):
        return 1 << self.total_qubits

    def register(self, name):
        if name not in self._position:
            raise ValidationError(f"unknown register {name!r}; layout has {self.names}")
        return self.registers[self._position[name]]

    def width(self, name):
        return self.register(name).width

    def offset(self, name):
        self.register(name)
        return self._offset[name]

    def qubit(self, name, bit):
        """Global qubit index of local bit `bit` (0 = least significant) of a register."""
        width = self.width(name)
        if not 0 <= bit < width:
            raise ValidationError(f"bit {bit} out of range for register {name} of width {width}")
        return self._offset[name] + bit

    def check_qubit(self, qubit):
        if not 0 <= qubit < self.total_qubits:
            raise ValidationError(
                f"qubit {qubit} out of range for a {self.total_qubits}-qubit layout"
            )

    def check_label(self, name, label):
        width = self.width(name)
        if not 0 <= int(label) < (1 << width):
            raise ValidationError(
                f"label {label} out of range for register {name} of width {width}"
            )

    def index_of(self, assignments):
        """
        Global basis index of a label assignment; unassigned registers are 0.

        Args:
            assignments: Mapping register name -> integer label

        Returns:
            Integer global index
        """
        index = 0
        for name, label in assignments.items():
            self.check_label(name, label)
            index |= int(label) << self._offset[name]
        return index

    def labels(self, indices, name):
        mask = np.int64((1 << self.width(name)) - 1)
        return (np.asarray(indices, dtype=np.int64) >> np.int64(self._offset[name])) & mask

    def joint_size(self, names):
        return 1 << sum(self.width(n) for n in names)

    def joint_labels(self, indices, names):
        """Joint label of the listed registers; the first listed register is most significant."""
        joint = np.zeros(np.shape(indices), dtype=np.int64)
        for name in names:
            joint = (joint << np.int64(self.width(name))) | self.labels(indices, name)
        return joint

    def replace_joint(self, indices, names, joint):
        """Overwrite the listed registers' bits of `indices` with the given joint labels."""
        out = np.asarray(indices, dtype=np.int64).copy()
        joint = np.asarray(joint, dtype=np.int64).copy()
        for name in reversed(tuple(names)):
            width = self.width(name)
            mask = np.int64((1 << width) - 1)
            offset = np.int64(self._offset[name])
            label = joint & mask
            joint >>= np.int64(width)
            out = (out & ~(mask << offset)) | (label << offset)
        return out

    def matches(self, indices, conditions):
        mask = np.ones(np.shape(indices), dtype=bool)
        for name, label in conditions.items():
            self.check_label(name, label)
            mask &= self.labels(indices, name) == int(label)
        return mask

    def trailing_width(self, names):
        """Total width of `names`, which must be the trailing registers in layout order."""
        names = tuple(names)
        if not names or self.names[-len(names):] != names:
            raise ValidationError(
                f"work registers {names} must be the trailing registers of {self.names}"
            )
        return sum(self.width(n) for n in names)

    def __eq__(self, other):
        return (isinstance(other, RegisterLayout) and self.registers == other.registers)

    def __hash__(self):
        return hash(self.registers)

    def __repr__(self):
        body = ", ".join(f"{r.name}:{r.width}" for r in self.registers)
        return f"RegisterLayout({body})"


def _apply_gate(view, matrix):
    # view has shape (..., 2, L): axis -2 is the target qubit
    v0 = view[..., 0, :]
    v1 = view[..., 1, :]
    out = np.empty(view.shape, dtype=np.complex128)
    out[..., 0, :] = matrix[0, 0] * v0 + matrix[0, 1] * v1
    out[..., 1, :] = matrix[1, 0] * v0 + matrix[1, 1] * v1
    return out


def _readonly(array):
    array.flags.writeable = False
    return array


class Statevector(ABC):
    """
    Common interface of the simulation backends.

    Subclasses provide storage, sparse entry access and single-qubit gates;
    probabilities, phase flips, projections, permutations and reductions are
    expressed once here on top of the sparse entries.
    """

    backend = None

    def __init__(self, layout):
        self.layout = layout

    @abstractmethod
    def entries(self):
        """Return (indices, amplitudes) of nonzero amplitudes, indices increasing."""

    @abstractmethod
    def with_entries(self, indices, amplitudes):
        """Build a state of the same backend and layout from sparse entries."""

    @abstractmethod
    def apply_single_qubit(self, qubit, matrix):
        """Apply a 2x2 matrix to global qubit `qubit`."""

    @abstractmethod
    def scaled(self, factor):
        """Multiply every amplitude by `factor`."""

    @abstractmethod
    def to_dense(self):
        """Full amplitude vector (only for layouts inside the dense budget)."""

    def norm(self):
        _, amps = self.entries()
        return float(np.sqrt(np.sum(np.abs(amps) ** 2)))

    def inner(self, other):
        """<self|other> over the shared nonzero entries."""
        if other.layout != self.layout:
            raise ValidationError(f"layouts differ: {self.layout} vs {other.layout}")
        ia, aa = self.entries()
        ib, ab = other.entries()
        _, xa, xb = np.intersect1d(ia, ib, assume_unique=True, return_indices=True)
        return complex(np.sum(np.conj(aa[xa]) * ab[xb]))

    def check_conditions(self, conditions):
        if not conditions:
            raise ValidationError("at least one register condition is required")
        for name, label in conditions.items():
            self.layout.check_label(name, label)

    def probability(self, conditions):
        """Squared amplitude mass on basis states matching every condition."""
        self.check_conditions(conditions)
        idx, amps = self.entries()
        mask = self.layout.matches(idx, conditions)
        return float(np.sum(np.abs(amps[mask]) ** 2))

    def phase_flip(self, conditions, factor=-1.0):
        self.check_conditions(conditions)
        idx, amps = self.entries()
        mask = self.layout.matches(idx, conditions)
        amps = amps.copy()
        amps[mask] *= factor
        return self.with_entries(idx, amps)

    def restrict(self, conditions):
        """Unnormalized projection onto the matching basis states."""
        self.check_conditions(conditions)
        idx, amps = self.entries()
        mask = self.layout.matches(idx, conditions)
        return self.with_entries(idx[mask], amps[mask])

    def permuted(self, registers, mapper):
        """
        Relabel the joint basis labels of `registers` through `mapper`.

        Args:
            registers: Ordered register names
            mapper: Vectorized bijection on joint labels

        Returns:
            New state with amplitudes moved, other registers untouched
        """
        idx, amps = self.entries()
        joint = self.layout.joint_labels(idx, registers)
        new_idx = self.layout.replace_joint(idx, registers, mapper(joint))
        order = np.argsort(new_idx, kind='stable')
        return self.with_entries(new_idx[order], amps[order])

    def support(self, registers, tol=SUPPORT_TOL):
        """Sorted joint labels of `registers` carrying amplitude above `tol`."""
        idx, amps = self.entries()
        keep = np.abs(amps) > tol
        return np.unique(self.layout.joint_labels(idx[keep], registers))

    def register_matrix(self, register):
        """
        Amplitudes arranged as a (register label) x (rest of the system) matrix.

        Only columns of the rest that carry amplitude are materialized.
        """
        idx, amps = self.entries()
        width = self.layout.width(register)
        offset = np.int64(self.layout.offset(register))
        labels = self.layout.labels(idx, register)
        rest = idx & ~(np.int64((1 << width) - 1) << offset)
        columns, inverse = np.unique(rest, return_inverse=True)
        matrix = np.zeros((1 << width, len(columns)), dtype=np.complex128)
        matrix[labels, inverse.reshape(-1)] = amps
        return matrix

    def reduced_density(self, register):
        """Unnormalized reduced density matrix of one register."""
        matrix = self.register_matrix(register)
        return matrix @ matrix.conj().T


class DenseStatevector(Statevector):
    """All 2**total_qubits amplitudes in a single complex128 array."""

    backend = "dense"

    def __init__(self, layout, amplitudes):
        super().__init__(layout)
        budget = get_max_qubits()
        if layout.total_qubits > budget:
            raise ValidationError(
                f"dense backend holds at most {budget} qubits, layout needs {layout.total_qubits}"
            )
        arr = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        if arr.size != layout.dimension:
            raise ValidationError(
                f"expected {layout.dimension} amplitudes for {layout}, got {arr.size}"
            )
        self._amplitudes = _readonly(arr)

    @classmethod
    def basis(cls, layout, index, work_registers=None):
        amps = np.zeros(layout.dimension, dtype=np.complex128)
        amps[index] = 1.0
        return cls(layout, amps)

    @property
    def amplitudes(self):
        return self._amplitudes

    def entries(self):
        idx = np.flatnonzero(self._amplitudes).astype(np.int64)
        return idx, self._amplitudes[idx]

    def with_entries(self, indices, amplitudes):
        amps = np.zeros(self.layout.dimension, dtype=np.complex128)
        amps[np.asarray(indices, dtype=np.int64)] = amplitudes
        return DenseStatevector(self.layout, amps)

    def apply_single_qubit(self, qubit, matrix):
        self.layout.check_qubit(qubit)
        view = self._amplitudes.reshape(-1, 2, 1 << qubit)
        return DenseStatevector(self.layout, _apply_gate(view, matrix))

    def scaled(self, factor):
        return DenseStatevector(self.layout, self._amplitudes * factor)

    def to_dense(self):
        return self._amplitudes.copy()

    def __repr__(self):
        return f"DenseStatevector({self.layout}, norm={self.norm():.12f})"


class BlockStatevector(Statevector):
    """
    Block-structured state: sorted key labels of the leading registers, each
    owning a dense row over the trailing work registers.
    """

    backend = "block"

    def __init__(self, layout, work_registers, keys, blocks):
        super().__init__(layout)
        self.work_registers = tuple(work_registers)
        self.work_qubits = layout.trailing_width(self.work_registers)

        budget = get_max_qubits()
        if self.work_qubits > budget:
            raise ValidationError(
                f"block backend work registers need {self.work_qubits} qubits, budget is {budget}"
            )
        if layout.total_qubits > BLOCK_INDEX_QUBITS:
            raise ValidationError(
                f"block backend addresses at most {BLOCK_INDEX_QUBITS} qubits, "
                f"layout needs {layout.total_qubits}"
            )

        keys = np.array(keys, dtype=np.int64).reshape(-1)
        blocks = np.array(blocks, dtype=np.complex128).reshape(len(keys), 1 << self.work_qubits)
        if len(keys) > 1 and np.any(np.diff(keys) <= 0):
            raise SimulationError("block keys must be strictly increasing")

        self._keys = _readonly(keys)
        self._blocks = _readonly(blocks)

    @classmethod
    def basis(cls, layout, index, work_registers=None):
        if work_registers is None:
            work_registers = (layout.names[-1],)
        width = layout.trailing_width(work_registers)
        row = np.zeros((1, 1 << width), dtype=np.complex128)
        row[0, index & ((1 << width) - 1)] = 1.0
        return cls(layout, work_registers, [index >> width], row)

    @classmethod
    def from_entries(cls, layout, work_registers, indices, amplitudes):
        width = layout.trailing_width(work_registers)
        indices = np.asarray(indices, dtype=np.int64)
        keys = indices >> np.int64(width)
        cols = indices & np.int64((1 << width) - 1)
        uniq, inverse = np.unique(keys, return_inverse=True)
        blocks = np.zeros((len(uniq), 1 << width), dtype=np.complex128)
        blocks[inverse.reshape(-1), cols] = amplitudes
        return cls(layout, work_registers, uniq, blocks)

    @property
    def keys(self):
        return self._keys

    @property
    def blocks(self):
        return self._blocks

    @property
    def num_blocks(self):
        return len(self._keys)

    def entries(self):
        rows, cols = np.nonzero(self._blocks)
        idx = (self._keys[rows] << np.int64(self.work_qubits)) | cols.astype(np.int64)
        return idx, self._blocks[rows, cols]

    def with_entries(self, indices, amplitudes):
        return BlockStatevector.from_entries(
            self.layout, self.work_registers, indices, amplitudes
        )

    def _rows_for(self, query):
        rows = np.zeros((len(query), self._blocks.shape[1]), dtype=np.complex128)
        if self.num_blocks == 0:
            return rows
        pos = np.searchsorted(self._keys, query)
        clipped = np.minimum(pos, self.num_blocks - 1)
        found = (pos < self.num_blocks) & (self._keys[clipped] == query)
        rows[found] = self._blocks[pos[found]]
        return rows

    def _pruned(self, keys, blocks):
        keep = np.max(np.abs(blocks), axis=1) > PRUNE_TOL if len(keys) else np.zeros(0, bool)
        return BlockStatevector(self.layout, self.work_registers, keys[keep], blocks[keep])

    def apply_single_qubit(self, qubit, matrix):
        self.layout.check_qubit(qubit)

        if qubit < self.work_qubits:
            view = self._blocks.reshape(self.num_blocks, -1, 2, 1 << qubit)
            out = _apply_gate(view, matrix).reshape(self.num_blocks, -1)
            return BlockStatevector(self.layout, self.work_registers, self._keys, out)

        # Gate on a key qubit pairs block k with block k ^ (1 << bit)
        bit = np.int64(qubit - self.work_qubits)
        flip = np.int64(1) << bit
        new_keys = np.union1d(self._keys, self._keys ^ flip)
        rows0 = self._rows_for(new_keys & ~flip)
        rows1 = self._rows_for(new_keys | flip)
        is_one = (((new_keys >> bit) & np.int64(1)) == 1)[:, None]
        out = np.where(
            is_one,
            matrix[1, 0] * rows0 + matrix[1, 1] * rows1,
            matrix[0, 0] * rows0 + matrix[0, 1] * rows1,
        )
        return self._pruned(new_keys, out)

    def scaled(self, factor):
        return BlockStatevector(self.layout, self.work_registers, self._keys, self._blocks * factor)

    def to_dense(self):
        budget = get_max_qubits()
        if self.layout.total_qubits > budget:
            raise ValidationError(
                f"cannot densify {self.layout.total_qubits} qubits, budget is {budget}"
            )
        amps = np.zeros(self.layout.dimension, dtype=np.complex128)
        idx, vals = self.entries()
        amps[idx] = vals
        return amps

    def __repr__(self):
        return (f"BlockStatevector({self.layout}, work={self.work_registers}, "
                f"blocks={self.num_blocks}, norm={self.norm():.12f})")


BACKENDS = {
    'dense': DenseStatevector,
    'block': BlockStatevector,
}


def get_backend(name):
    """
    Factory lookup for a simulation backend.

    Args:
        name: 'dense' or 'block'

    Returns:
        Statevector subclass
    """
    if name not in BACKENDS:
        raise ValidationError(f"unknown backend {name!r}; choose from {sorted(BACKENDS)}")
    return BACKENDS[name]


class BasisPermutation:
    """
    A bijection on the joint basis labels of an ordered list of registers,
    verified on construction.
    """

    def __init__(self, registers, table):
        table = np.array(table, dtype=np.int64).reshape(-1)
        size = table.size
        if size == 0 or size & (size - 1):
            raise ValidationError(f"permutation table size must be a power of two, got {size}")
        if np.any(table < 0) or np.any(table >= size) or np.unique(table).size != size:
            raise ValidationError(f"map on {tuple(registers)} is not a bijection")

        self.registers = tuple(registers)
        self.table = _readonly(table)

    @classmethod
    def from_function(cls, registers, size, fn):
        """Tabulate a vectorized label function over range(size)."""
        return cls(registers, fn(np.arange(size, dtype=np.int64)))

    @property
    def size(self):
        return self.table.size

    def inverse(self):
        inv = np.empty_like(self.table)
        inv[self.table] = np.arange(self.size, dtype=np.int64)
        return BasisPermutation(self.registers, inv)

    def check_layout(self, layout):
        expected = layout.joint_size(self.registers)
        if expected != self.size:
            raise ValidationError(
                f"permutation over {self.registers} has {self.size} labels, layout needs {expected}"
            )

    def __call__(self, joint):
        return self.table[joint]


def init_basis(layout, assignments=None, backend="dense", work_registers=None):
    """
    Computational basis state with amplitude 1 on the assigned labels.

    Args:
        layout: RegisterLayout
        assignments: Mapping register -> label; unassigned registers are 0
        backend: 'dense' or 'block'
        work_registers: Trailing registers stored densely by the block backend

    Returns:
        Statevector
    """
    index = layout.index_of(assignments or {})
    return get_backend(backend).basis(layout, index, work_registers)


def apply_hadamard_layer(state, register, low_bits=None):
    """
    Hadamard on each of the low `low_bits` qubits of a register.

    Args:
        state: Input state
        register: Register name
        low_bits: Number of low qubits to target (default: whole register)

    Returns:
        New state
    """
    width = state.layout.width(register)
    if low_bits is None:
        low_bits = width
    if not 0 <= low_bits <= width:
        raise ValidationError(
            f"low_bits={low_bits} out of range for register {register} of width {width}"
        )
    for bit in range(low_bits):
        state = state.apply_single_qubit(state.layout.qubit(register, bit), HADAMARD)
    return state


def apply_ry(state, qubit, theta):
    return state.apply_single_qubit(qubit, ry_matrix(theta))


def apply_basis_permutation(state, registers, mapping):
    """
    Permute the joint labels of `registers`; all other registers are untouched.

    Args:
        state: Input state
        registers: Ordered register names
        mapping: BasisPermutation or a table accepted by BasisPermutation

    Returns:
        New state
    """
    if not isinstance(mapping, BasisPermutation):
        mapping = BasisPermutation(registers, mapping)
    elif mapping.registers != tuple(registers):
        raise ValidationError(
            f"permutation defined on {mapping.registers}, applied to {tuple(registers)}"
        )
    mapping.check_layout(state.layout)
    return state.permuted(mapping.registers, mapping)


def apply_phase_flip(state, conditions):
    """Multiply by -1 every basis state matching all conditions."""
    return state.phase_flip(conditions)


def reflect_about_zero(state, registers=None):
    """Phase flip on the all-zero label of `registers` (default: every register)."""
    names = state.layout.names if registers is None else registers
    return state.phase_flip({name: 0 for name in names})


def project_and_renormalize(state, conditions):
    """
    Exact post-selection onto a measurement outcome.

    Args:
        state: Input state
        conditions: Mapping register -> required label

    Returns:
        (renormalized post-selected state, probability of the outcome)
    """
    probability = state.probability(conditions)
    if probability <= SUPPORT_TOL ** 2:
        raise SimulationError(
            f"post-selection on {dict(conditions)} has zero probability"
        )
    projected = state.restrict(conditions).scaled(1.0 / np.sqrt(probability))
    return projected, probability


def _pure_reduction(state, register):
    """Trace-normalized reduced density matrix, required to be pure."""
    rho = state.reduced_density(register)
    total = float(np.real(np.trace(rho)))
    if total == 0.0:
        raise SimulationError("cannot reduce a zero state")
    rho = rho / total
    purity = float(np.real(np.trace(rho @ rho)))
    if 1.0 - purity > REDUCTION_TOL:
        raise SimulationError(
            f"register {register} is entangled with the rest (purity {purity:.12f})"
        )
    return rho


def fidelity(state, register, reference):
    """
    Squared overlap between a reference vector and the reduced state of a register.

    Args:
        state: State that must be a product of `register` and the rest
        register: Register name
        reference: Complex vector of length <= 2**width (zero padded)

    Returns:
        |<reference|reduced state>|**2 with both normalized
    """
    width = state.layout.width(register)
    ref = np.asarray(reference, dtype=np.complex128).reshape(-1)
    if ref.size > (1 << width):
        raise ValidationError(
            f"reference of length {ref.size} exceeds register {register} dimension {1 << width}"
        )
    ref = np.concatenate([ref, np.zeros((1 << width) - ref.size, dtype=np.complex128)])
    ref_norm = np.linalg.norm(ref)
    if ref_norm == 0.0:
        raise ValidationError("reference vector must be nonzero")
    ref = ref / ref_norm

    rho = _pure_reduction(state, register)
    return float(np.real(ref.conj() @ rho @ ref))


def register_amplitudes(state, register):
    """
    Normalized pure state of a register that is unentangled from the rest.

    The global phase is fixed so the largest component is real and positive.

    Returns:
        Complex vector of length 2**width
    """
    rho = _pure_reduction(state, register)
    # a pure rho = |v><v| has columns v * conj(v_k); take the heaviest one
    column = rho[:, np.argmax(np.real(np.diag(rho)))]
    column = column / np.linalg.norm(column)
    k = np.argmax(np.abs(column))
    return column * (np.abs(column[k]) / column[k])


def sample_outcomes(state, registers, shots, seed=None):
    """
    Draw measurement records of `registers` (demonstration only).

    Args:
        state: Normalized state
        registers: Register names to measure
        shots: Number of samples
        seed: Seed for numpy's default_rng

    Returns:
        Dictionary mapping label tuples to counts
    """
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    idx, amps = state.entries()
    joint = state.layout.joint_labels(idx, registers)
    outcomes, inverse = np.unique(joint, return_inverse=True)
    weights = np.bincount(inverse.reshape(-1), weights=np.abs(amps) ** 2)
    weights = weights / weights.sum()

    rng = np.random.default_rng(seed)
    draws = rng.choice(len(outcomes), size=shots, p=weights)
    counts = np.bincount(draws, minlength=len(outcomes))

    records = {}
    for outcome, count in zip(outcomes, counts):
        if count == 0:
            continue
        labels = []
        remaining = int(outcome)
        for name in reversed(tuple(registers)):
            width = state.layout.width(name)
            labels.append(remaining & ((1 << width) - 1))
            remaining >>= width
        records[tuple(reversed(labels))] = int(count)
    return records
