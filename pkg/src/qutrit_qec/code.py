"""Nine-qutrit repetition code: encoding, syndrome extraction, location,
correction and decoding.

Qutrits 0-8 form three blocks of three. Each block of a logical basis
state ``|k>_L`` is ``(|000> + w^k |111> + w^2k |222>) / sqrt(3)``.

Recovery is two-stage. Shift errors are flagged by the ``RRR`` stabilizer
of each block and located with pairwise digit-difference measurements;
phase errors are then flagged by the relative stabilizers
``S_ij = XXX_i (XXX_j)^-1``, which equal one on the whole codespace and
pick out the single block whose phase pattern deviates.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    OMEGA,
    OMEGA_LABELS,
    GateOperator,
    ProductOperator,
    ProjectorFamily,
    QutritRegister,
    apply_gate,
    eigenprojectors_order3,
    enumerate_branches,
    make_register,
    measure,
    omega_power,
    superpose,
)
from .gates import GateName, binary_not, build

N_QUTRITS = 9
BLOCKS = ((0, 1, 2), (3, 4, 5), (6, 7, 8))
PAIRS = ((0, 1), (0, 2), (1, 2))

_LETTERS = {"R": build(GateName.GenR), "X": build(GateName.GenX), "Y": build(GateName.X2)}
# shift s on the deviant qutrit is undone by X^-s
_UNSHIFT = {1: build(GateName.X2), 2: build(GateName.X1)}
# phase power v on a block is undone by R^-v
_UNPHASE = {1: build(GateName.R2), 2: build(GateName.R1)}


class UncorrectableError(Exception):
    """Syndrome is not explained by any single-qutrit error."""


@dataclass(frozen=True)
class LogicalQutrit:
    alpha: complex
    beta: complex
    gamma: complex

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma], dtype=complex)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "LogicalQutrit":
        v = rng.normal(size=3) + 1j * rng.normal(size=3)
        v /= np.linalg.norm(v)
        return cls(*(complex(x) for x in v))


class StabilizerId(str, enum.Enum):
    R_BLOCK0 = "RRRIIIIII"
    R_BLOCK1 = "IIIRRRIII"
    R_BLOCK2 = "IIIIIIRRR"
    X_BLOCK0 = "XXXIIIIII"
    X_BLOCK1 = "IIIXXXIII"
    X_BLOCK2 = "IIIIIIXXX"
    S01 = "XXXYYYIII"
    S02 = "XXXIIIYYY"
    S12 = "IIIXXXYYY"

    def operator(self) -> ProductOperator:
        """The 9-qutrit product operator; ``Y`` stands for ``X^-1``."""
        return ProductOperator.from_string(self.value, _LETTERS)


SHIFT_STABILIZERS = (StabilizerId.R_BLOCK0, StabilizerId.R_BLOCK1, StabilizerId.R_BLOCK2)
PHASE_STABILIZERS = (StabilizerId.X_BLOCK0, StabilizerId.X_BLOCK1, StabilizerId.X_BLOCK2)
RELATIVE_STABILIZERS = {(0, 1): StabilizerId.S01, (0, 2): StabilizerId.S02, (1, 2): StabilizerId.S12}


@functools.lru_cache(maxsize=None)
def _family(sid: StabilizerId) -> ProjectorFamily:
    return eigenprojectors_order3(sid.operator())


@functools.lru_cache(maxsize=None)
def _difference_family(i: int, j: int, n: int) -> ProjectorFamily:
    # R_i R_j^-1 has eigenvalue w^(d_i - d_j); label "w^k" <-> difference k
    op = ProductOperator(n, ((i, build(GateName.GenR)), (j, build(GateName.R2))), f"R{i}R{j}^-1")
    return eigenprojectors_order3(op)


def block_state(k: int) -> np.ndarray:
    """``(|000> + w^k|111> + w^2k|222>) / sqrt(3)`` as a length-27 vector."""
    v = np.zeros(27, dtype=complex)
    for j in range(3):
        v[13 * j] = OMEGA ** (j * k)
    return v / np.sqrt(3)


@functools.lru_cache(maxsize=None)
def logical_basis() -> np.ndarray:
    """Rows are ``|0>_L``, ``|1>_L``, ``|2>_L``."""
    rows = []
    for k in range(3):
        b = block_state(k)
        rows.append(np.kron(np.kron(b, b), b))
    basis = np.array(rows)
    basis.flags.writeable = False
    return basis


@functools.lru_cache(maxsize=None)
def _logical_bras() -> np.ndarray:
    return np.ascontiguousarray(logical_basis().conj())


def encode(q: LogicalQutrit) -> QutritRegister:
    if abs(q.norm() - 1.0) > 1e-9:
        raise ValueError(f"logical amplitudes are not normalized (norm {q.norm():.12f})")
    return QutritRegister(N_QUTRITS, q.vector @ logical_basis())


def decode(state: QutritRegister, strict: bool = False) -> tuple[LogicalQutrit, float]:
    """Project onto the codespace.

    Returns the (unnormalized) logical coefficients and the norm of the
    component outside the codespace. With ``strict=True`` a residual above
    0.5 raises :class:`UncorrectableError`.
    """
    if state.n != N_QUTRITS:
        raise ValueError(f"expected a {N_QUTRITS}-qutrit register")
    coeffs = _logical_bras() @ state.amplitudes
    inside = float(np.vdot(coeffs, coeffs).real)
    residual = float(np.sqrt(max(0.0, 1.0 - inside)))
    if strict and residual > 0.5:
        raise UncorrectableError(f"state lies mostly outside the codespace (residual {residual:.3f})")
    return LogicalQutrit(*(complex(c) for c in coeffs)), residual


def measure_stabilizer(state: QutritRegister, sid: StabilizerId, rng) -> tuple[str, QutritRegister]:
    """Measure a stabilizer; the label is ``"1"``, ``"w"`` or ``"w2"``."""
    if state.n != N_QUTRITS:
        raise ValueError(f"expected a {N_QUTRITS}-qutrit register")
    return measure(state, _family(StabilizerId(sid)), rng)


# ---------------------------------------------------------------------------
# Comparison circuits


COMPARISON_TABLE = {
    (0, 0): (0, 0), (0, 1): (1, 0), (0, 2): (0, 1),
    (1, 0): (1, 0), (1, 1): (0, 0), (1, 2): (1, 1),
    (2, 0): (0, 1), (2, 1): (1, 1), (2, 2): (0, 0),
}


@dataclass(frozen=True)
class ComparisonOutcome:
    """Either the two comparison bits or a coherent digit difference."""

    bits: tuple[int, int] | None = None
    difference: int | None = None

    @property
    def equal(self) -> bool:
        if self.bits is not None:
            return self.bits == (0, 0)
        return self.difference == 0


def compare_truth_table(state: QutritRegister, qi: int, qj: int, ancillas: tuple[int, int],
                        rng) -> tuple[ComparisonOutcome, QutritRegister]:
    """Two-ancilla equality check of qutrits ``qi`` and ``qj``.

    The first ancilla is flipped once for every compared qutrit holding 1,
    the second once for every compared qutrit holding 2; both ancillas are
    then measured. Ancillas must start inside the binary ``{0, 1}`` subspace.
    """
    a0, a1 = ancillas
    digits = np.indices((3,) * state.n).reshape(state.n, -1)
    for a in ancillas:
        if np.any(np.abs(state.amplitudes[digits[a] == 2]) > 1e-12):
            raise ValueError(f"ancilla {a} has support outside the binary subspace")
    for q in (qi, qj):
        state = apply_gate(state, binary_not(1), [q, a0])
        state = apply_gate(state, binary_not(2), [q, a1])
    b0, state = measure(state, ProjectorFamily.computational(state.n, a0, (0, 1)), rng)
    b1, state = measure(state, ProjectorFamily.computational(state.n, a1, (0, 1)), rng)
    return ComparisonOutcome(bits=(int(b0), int(b1))), state


def truth_table_rows(rng=None) -> list[tuple[int, int, tuple[int, int]]]:
    """Run the comparison circuit on every basis pair ``|q0 q1>|00>``."""
    rng = rng if rng is not None else np.random.default_rng(0)
    rows = []
    for x in range(3):
        for y in range(3):
            state = make_register(4, f"{x}{y}00")
            outcome, _ = compare_truth_table(state, 0, 1, (2, 3), rng)
            rows.append((x, y, outcome.bits))
    return rows


@dataclass(frozen=True)
class BlockComparison:
    """Result of the three-qutrit comparison with four binary ancillas."""

    bits: tuple[int, int, int, int]
    deviant: int | None
    uncorrectable: bool


def compare_block(block: QutritRegister, rng) -> BlockComparison:
    """Compare qutrit 0 with qutrits 1 and 2 of a three-qutrit register.

    Appends four ancillas (positions 3-6), runs the two pairwise comparisons
    and applies the agreement rule: both mismatched -> qutrit 0, only the
    first -> qutrit 1, only the second -> qutrit 2.
    """
    if block.n != 3:
        raise ValueError("expected a 3-qutrit register")
    state = block.kron(make_register(4, "0000"))
    first, state = compare_truth_table(state, 0, 1, (3, 4), rng)
    second, state = compare_truth_table(state, 0, 2, (5, 6), rng)
    bits = first.bits + second.bits
    if first.equal and second.equal:
        return BlockComparison(bits, None, False)
    if not first.equal and not second.equal:
        # bits name the unordered digit pair: equal bits mean qutrits 1 and 2 agree
        if first.bits != second.bits:
            return BlockComparison(bits, None, True)
        return BlockComparison(bits, 0, False)
    return BlockComparison(bits, 1 if not first.equal else 2, False)


def compare_difference(state: QutritRegister, qi: int, qj: int, rng) -> tuple[ComparisonOutcome, QutritRegister]:
    """Measure ``(digit_i - digit_j) mod 3`` without learning the digits themselves."""
    label, state = measure(state, _difference_family(qi, qj, state.n), rng)
    return ComparisonOutcome(difference=omega_power(label)), state


# ---------------------------------------------------------------------------
# Correction stages


@dataclass(frozen=True)
class ShiftRecord:
    block: int
    index: int | None
    shift: int
    differences: tuple[int, int]
    correction: str | None
    uncorrectable: bool = False

    @property
    def position(self) -> int | None:
        return None if self.index is None else 3 * self.block + self.index


def locate_shift(d01: int, d02: int) -> tuple[int | None, int]:
    """Deviant in-block index and its shift, from the two differences.

    ``d01 = digit0 - digit1`` and ``d02 = digit0 - digit2`` (mod 3). Raises
    :class:`UncorrectableError` when all three digits differ.
    """
    if d01 == 0 and d02 == 0:
        return None, 0
    if d01 and d02:
        if d01 != d02:
            raise UncorrectableError("all three qutrits of the block differ")
        return 0, d01
    if d01:
        return 1, (-d01) % 3
    return 2, (-d02) % 3


def locate_and_correct_shift(state: QutritRegister, block: int, rng,
                             eigenvalue: str | None = None) -> tuple[QutritRegister, ShiftRecord]:
    """Find and undo a single shift error inside ``block``.

    ``eigenvalue`` is the block's ``RRR`` outcome if already measured; a
    located shift that disagrees with it is reported as uncorrectable, as is
    a block whose three digits all differ. Uncorrectable blocks are left as
    they are.
    """
    b0, b1, b2 = BLOCKS[block]
    first, state = compare_difference(state, b0, b1, rng)
    second, state = compare_difference(state, b0, b2, rng)
    diffs = (first.difference, second.difference)
    try:
        index, shift = locate_shift(*diffs)
        if eigenvalue is not None and omega_power(eigenvalue) != shift:
            raise UncorrectableError("comparisons disagree with the block stabilizer")
    except UncorrectableError:
        return state, ShiftRecord(block, None, 0, diffs, None, uncorrectable=True)
    if index is None:
        return state, ShiftRecord(block, None, 0, diffs, None)
    gate = _UNSHIFT[shift]
    state = apply_gate(state, gate, [BLOCKS[block][index]])
    return state, ShiftRecord(block, index, shift, diffs, gate.label)


@dataclass(frozen=True)
class PhaseRecord:
    eigenvalues: dict
    block: int | None
    power: int
    correction: str | None
    uncorrectable: bool = False


def _phase_pattern(block: int, power: int) -> dict:
    v = [0, 0, 0]
    v[block] = power
    # S_ij eigenvalue exponent is v_j - v_i
    return {pair: (v[pair[1]] - v[pair[0]]) % 3 for pair in PAIRS}


def locate_phase(exponents: dict) -> tuple[int | None, int]:
    """Deviant block and phase power from the ``S_ij`` eigenvalue exponents."""
    if all(e == 0 for e in exponents.values()):
        return None, 0
    for block in range(3):
        for power in (1, 2):
            if _phase_pattern(block, power) == exponents:
                return block, power
    raise UncorrectableError(f"phase syndrome {exponents} matches no single block")


def correct_phase(state: QutritRegister, rng) -> tuple[QutritRegister, PhaseRecord]:
    """Measure the relative stabilizers and undo a single-block phase deviation."""
    labels = {}
    for pair in PAIRS:
        labels[pair], state = measure_stabilizer(state, RELATIVE_STABILIZERS[pair], rng)
    exponents = {pair: omega_power(lab) for pair, lab in labels.items()}
    names = {f"S{i}{j}": lab for (i, j), lab in labels.items()}
    try:
        block, power = locate_phase(exponents)
    except UncorrectableError:
        return state, PhaseRecord(names, None, 0, None, uncorrectable=True)
    if block is None:
        return state, PhaseRecord(names, None, 0, None)
    gate = _UNPHASE[power]
    state = apply_gate(state, gate, [BLOCKS[block][0]])
    return state, PhaseRecord(names, block, power, gate.label)


# ---------------------------------------------------------------------------
# Pipeline


@dataclass(frozen=True)
class Syndrome:
    shift_block_eigenvalues: tuple[str, str, str]
    located_positions: tuple[ShiftRecord, ...]
    phase_block_eigenvalues: dict

    def is_trivial(self) -> bool:
        return (all(e == "1" for e in self.shift_block_eigenvalues)
                and not self.located_positions
                and all(e == "1" for e in self.phase_block_eigenvalues.values()))


@dataclass(frozen=True)
class TrialReport:
    logical_in: LogicalQutrit
    errors: tuple[tuple[int, str], ...]
    syndrome: Syndrome
    corrections: tuple[tuple[int, str], ...]
    logical_out: LogicalQutrit
    residual: float
    fidelity: float
    uncorrectable: bool
    final_state: QutritRegister | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        def cx(z):
            return [float(z.real), float(z.imag)]

        def lq(q):
            return [cx(q.alpha), cx(q.beta), cx(q.gamma)]

        return {
            "logical_in": lq(self.logical_in),
            "errors": [{"position": p, "error": lab} for p, lab in self.errors],
            "syndrome": {
                "shift_block_eigenvalues": list(self.syndrome.shift_block_eigenvalues),
                "located": [
                    {"block": r.block, "index": r.index, "shift": r.shift,
                     "differences": list(r.differences), "uncorrectable": r.uncorrectable}
                    for r in self.syndrome.located_positions
                ],
                "phase_block_eigenvalues": dict(self.syndrome.phase_block_eigenvalues),
            },
            "corrections": [{"position": p, "gate": g} for p, g in self.corrections],
            "logical_out": lq(self.logical_out),
            "residual": self.residual,
            "fidelity": self.fidelity,
            "uncorrectable": self.uncorrectable,
        }


def inject(state: QutritRegister, errors: Sequence[tuple[int, GateOperator]]) -> QutritRegister:
    for pos, gate in errors:
        state = apply_gate(state, gate, [pos])
    return state


def run_pipeline(q: LogicalQutrit, errors: Sequence[tuple[int, GateOperator]], rng) -> TrialReport:
    """Encode, inject, extract syndromes, correct, decode.

    Uncorrectable syndromes are recorded in the report rather than raised.
    """
    clean = encode(q)
    state = inject(clean, errors)

    shift_labels = []
    for sid in SHIFT_STABILIZERS:
        lab, state = measure_stabilizer(state, sid, rng)
        shift_labels.append(lab)

    records, corrections = [], []
    uncorrectable = False
    # every block is compared, so a block with two cancelling shifts is still caught
    for block in range(3):
        state, rec = locate_and_correct_shift(state, block, rng, shift_labels[block])
        if rec.uncorrectable or rec.index is not None:
            records.append(rec)
        if rec.correction:
            corrections.append((rec.position, rec.correction))
        uncorrectable |= rec.uncorrectable

    state, phase = correct_phase(state, rng)
    if phase.correction:
        corrections.append((BLOCKS[phase.block][0], phase.correction))
    uncorrectable |= phase.uncorrectable

    out, residual = decode(state)
    fid = float(min(1.0, abs(np.vdot(q.vector, out.vector))))
    syndrome = Syndrome(tuple(shift_labels), tuple(records), phase.eigenvalues)
    return TrialReport(q, tuple((p, g.label) for p, g in errors), syndrome, tuple(corrections),
                       out, residual, fid, uncorrectable, state)


def pipeline_branches(q: LogicalQutrit, errors: Sequence[tuple[int, GateOperator]]) -> list[tuple[float, TrialReport]]:
    """Every measurement branch of :func:`run_pipeline` with its probability."""
    return enumerate_branches(lambda script: run_pipeline(q, errors, script))


# ---------------------------------------------------------------------------
# Stabilizer eigenvalue table


STABILIZER_TABLE = (
    ("|000>+|111>+|222>", ((1, "000"), (1, "111"), (1, "222")), "1", "1"),
    ("|200>+|011>+|122>", ((1, "200"), (1, "011"), (1, "122")), "w2", None),
    ("|020>+|101>+|212>", ((1, "020"), (1, "101"), (1, "212")), "w2", None),
    ("|002>+|110>+|221>", ((1, "002"), (1, "110"), (1, "221")), "w2", None),
    ("|100>+|211>+|022>", ((1, "100"), (1, "211"), (1, "022")), "w", None),
    ("|010>+|121>+|202>", ((1, "010"), (1, "121"), (1, "202")), "w", None),
    ("|001>+|112>+|220>", ((1, "001"), (1, "112"), (1, "220")), "w", None),
    ("|000>+w|111>+w2|222>", ((1, "000"), (OMEGA, "111"), (OMEGA**2, "222")), None, "w2"),
    ("|000>+w2|111>+w|222>", ((1, "000"), (OMEGA**2, "111"), (OMEGA, "222")), None, "w"),
)


@dataclass(frozen=True)
class TableRow:
    state: str
    expected: tuple[str | None, str | None]
    measured: tuple[str | None, str | None]
    deterministic: bool

    @property
    def matched(self) -> bool:
        return self.deterministic and self.expected == self.measured


def embed_block(terms) -> QutritRegister:
    """A 3-qutrit block state placed in block 0, blocks 1 and 2 clean."""
    block = superpose(terms)
    clean = QutritRegister(3, block_state(0))
    return block.kron(clean).kron(clean)


def stabilizer_table_rows() -> list[TableRow]:
    rows = []
    for name, terms, exp_r, exp_x in STABILIZER_TABLE:
        state = embed_block(terms)
        measured, deterministic = [], True
        for sid, expected in ((StabilizerId.R_BLOCK0, exp_r), (StabilizerId.X_BLOCK0, exp_x)):
            if expected is None:
                measured.append(None)
                continue
            probs = _family(sid).probabilities(state.amplitudes)
            k = int(np.argmax(probs))
            deterministic &= bool(abs(probs[k] - 1.0) < 1e-12)
            measured.append(OMEGA_LABELS[k])
        rows.append(TableRow(name, (exp_r, exp_x), tuple(measured), deterministic))
    return rows
