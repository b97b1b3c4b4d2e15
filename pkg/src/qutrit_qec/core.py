"""Dense state-vector machinery for registers of qutrits.

Basis states are indexed by base-3 digit strings with qutrit 0 as the most
significant digit, so ``|201>`` on three qutrits is amplitude index 19.

Gates are applied by contracting the gate tensor against the reshaped
``(3,) * n`` amplitude tensor at the target axes; no ``3**n x 3**n`` matrix
is ever built. Randomness is never global: every sampling routine takes an
explicit ``numpy.random.Generator`` (or a :class:`BranchScript` when all
measurement branches have to be walked deterministically).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

OMEGA = np.exp(2j * np.pi / 3)
OMEGA_LABELS = ("1", "w", "w2")

MAX_QUTRITS = 12
UNITARY_TOL = 1e-10
NORM_TOL = 1e-9
MIN_PROBABILITY = 1e-12
_DENSE_LIMIT = 3**6
# row k combines (v, Mv, M^2 v) into the eigenvalue-w^k component
_DFT3 = np.array([[OMEGA ** (-k * j) for j in range(3)] for k in range(3)]) / 3


def omega_power(label: str) -> int:
    """Exponent ``k`` such that the eigenvalue labelled ``label`` is ``w**k``."""
    try:
        return OMEGA_LABELS.index(label)
    except ValueError:
        raise ValueError(f"not an eigenvalue label: {label!r}") from None


@dataclass(frozen=True, eq=False)
class QutritRegister:
    """Normalized pure state of ``n`` qutrits."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 3**self.n:
            raise ValueError(f"expected {3**self.n} amplitudes for n={self.n}, got {amps.size}")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"register is not normalized (squared norm {norm:.3e})")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "QutritRegister":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log(amps.size) / np.log(3)))
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(n, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((3,) * self.n)

    def kron(self, other: "QutritRegister") -> "QutritRegister":
        """Register for ``self (x) other``; ``other``'s qutrits follow ours."""
        return QutritRegister(self.n + other.n, np.kron(self.amplitudes, other.amplitudes))

    def probability_of(self, basis_index: str) -> float:
        return abs(self.amplitudes[basis_to_index(basis_index)]) ** 2


def basis_to_index(digits: str) -> int:
    index = 0
    for ch in digits:
        if ch not in "012":
            raise ValueError(f"basis digit {ch!r} outside {{0,1,2}}")
        index = 3 * index + int(ch)
    return index


def index_to_basis(index: int, n: int) -> str:
    digits = []
    for _ in range(n):
        index, r = divmod(index, 3)
        digits.append(str(r))
    return "".join(reversed(digits))


def make_register(n: int, basis_index: str) -> QutritRegister:
    """Computational basis state ``|basis_index>`` on ``n`` qutrits."""
    if not 1 <= n <= MAX_QUTRITS:
        raise ValueError(f"n must lie in [1, {MAX_QUTRITS}], got {n}")
    if len(basis_index) != n:
        raise ValueError(f"basis string {basis_index!r} does not have {n} digits")
    amps = np.zeros(3**n, dtype=complex)
    amps[basis_to_index(basis_index)] = 1.0
    return QutritRegister(n, amps)


def superpose(terms: Iterable[tuple[complex, str]]) -> QutritRegister:
    """Normalized ``sum c |digits>``; all digit strings must have equal length."""
    terms = list(terms)
    n = len(terms[0][1])
    amps = np.zeros(3**n, dtype=complex)
    for coeff, digits in terms:
        if len(digits) != n:
            raise ValueError("basis strings of unequal length")
        amps[basis_to_index(digits)] += coeff
    return QutritRegister(n, amps / np.linalg.norm(amps))


@dataclass(frozen=True, eq=False)
class GateOperator:
    """Square matrix of dimension ``3**arity`` with a display label.

    Non-unitary matrices are representable (error-model analysis needs them)
    but :func:`apply_gate` refuses them.
    """

    matrix: np.ndarray
    label: str = ""
    arity: int = field(init=False)
    unitary: bool = field(init=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"gate matrix must be square, got shape {m.shape}")
        arity = int(round(np.log(m.shape[0]) / np.log(3)))
        if 3**arity != m.shape[0] or arity < 1:
            raise ValueError(f"gate dimension {m.shape[0]} is not a power of 3")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "arity", arity)
        dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        object.__setattr__(self, "unitary", bool(dev <= UNITARY_TOL))

    def __matmul__(self, other: "GateOperator") -> "GateOperator":
        return GateOperator(self.matrix @ other.matrix, f"{self.label}.{other.label}")

    def dagger(self) -> "GateOperator":
        return GateOperator(self.matrix.conj().T, f"{self.label}^dag")

    def power(self, k: int) -> "GateOperator":
        return GateOperator(np.linalg.matrix_power(self.matrix, k), f"{self.label}^{k}")

    def is_diagonal(self, tol: float = UNITARY_TOL) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.max(np.abs(off)) <= tol)


def _apply_matrix(amps: np.ndarray, matrix: np.ndarray, positions: Sequence[int], n: int) -> np.ndarray:
    k = len(positions)
    psi = amps.reshape((3,) * n)
    op = matrix.reshape((3,) * (2 * k))
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), list(positions)))
    out = np.moveaxis(out, list(range(k)), list(positions))
    return np.ascontiguousarray(out).reshape(-1)


def _check_positions(positions: Sequence[int], arity: int, n: int) -> None:
    if len(positions) != arity:
        raise ValueError(f"gate of arity {arity} given {len(positions)} positions")
    if len(set(positions)) != len(positions):
        raise ValueError(f"repeated position in {list(positions)}")
    for p in positions:
        if not 0 <= p < n:
            raise ValueError(f"position {p} out of range for {n} qutrits")


def apply_gate(state: QutritRegister, gate: GateOperator, positions: Sequence[int]) -> QutritRegister:
    """Apply ``gate`` at ``positions`` (identity elsewhere)."""
    positions = list(positions)
    _check_positions(positions, gate.arity, state.n)
    if not gate.unitary:
        raise ValueError(f"gate {gate.label!r} is not unitary and cannot act on a register")
    return QutritRegister(state.n, _apply_matrix(state.amplitudes, gate.matrix, positions, state.n))


def fidelity(a: QutritRegister, b: QutritRegister) -> float:
    """``|<a|b>|``, clipped to ``[0, 1]``."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes))))


@dataclass(frozen=True, eq=False)
class ProductOperator:
    """Tensor product of single-qutrit gates placed on an ``n``-qutrit register.

    Used for multi-qutrit observables such as ``RRRIIIIII`` whose dense form
    would be far too large.
    """

    n: int
    factors: tuple[tuple[int, GateOperator], ...]
    label: str = ""

    def __post_init__(self):
        positions = [p for p, _ in self.factors]
        if len(set(positions)) != len(positions):
            raise ValueError("repeated position in product operator")
        for p, g in self.factors:
            if g.arity != 1 or not 0 <= p < self.n:
                raise ValueError(f"bad factor at position {p}")

    @classmethod
    def from_string(cls, word: str, letters: dict[str, GateOperator]) -> "ProductOperator":
        """``"RRRIIIIII"``-style constructor; ``I`` entries are skipped."""
        factors = tuple((i, letters[ch]) for i, ch in enumerate(word) if ch != "I")
        return cls(len(word), factors, word)

    @functools.cached_property
    def _monomial(self):
        """``(dest, phase)`` with ``M|x> = phase[x] |dest[x]>``, or None.

        Available when every factor has one nonzero entry per column, which
        covers all shift/clock products used as stabilizers.
        """
        dest = np.arange(3**self.n)
        phase = np.ones(3**self.n, dtype=complex)
        for pos, gate in self.factors:
            m = gate.matrix
            nz = np.abs(m) > 1e-15
            if not np.all(nz.sum(axis=0) == 1):
                return None
            rows = nz.argmax(axis=0)
            vals = m[rows, np.arange(3)]
            stride = 3 ** (self.n - 1 - pos)
            digit = (dest // stride) % 3
            phase = phase * vals[digit]
            dest = dest + (rows[digit] - digit) * stride
        return dest, phase

    def apply(self, amps: np.ndarray) -> np.ndarray:
        mono = self._monomial
        if mono is not None:
            dest, phase = mono
            out = np.empty_like(amps, dtype=complex)
            out[dest] = phase * amps
            return out
        for pos, gate in self.factors:
            amps = _apply_matrix(amps, gate.matrix, [pos], self.n)
        return amps

    def power(self, k: int) -> "ProductOperator":
        return ProductOperator(self.n, tuple((p, g.power(k)) for p, g in self.factors), f"({self.label})^{k}")

    def dense(self) -> np.ndarray:
        if 3**self.n > _DENSE_LIMIT:
            raise ValueError(f"refusing to densify a {self.n}-qutrit operator")
        return np.stack([self.apply(col) for col in np.eye(3**self.n, dtype=complex)], axis=1)

    def cube_scalar(self) -> complex:
        """Scalar ``c`` with ``M**3 = c I``, or raise if ``M**3`` is not scalar."""
        c = 1.0 + 0j
        for _, g in self.factors:
            cube = np.linalg.matrix_power(g.matrix, 3)
            s = cube[0, 0]
            if np.max(np.abs(cube - s * np.eye(3))) > UNITARY_TOL:
                raise ValueError(f"factor {g.label!r} does not cube to a scalar")
            c *= s
        return c


@dataclass(frozen=True, eq=False)
class ProjectorFamily:
    """Complete set of orthogonal projectors, stored as a splitting function.

    ``split(amps)`` returns ``[P_0 amps, P_1 amps, ...]`` in label order. Dense
    families go through :meth:`from_matrices`, which checks hermiticity,
    idempotence and completeness up front.
    """

    labels: tuple
    dim: int
    split: Callable[[np.ndarray], list]

    @classmethod
    def from_matrices(cls, matrices: Sequence[np.ndarray], labels: Sequence) -> "ProjectorFamily":
        mats = [np.asarray(m, dtype=complex) for m in matrices]
        if len(mats) != len(labels):
            raise ValueError("one label per projector required")
        dim = mats[0].shape[0]
        for m in mats:
            if np.max(np.abs(m - m.conj().T)) > UNITARY_TOL:
                raise ValueError("projector is not Hermitian")
            if np.max(np.abs(m @ m - m)) > UNITARY_TOL:
                raise ValueError("projector is not idempotent")
        if np.max(np.abs(sum(mats) - np.eye(dim))) > UNITARY_TOL:
            raise ValueError("projectors do not sum to the identity")
        return cls(tuple(labels), dim, lambda v: [m @ v for m in mats])

    @classmethod
    def computational(cls, n: int, position: int, values: Sequence[int] = (0, 1, 2)) -> "ProjectorFamily":
        """Measurement of one qutrit in the computational basis.

        ``values`` restricts the outcome list (e.g. ``(0, 1)`` for a binary
        ancilla); amplitude outside those digits makes the family incomplete
        and is caught by :func:`measure`.
        """
        digit = np.indices((3,) * n)[position].reshape(-1)
        masks = [digit == v for v in values]
        return cls(tuple(values), 3**n, lambda v: [np.where(m, v, 0) for m in masks])

    def matrices(self) -> list[np.ndarray]:
        if self.dim > _DENSE_LIMIT:
            raise ValueError(f"refusing to densify projectors of dimension {self.dim}")
        cols = [self.split(e) for e in np.eye(self.dim, dtype=complex)]
        return [np.stack([c[k] for c in cols], axis=1) for k in range(len(self.labels))]

    def probabilities(self, amps: np.ndarray) -> np.ndarray:
        return np.array([np.vdot(c, c).real for c in self.split(amps)])


def eigenprojectors_order3(op) -> ProjectorFamily:
    """Eigenspace projectors of an operator with ``M**3 = I``.

    ``P_k = (I + w^-k M + w^-2k M^2) / 3`` projects onto eigenvalue ``w**k``.
    ``op`` is either a dense :class:`GateOperator` or a :class:`ProductOperator`.
    """
    if isinstance(op, GateOperator):
        m = op.matrix
        dim = m.shape[0]
        if np.max(np.abs(np.linalg.matrix_power(m, 3) - np.eye(dim))) > UNITARY_TOL:
            raise ValueError(f"{op.label!r} does not satisfy M^3 = I")
        m2 = m @ m
        mats = [(np.eye(dim) + OMEGA ** (-k) * m + OMEGA ** (-2 * k) * m2) / 3 for k in range(3)]
        return ProjectorFamily.from_matrices(mats, OMEGA_LABELS)

    if isinstance(op, ProductOperator):
        if abs(op.cube_scalar() - 1) > UNITARY_TOL:
            raise ValueError(f"{op.label!r} does not satisfy M^3 = I")
        mono = op._monomial
        if mono is not None and np.array_equal(mono[0], np.arange(3**op.n)):
            # diagonal with cube-root-of-unity entries: projectors are index masks
            power = np.rint(np.angle(mono[1]) / (2 * np.pi / 3)).astype(int) % 3
            masks = [power == k for k in range(3)]
            return ProjectorFamily(OMEGA_LABELS, 3**op.n, lambda v: [np.where(m, v, 0) for m in masks])

        def split(v):
            mv = op.apply(v)
            return list(_DFT3 @ np.stack([v, mv, op.apply(mv)]))

        return ProjectorFamily(OMEGA_LABELS, 3**op.n, split)

    raise TypeError(f"unsupported operator type {type(op).__name__}")


class BranchScript:
    """Outcome source that forces a prefix of choices and records the rest.

    Stands in for a random generator in :func:`measure`. Past the forced
    prefix it takes the first outcome with non-negligible probability; the
    ``trace`` records every decision so :func:`enumerate_branches` can revisit
    the alternatives.
    """

    def __init__(self, prefix: Sequence[int] = ()):
        self.prefix = tuple(prefix)
        self.trace: list[tuple[int, tuple[int, ...]]] = []
        self.probability = 1.0

    def choose(self, probs: np.ndarray) -> int:
        possible = tuple(int(k) for k in np.flatnonzero(probs > MIN_PROBABILITY))
        depth = len(self.trace)
        if depth < len(self.prefix):
            k = self.prefix[depth]
            if k not in possible:
                raise RuntimeError("forced branch has zero probability")
        else:
            k = possible[0]
        self.trace.append((k, possible))
        self.probability *= float(probs[k])
        return k


def enumerate_branches(run: Callable[[BranchScript], object]) -> list[tuple[float, object]]:
    """Run ``run(script)`` once per measurement branch.

    Returns ``(branch probability, result)`` pairs; probabilities sum to one
    when every measurement inside ``run`` goes through :func:`measure`.
    """
    results = []
    pending = [()]
    while pending:
        prefix = pending.pop()
        script = BranchScript(prefix)
        result = run(script)
        for depth in range(len(prefix), len(script.trace)):
            chosen, possible = script.trace[depth]
            head = tuple(c for c, _ in script.trace[:depth])
            pending.extend(head + (alt,) for alt in possible if alt != chosen)
        results.append((script.probability, result))
    return results


def _choose(rng, probs: np.ndarray) -> int:
    if hasattr(rng, "choose"):
        return rng.choose(probs)
    # numerical dust below MIN_PROBABILITY is never selected
    cdf = np.cumsum(np.where(probs > MIN_PROBABILITY, probs, 0.0))
    u = rng.random() * cdf[-1]
    return min(int(np.searchsorted(cdf, u, side="right")), len(probs) - 1)


def measure(state: QutritRegister, family: ProjectorFamily, rng) -> tuple[object, QutritRegister]:
    """Projective measurement with Born-rule sampling and collapse."""
    if family.dim != state.dim:
        raise ValueError(f"projector dimension {family.dim} does not match state dimension {state.dim}")
    amps = state.amplitudes
    if abs(np.vdot(amps, amps).real - 1.0) > NORM_TOL:
        raise ValueError("input state is not normalized")
    parts = family.split(amps)
    probs = np.array([np.vdot(c, c).real for c in parts])
    if probs.max() < MIN_PROBABILITY:
        raise ValueError("every outcome has vanishing probability")
    if abs(probs.sum() - 1.0) > NORM_TOL:
        raise ValueError(f"outcome probabilities sum to {probs.sum():.12f}; family is incomplete")
    k = _choose(rng, probs)
    return family.labels[k], QutritRegister(state.n, parts[k] / np.sqrt(probs[k]))
