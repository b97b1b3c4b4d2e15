"""Error operators: the linear error model, phase-only superposition errors,
expansion over the shift/clock basis, and random error sampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import UNITARY_TOL, GateOperator
from .gates import GateName, build, rotation, y_operator

TWO_PI = 2 * np.pi

SWAPS = (GateName.X01, GateName.X12, GateName.X20)
PHASE_FLIPS = (GateName.Z1, GateName.Z2)
# order of the d coefficients: (swap, phase) for swap in SWAPS, phase in PHASE_FLIPS
Y_INDEX = tuple((s, z) for s in SWAPS for z in PHASE_FLIPS)


@dataclass(frozen=True, eq=False)
class ErrorModel:
    """Coefficients of ``E = a I + sum b_i Z_i + sum (c_mn X_mn + sum_j d_mnj Y_mnj)``.

    ``b`` is ordered (Z1, Z2), ``c`` is ordered (X01, X12, X20) and ``d``
    follows :data:`Y_INDEX`.
    """

    a: complex = 0
    b: Sequence[complex] = (0, 0)
    c: Sequence[complex] = (0, 0, 0)
    d: Sequence[complex] = (0, 0, 0, 0, 0, 0)
    matrix: np.ndarray = field(init=False)
    unitary: bool = field(init=False)

    def __post_init__(self):
        b, c, d = (tuple(complex(x) for x in v) for v in (self.b, self.c, self.d))
        if (len(b), len(c), len(d)) != (2, 3, 6):
            raise ValueError("expected 2 b, 3 c and 6 d coefficients")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        m = complex(self.a) * np.eye(3, dtype=complex)
        for coeff, z in zip(b, PHASE_FLIPS):
            m += coeff * build(z).matrix
        for coeff, x in zip(c, SWAPS):
            m += coeff * build(x).matrix
        for coeff, (x, z) in zip(d, Y_INDEX):
            m += coeff * y_operator(x, z).matrix
        object.__setattr__(self, "matrix", m)
        dev = np.max(np.abs(m.conj().T @ m - np.eye(3)))
        object.__setattr__(self, "unitary", bool(dev <= UNITARY_TOL))

    def is_zero(self) -> bool:
        return not any([self.a, *self.b, *self.c, *self.d])


def assemble(model: ErrorModel) -> GateOperator:
    """The 3x3 error operator of ``model``; may be non-unitary."""
    if model.is_zero():
        raise ValueError("all error-model coefficients are zero")
    return GateOperator(model.matrix, "E")


@dataclass(frozen=True)
class SuperpositionErrorSpec:
    """Phases picked up by ``|0>``, ``|1>``, ``|2>``."""

    a: float
    b: float
    c: float


def superposition_error(spec: SuperpositionErrorSpec) -> GateOperator:
    phases = np.array([spec.a, spec.b, spec.c], dtype=float)
    if not np.all(np.isfinite(phases)):
        raise ValueError("phase angles must be finite")
    return GateOperator(np.diag(np.exp(1j * phases)), f"S({spec.a:.6g},{spec.b:.6g},{spec.c:.6g})")


def reduce_to_rotation(op: GateOperator) -> tuple[float, float, float]:
    """Split a diagonal unitary into ``e^{i global} R(theta, phi)``.

    All three angles are returned in ``[0, 2 pi)``.
    """
    if not op.is_diagonal() or op.arity != 1:
        raise ValueError("expected a diagonal single-qutrit operator")
    if not op.unitary:
        raise ValueError("expected a unitary operator")
    diag = np.diag(op.matrix)
    g = np.angle(diag[0])
    theta = np.angle(diag[1] / diag[0])
    phi = np.angle(diag[2] / diag[0])
    return tuple(_wrap(x) for x in (theta, phi, g))


def _wrap(x: float) -> float:
    x = float(np.mod(x, TWO_PI))
    # np.mod of a tiny negative number rounds up to exactly 2 pi
    return 0.0 if x >= TWO_PI else x


def pauli_basis(u: int, v: int) -> np.ndarray:
    """``X^u R^v`` with ``X|j> = |j+1>`` and ``R|j> = w^j |j>``."""
    x = build(GateName.GenX).matrix
    r = build(GateName.GenR).matrix
    return np.linalg.matrix_power(x, u) @ np.linalg.matrix_power(r, v)


@dataclass(frozen=True, eq=False)
class PauliDecomposition:
    """Coefficients ``c[u, v]`` of a 3x3 matrix over ``X^u R^v``."""

    coefficients: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return sum(self.coefficients[u, v] * pauli_basis(u, v) for u in range(3) for v in range(3))

    def rows(self) -> list[tuple[int, int, complex]]:
        return [(u, v, complex(self.coefficients[u, v])) for u in range(3) for v in range(3)]


def pauli_decompose(op) -> PauliDecomposition:
    """Trace inner product expansion, ``c[u, v] = Tr((X^u R^v)^dag M) / 3``."""
    m = op.matrix if isinstance(op, GateOperator) else np.asarray(op, dtype=complex)
    if m.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
    coeffs = np.empty((3, 3), dtype=complex)
    for u in range(3):
        for v in range(3):
            coeffs[u, v] = np.trace(pauli_basis(u, v).conj().T @ m) / 3
    return PauliDecomposition(coeffs)


def discrete_menu(wide: bool = False) -> tuple[GateOperator, ...]:
    """Error types drawn by :func:`sample_error` in discrete mode.

    The default menu has eleven entries: the three swaps, two shifts, three
    sign flips and one ``i Z X`` product per swap. ``wide=True`` uses all
    nine ``i Z X`` products (Z1, Z2, Z12 against each swap), seventeen in all.
    """
    base = [build(n) for n in (*SWAPS, GateName.X1, GateName.X2, GateName.Z1, GateName.Z2, GateName.Z12)]
    if wide:
        ys = [y_operator(s, z) for s in SWAPS for z in (GateName.Z1, GateName.Z2, GateName.Z12)]
    else:
        ys = [y_operator(GateName.X01, GateName.Z1), y_operator(GateName.X12, GateName.Z2),
              y_operator(GateName.X20, GateName.Z1)]
    return tuple(base + ys)


def sample_error(p: float, n: int, rng: np.random.Generator, mode: str = "discrete",
                 menu: Sequence[GateOperator] | None = None) -> list[tuple[int, GateOperator]]:
    """Independently afflict each of ``n`` positions with probability ``p``.

    The same number of variates is drawn whatever ``p`` is, so one seed gives
    nested error sets across a sweep of ``p`` values.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if mode not in ("discrete", "continuous"):
        raise ValueError(f"unknown mode {mode!r}")
    menu = tuple(menu) if menu is not None else discrete_menu()
    hits = rng.random(n) < p
    picks = rng.integers(len(menu), size=n)
    angles = rng.random((n, 2)) * TWO_PI
    out = []
    for pos in np.flatnonzero(hits):
        if mode == "discrete":
            out.append((int(pos), menu[picks[pos]]))
        else:
            out.append((int(pos), rotation(*angles[pos])))
    return out
