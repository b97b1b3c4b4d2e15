"""Named single- and two-qutrit operators and their algebraic identities."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .core import OMEGA, GateOperator

W = OMEGA
_S2 = np.sqrt(2.0)


class GateName(str, enum.Enum):
    X01 = "X01"
    X12 = "X12"
    X20 = "X20"
    X1 = "X1"
    X2 = "X2"
    Z1 = "Z1"
    Z2 = "Z2"
    Z12 = "Z12"
    R1 = "R1"
    R2 = "R2"
    GenX = "GenX"
    GenR = "GenR"
    H01 = "H01"
    H12 = "H12"
    H20 = "H20"
    MSplus1 = "MSplus1"
    MSplus2 = "MSplus2"
    C11 = "C11"
    C21 = "C21"
    Rtheta = "Rtheta"


_MATRICES = {
    GateName.X01: [[0, 1, 0], [1, 0, 0], [0, 0, 1]],
    GateName.X12: [[1, 0, 0], [0, 0, 1], [0, 1, 0]],
    GateName.X20: [[0, 0, 1], [0, 1, 0], [1, 0, 0]],
    # |j> -> |j+1>
    GateName.X1: [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
    # |j> -> |j-1>
    GateName.X2: [[0, 1, 0], [0, 0, 1], [1, 0, 0]],
    GateName.Z1: np.diag([1, -1, 1]),
    GateName.Z2: np.diag([1, 1, -1]),
    GateName.Z12: np.diag([1, -1, -1]),
    GateName.R1: np.diag([1, W, W**2]),
    GateName.R2: np.diag([1, W**2, W]),
    GateName.GenX: [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
    GateName.GenR: np.diag([1, W, W**2]),
    GateName.H01: np.array([[1, 1, 0], [1, -1, 0], [0, 0, _S2]]) / _S2,
    GateName.H12: np.array([[_S2, 0, 0], [0, 1, 1], [0, 1, -1]]) / _S2,
    GateName.H20: np.array([[1, 0, 1], [0, _S2, 0], [1, 0, -1]]) / _S2,
    # MS+i |j> = |j+i>
    GateName.MSplus1: [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
    GateName.MSplus2: [[0, 1, 0], [0, 0, 1], [1, 0, 0]],
}


def controlled(target: GateOperator, control_value: int, label: str | None = None) -> GateOperator:
    """Two-qutrit gate applying ``target`` when the control digit equals ``control_value``.

    Ordering is control (x) target, so it acts on positions ``[control, target]``.
    """
    proj = np.zeros((3, 3))
    proj[control_value, control_value] = 1.0
    rest = np.eye(3) - proj
    m = np.kron(proj, target.matrix) + np.kron(rest, np.eye(3))
    return GateOperator(m, label or f"C{control_value}[{target.label}]")


def rotation(theta: float, phi: float) -> GateOperator:
    """``diag(1, e^{i theta}, e^{i phi})``."""
    if not (np.isfinite(theta) and np.isfinite(phi)):
        raise ValueError("rotation angles must be finite")
    return GateOperator(np.diag([1.0, np.exp(1j * theta), np.exp(1j * phi)]), f"R({theta:.6g},{phi:.6g})")


def build(name: GateName | str, theta: float = 0.0, phi: float = 0.0) -> GateOperator:
    """Construct a named gate. ``theta``/``phi`` are only read for ``Rtheta``."""
    name = GateName(name)
    if name is GateName.Rtheta:
        return rotation(theta, phi)
    if name is GateName.C11:
        return controlled(build(GateName.X1), 1, "C11")
    if name is GateName.C21:
        return controlled(build(GateName.X1), 2, "C21")
    gate = GateOperator(np.asarray(_MATRICES[name], dtype=complex), name.value)
    assert gate.unitary, name
    return gate


def binary_not(control_value: int) -> GateOperator:
    """Controlled flip of a binary ancilla stored in a qutrit.

    The target is X01, so the ancilla's ``|2>`` level is left alone and a
    ``{0,1}`` ancilla stays in that subspace.
    """
    return controlled(build(GateName.X01), control_value, f"CNOT{control_value}")


def y_operator(swap: GateName | str, phase: GateName | str) -> GateOperator:
    """``Y = i Z X`` for a pairwise swap ``X`` and a sign-flip ``Z``."""
    x, z = build(swap), build(phase)
    return GateOperator(1j * z.matrix @ x.matrix, f"iZ{GateName(phase).value[1:]}{GateName(swap).value}")


def identity() -> GateOperator:
    return GateOperator(np.eye(3, dtype=complex), "I")


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    passed: bool
    deviation: float


def _dev(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def rotation_grid(points: int = 5) -> list[tuple[float, float]]:
    angles = [2 * np.pi * k / points for k in range(points)]
    return list(itertools.product(angles, angles))


def four_term_rotation(theta: float, phi: float) -> np.ndarray:
    """The I/Z1/Z2/Z12 expansion of ``R(theta, phi)`` with the global phase restored."""
    g = {n: build(n).matrix for n in (GateName.Z1, GateName.Z2, GateName.Z12)}
    ct, st = np.cos(theta / 2), np.sin(theta / 2)
    cp, sp = np.cos(phi / 2), np.sin(phi / 2)
    body = (ct * cp * np.eye(3) - 1j * st * cp * g[GateName.Z1]
            - 1j * ct * sp * g[GateName.Z2] - st * sp * g[GateName.Z12])
    return np.exp(1j * (theta + phi) / 2) * body


def verify_identities(tol: float = 1e-12) -> list[IdentityCheck]:
    """Evaluate the library's algebraic identities; one entry per identity."""
    m = {n: build(n).matrix for n in GateName if n not in (GateName.Rtheta,)}
    eye = np.eye(3)
    checks: list[tuple[str, float]] = []

    for n in ("X01", "X12", "X20", "Z1", "Z2", "Z12", "H01", "H12", "H20"):
        checks.append((f"{n} self-adjoint", _dev(m[GateName(n)], m[GateName(n)].conj().T)))

    x1, x2 = m[GateName.X1], m[GateName.X2]
    checks.append(("X1.X1 = X2", _dev(x1 @ x1, x2)))
    checks.append(("X2.X2 = X1", _dev(x2 @ x2, x1)))
    checks.append(("X1.X2 = I", _dev(x1 @ x2, eye)))
    for n in ("X1", "X2", "GenR", "R1", "R2"):
        checks.append((f"{n}^3 = I", _dev(np.linalg.matrix_power(m[GateName(n)], 3), eye)))

    z1, z2, z12 = m[GateName.Z1], m[GateName.Z2], m[GateName.Z12]
    checks.append(("Z1.Z2 = Z12", _dev(z1 @ z2, z12)))
    checks.append(("Z2.Z1 = Z12", _dev(z2 @ z1, z12)))
    zgroup = [eye, z1, z2, z12]
    checks.append(("{I,Z1,Z2,Z12} closed", _closure_deviation(zgroup)))

    bit = [m[GateName(n)] for n in ("X01", "X12", "X20", "X1", "X2")]
    checks.append(("{I,X01,X12,X20,X1,X2} closed", _closure_deviation([eye] + bit)))

    h01, h12, h20 = m[GateName.H01], m[GateName.H12], m[GateName.H20]
    checks.append(("H01.Z1.H01 = X01", _dev(h01 @ z1 @ h01, m[GateName.X01])))
    checks.append(("H12.Z2.H12 = X12", _dev(h12 @ z2 @ h12, m[GateName.X12])))
    checks.append(("H20.Z2.H20 = X20", _dev(h20 @ z2 @ h20, m[GateName.X20])))

    grid_dev = max(_dev(four_term_rotation(t, p), rotation(t, p).matrix) for t, p in rotation_grid())
    checks.append(("rotation four-term expansion on 5x5 grid", grid_dev))

    checks.append(("R1 = R(2pi/3, 4pi/3)", _dev(rotation(2 * np.pi / 3, 4 * np.pi / 3).matrix, m[GateName.R1])))
    checks.append(("R2 = R(4pi/3, 2pi/3)", _dev(rotation(4 * np.pi / 3, 2 * np.pi / 3).matrix, m[GateName.R2])))
    checks.append(("GenX = X1", _dev(m[GateName.GenX], x1)))
    checks.append(("MSplus1 = X1", _dev(m[GateName.MSplus1], x1)))
    checks.append(("MSplus2 = X2", _dev(m[GateName.MSplus2], x2)))

    return [IdentityCheck(name, dev <= tol, dev) for name, dev in checks]


def _closure_deviation(group: list[np.ndarray]) -> float:
    """Largest distance from any pairwise product to its nearest group member."""
    worst = 0.0
    for a, b in itertools.product(group, repeat=2):
        worst = max(worst, min(_dev(a @ b, g) for g in group))
    return worst
