import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qutrit_qec.core import OMEGA, apply_gate, make_register
from qutrit_qec.errors import (
    ErrorModel,
    SuperpositionErrorSpec,
    Y_INDEX,
    assemble,
    discrete_menu,
    pauli_basis,
    pauli_decompose,
    reduce_to_rotation,
    sample_error,
    superposition_error,
)
from qutrit_qec.gates import build, rotation, y_operator

W = OMEGA
TWO_PI = 2 * np.pi
angles = st.floats(min_value=-20, max_value=20, allow_nan=False)


def circ(x, y):
    d = (x - y) % TWO_PI
    return min(d, TWO_PI - d)


# --- linear error model ------------------------------------------------------


def test_assemble_identity():
    np.testing.assert_allclose(assemble(ErrorModel(a=1)).matrix, np.eye(3), atol=1e-15)


def test_assemble_z1():
    np.testing.assert_allclose(assemble(ErrorModel(b=(1, 0))).matrix, np.diag([1, -1, 1]), atol=1e-15)


def test_assemble_y():
    d = [0] * 6
    d[Y_INDEX.index(("X01", "Z1"))] = 1
    e = assemble(ErrorModel(d=d))
    np.testing.assert_allclose(e.matrix, 1j * build("Z1").matrix @ build("X01").matrix, atol=1e-15)


def test_assemble_rejects_all_zero():
    with pytest.raises(ValueError):
        assemble(ErrorModel())


def test_non_unitary_model_is_flagged_and_not_injectable():
    model = ErrorModel(a=1, b=(1, 0))
    assert not model.unitary
    e = assemble(model)
    assert not e.unitary
    with pytest.raises(ValueError):
        apply_gate(make_register(1, "0"), e, [0])


def test_unitary_combination_is_flagged_unitary():
    theta, phi = 0.4, 1.3
    ct, st_, cp, sp = np.cos(theta / 2), np.sin(theta / 2), np.cos(phi / 2), np.sin(phi / 2)
    # only a, b terms: reproduce the rotation without the Z12 term is impossible, so use Z1 alone
    model = ErrorModel(a=ct, b=(-1j * st_, 0))
    assert model.unitary
    model = ErrorModel(a=ct * cp, b=(-1j * st_ * cp, -1j * ct * sp))
    assert not model.unitary


def test_model_coefficient_counts():
    with pytest.raises(ValueError):
        ErrorModel(a=1, b=(1,))


# --- phase-only superposition error -------------------------------------------


def test_superposition_zero_is_identity():
    np.testing.assert_allclose(superposition_error(SuperpositionErrorSpec(0, 0, 0)).matrix, np.eye(3), atol=1e-15)


def test_uniform_phase_is_global():
    m = superposition_error(SuperpositionErrorSpec(np.pi / 6, np.pi / 6, np.pi / 6)).matrix
    np.testing.assert_allclose(m, np.exp(1j * np.pi / 6) * np.eye(3), atol=1e-15)


def test_superposition_with_zero_first_phase_is_rotation():
    m = superposition_error(SuperpositionErrorSpec(0, np.pi / 4, np.pi / 3)).matrix
    np.testing.assert_allclose(m, rotation(np.pi / 4, np.pi / 3).matrix, atol=1e-15)


def test_reduce_examples():
    assert reduce_to_rotation(build("Rtheta")) == pytest.approx((0, 0, 0), abs=1e-15)
    theta, phi, g = reduce_to_rotation(build("R1"))
    assert (theta, phi, g) == pytest.approx((2 * np.pi / 3, 4 * np.pi / 3, 0), abs=1e-12)
    uniform = superposition_error(SuperpositionErrorSpec(np.pi / 6, np.pi / 6, np.pi / 6))
    assert reduce_to_rotation(uniform) == pytest.approx((0, 0, np.pi / 6), abs=1e-12)


def test_reduce_rejects_non_diagonal():
    with pytest.raises(ValueError):
        reduce_to_rotation(build("X01"))


@settings(max_examples=100, deadline=None)
@given(a=angles, b=angles, c=angles)
def test_round_trip(a, b, c):
    op = superposition_error(SuperpositionErrorSpec(a, b, c))
    theta, phi, g = reduce_to_rotation(op)
    for x in (theta, phi, g):
        assert 0 <= x < TWO_PI
    assert circ(theta, b - a) < 1e-12
    assert circ(phi, c - a) < 1e-12
    np.testing.assert_allclose(np.exp(1j * g) * rotation(theta, phi).matrix, op.matrix, atol=1e-12)


# --- shift/clock expansion ---------------------------------------------------


def test_basis_orthogonality():
    for u, v, u2, v2 in np.ndindex(3, 3, 3, 3):
        ip = np.trace(pauli_basis(u, v).conj().T @ pauli_basis(u2, v2))
        want = 3.0 if (u, v) == (u2, v2) else 0.0
        assert abs(ip - want) < 1e-12


def test_decompose_shift():
    c = pauli_decompose(build("X1")).coefficients
    want = np.zeros((3, 3))
    want[1, 0] = 1
    np.testing.assert_allclose(c, want, atol=1e-12)


def test_decompose_z1_values():
    c = pauli_decompose(build("Z1")).coefficients
    assert c[0, 0] == pytest.approx(1 / 3, abs=1e-12)
    assert c[0, 1] == pytest.approx((1 + W - W**2) / 3, abs=1e-12)
    assert c[0, 2] == pytest.approx((1 - W + W**2) / 3, abs=1e-12)
    np.testing.assert_allclose(c[1:], 0, atol=1e-12)
    # independent check: the three diagonal terms rebuild diag(1, -1, 1)
    rebuilt = sum(c[0, v] * np.diag([1, W**v, W ** (2 * v)]) for v in range(3))
    np.testing.assert_allclose(rebuilt, np.diag([1, -1, 1]), atol=1e-12)


@pytest.mark.parametrize("name", ["X01", "X12", "X20"])
def test_swap_decomposition(name):
    g = build(name)
    dec = pauli_decompose(g)
    np.testing.assert_allclose(dec.reconstruct(), g.matrix, atol=1e-12)
    np.testing.assert_allclose(np.abs(dec.coefficients), 1 / 3, atol=1e-12)


def test_x12_expansion_by_brute_force():
    # least squares over the nine flattened basis matrices, independent of the trace formula
    basis = np.stack([pauli_basis(u, v).reshape(-1) for u in range(3) for v in range(3)], axis=1)
    sol, *_ = np.linalg.lstsq(basis, build("X12").matrix.reshape(-1), rcond=None)
    np.testing.assert_allclose(sol.reshape(3, 3), pauli_decompose(build("X12")).coefficients, atol=1e-12)
    # u = 0 column carries the |0><0| part, u = 1 and 2 carry |2><1| and |1><2|
    np.testing.assert_allclose(sol.reshape(3, 3)[1], [1 / 3, W**-1 / 3, W**-2 / 3], atol=1e-12)


def test_diagonal_operators_live_in_clock_family():
    c = pauli_decompose(build("Z12")).coefficients
    np.testing.assert_allclose(c[1:], 0, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_decomposition_is_linear(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    x, y = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
    lhs = pauli_decompose(x * a + y * b).coefficients
    rhs = x * pauli_decompose(a).coefficients + y * pauli_decompose(b).coefficients
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)
    np.testing.assert_allclose(pauli_decompose(a).reconstruct(), a, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_model_round_trip_through_expansion(seed):
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=12) + 1j * rng.normal(size=12)
    model = ErrorModel(coeffs[0], coeffs[1:3], coeffs[3:6], coeffs[6:12])
    direct = pauli_decompose(assemble(model)).coefficients
    terms = [np.eye(3), build("Z1").matrix, build("Z2").matrix,
             build("X01").matrix, build("X12").matrix, build("X20").matrix]
    terms += [y_operator(s, z).matrix for s, z in Y_INDEX]
    expanded = sum(c * pauli_decompose(t).coefficients for c, t in zip(coeffs, terms))
    np.testing.assert_allclose(direct, expanded, atol=1e-12)


# --- sampling ----------------------------------------------------------------


def test_menu_sizes():
    small, wide = discrete_menu(), discrete_menu(wide=True)
    assert len(small) == 11 and len(wide) == 17
    for menu in (small, wide):
        assert len({g.label for g in menu}) == len(menu)
        assert all(g.unitary for g in menu)


def test_sample_p_zero(rng):
    for _ in range(100):
        assert sample_error(0.0, 9, rng) == []


def test_sample_p_one(rng):
    out = sample_error(1.0, 9, rng)
    assert sorted(p for p, _ in out) == list(range(9))


def test_sample_rejects_bad_probability(rng):
    with pytest.raises(ValueError):
        sample_error(1.5, 9, rng)
    with pytest.raises(ValueError):
        sample_error(-0.1, 9, rng)


def test_sample_rate_matches_binomial():
    rng = np.random.default_rng(11)
    trials, p, n = 100_000, 0.01, 9
    counts = np.array([len(sample_error(p, n, rng)) for _ in range(trials)])
    mean, sigma = n * p, np.sqrt(n * p * (1 - p) / trials)
    assert abs(counts.mean() - mean) < 3 * sigma


def test_continuous_mode_draws_rotations(rng):
    out = sample_error(1.0, 9, rng, mode="continuous")
    assert len(out) == 9
    for _, g in out:
        assert g.is_diagonal() and g.unitary
        assert g.matrix[0, 0] == pytest.approx(1)


def test_error_sets_nest_across_p():
    small = sample_error(0.1, 9, np.random.default_rng(3))
    large = sample_error(0.5, 9, np.random.default_rng(3))
    assert {p for p, _ in small} <= {p for p, _ in large}
