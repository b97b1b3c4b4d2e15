import itertools
import json

import numpy as np
import pytest

from qutrit_qec.core import OMEGA, BranchScript, QutritRegister, apply_gate, fidelity, make_register, superpose
from qutrit_qec.code import (
    BLOCKS,
    RELATIVE_STABILIZERS,
    SHIFT_STABILIZERS,
    PHASE_STABILIZERS,
    COMPARISON_TABLE,
    LogicalQutrit,
    StabilizerId,
    UncorrectableError,
    compare_block,
    compare_difference,
    compare_truth_table,
    decode,
    encode,
    inject,
    locate_phase,
    locate_shift,
    logical_basis,
    measure_stabilizer,
    pipeline_branches,
    run_pipeline,
    stabilizer_table_rows,
    truth_table_rows,
)
from qutrit_qec.gates import build

W = OMEGA
Q_TEST = LogicalQutrit(0.6, 0.48j, 0.64)


def expectation(state, sid):
    v = state.amplitudes
    return complex(np.vdot(v, sid.operator().apply(v)))


# --- encoding ----------------------------------------------------------------


def test_encode_zero_amplitudes():
    v = encode(LogicalQutrit(1, 0, 0)).amplitudes
    assert abs(v[0]) == pytest.approx(3**-1.5)
    assert np.count_nonzero(np.abs(v) > 1e-12) == 27


def test_logical_basis_is_orthonormal():
    b = logical_basis()
    np.testing.assert_allclose(b.conj() @ b.T, np.eye(3), atol=1e-12)


def test_encode_rejects_unnormalized():
    with pytest.raises(ValueError):
        encode(LogicalQutrit(1, 1, 0))


def test_decode_round_trip(rng):
    for _ in range(10):
        q = LogicalQutrit.random(rng)
        out, residual = decode(encode(q))
        np.testing.assert_allclose(out.vector, q.vector, atol=1e-12)
        assert residual < 1e-6


def test_decode_residual_after_uncorrected_shift():
    state = inject(encode(Q_TEST), [(0, build("X1"))])
    out, residual = decode(state)
    assert residual == pytest.approx(1, abs=1e-6)
    with pytest.raises(UncorrectableError):
        decode(state, strict=True)


@pytest.mark.parametrize("sid", list(StabilizerId))
def test_code_states_are_eigenstates(sid):
    state = encode(Q_TEST)
    if sid in PHASE_STABILIZERS:
        # bare XXX distinguishes logical values, so use a logical basis state
        for k, want in ((0, 1), (1, W**2), (2, W)):
            amps = [0, 0, 0]
            amps[k] = 1
            assert expectation(encode(LogicalQutrit(*amps)), sid) == pytest.approx(want, abs=1e-12)
    else:
        assert expectation(state, sid) == pytest.approx(1, abs=1e-12)


def test_bare_xxx_on_logical_one_reads_w2(rng):
    lab, _ = measure_stabilizer(encode(LogicalQutrit(0, 1, 0)), StabilizerId.X_BLOCK1, rng)
    assert lab == "w2"


def test_stabilizer_cube_is_identity():
    for sid in StabilizerId:
        assert sid.operator().cube_scalar() == pytest.approx(1)


# --- tables ------------------------------------------------------------------


def test_stabilizer_table_rows_match():
    rows = stabilizer_table_rows()
    assert len(rows) == 9
    assert all(r.deterministic for r in rows)
    assert [r.state for r in rows if not r.matched] == []


def test_comparison_table_rows_match(rng):
    rows = truth_table_rows(rng)
    assert len(rows) == 9
    for x, y, bits in rows:
        assert COMPARISON_TABLE[(x, y)] == bits


def test_truth_table_rejects_ancilla_in_level_two(rng):
    with pytest.raises(ValueError):
        compare_truth_table(make_register(4, "0020"), 0, 1, (2, 3), rng)


@pytest.mark.parametrize("digits, deviant, uncorrectable", [
    ("000", None, False), ("111", None, False),
    ("100", 0, False), ("010", 1, False), ("002", 2, False), ("211", 0, False),
    ("012", None, True), ("201", None, True),
])
def test_compare_block(digits, deviant, uncorrectable, rng):
    out = compare_block(make_register(3, digits), rng)
    assert out.deviant == deviant
    assert out.uncorrectable == uncorrectable


def test_compare_block_oracle_on_all_inputs(rng):
    for digits in itertools.product(range(3), repeat=3):
        out = compare_block(make_register(3, "".join(map(str, digits))), rng)
        if len(set(digits)) == 3:
            assert out.uncorrectable
        elif len(set(digits)) == 1:
            assert out.deviant is None
        else:
            odd = next(i for i in range(3) if digits.count(digits[i]) == 1)
            assert out.deviant == odd


# --- shift stage -------------------------------------------------------------


def test_locate_shift_oracle():
    # one deviant digit at index i shifted by s from the majority m
    for m, i, s in itertools.product(range(3), range(3), (1, 2)):
        d = [m, m, m]
        d[i] = (m + s) % 3
        assert locate_shift((d[0] - d[1]) % 3, (d[0] - d[2]) % 3) == (i, s)
    assert locate_shift(0, 0) == (None, 0)
    with pytest.raises(UncorrectableError):
        locate_shift(1, 2)


def test_difference_measurement_is_coherent(rng):
    # every term has digit0 - digit1 = 1, so the outcome is certain and the state untouched
    state = superpose([(0.6, "10"), (0.8j, "21")])
    outcome, after = compare_difference(state, 0, 1, rng)
    assert outcome.difference == 1
    np.testing.assert_allclose(after.amplitudes, state.amplitudes, atol=1e-12)


def test_difference_measurement_collapses_mixed_support():
    state = superpose([(1, "10"), (1, "00")])
    out, after = compare_difference(state, 0, 1, BranchScript((0,)))
    assert out.difference == 0
    np.testing.assert_allclose(after.amplitudes, make_register(2, "00").amplitudes, atol=1e-12)


def test_shift_example(rng):
    report = run_pipeline(Q_TEST, [(0, build("X2"))], rng)
    assert report.syndrome.shift_block_eigenvalues == ("w2", "1", "1")
    assert report.corrections == ((0, "X1"),)
    assert report.fidelity == pytest.approx(1, abs=1e-12)


def test_every_shift_error_is_corrected(rng):
    for pos, name in itertools.product(range(9), ("X1", "X2")):
        report = run_pipeline(Q_TEST, [(pos, build(name))], rng)
        assert not report.uncorrectable
        assert report.fidelity > 1 - 1e-9


# --- phase stage -------------------------------------------------------------


def test_locate_phase_patterns_are_unique():
    seen = set()
    for block, power in itertools.product(range(3), (1, 2)):
        v = [0, 0, 0]
        v[block] = power
        exps = {(i, j): (v[j] - v[i]) % 3 for i, j in RELATIVE_STABILIZERS}
        assert locate_phase(exps) == (block, power)
        seen.add(tuple(sorted(exps.items())))
    assert len(seen) == 6
    with pytest.raises(UncorrectableError):
        locate_phase({(0, 1): 1, (0, 2): 1, (1, 2): 1})


def test_phase_example(rng):
    # a clock error on qutrit 3 (block 1) trips the two relative checks involving block 1
    report = run_pipeline(Q_TEST, [(3, build("R1"))], rng)
    eig = report.syndrome.phase_block_eigenvalues
    assert eig["S01"] != "1" and eig["S12"] != "1" and eig["S02"] == "1"
    assert report.corrections == ((3, "R2"),)
    assert report.fidelity == pytest.approx(1, abs=1e-12)


def test_phase_error_on_any_qutrit_of_block_is_equivalent():
    base = encode(Q_TEST)
    a = inject(base, [(6, build("R1"))])
    b = inject(base, [(8, build("R1"))])
    assert fidelity(a, b) == pytest.approx(1, abs=1e-12)


# --- full pipeline -----------------------------------------------------------


def test_no_error_gives_trivial_syndrome(rng):
    report = run_pipeline(Q_TEST, [], rng)
    assert report.syndrome.is_trivial()
    assert report.corrections == ()
    assert report.fidelity == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("name", ["X01", "Z12", "iZ2X12"])
@pytest.mark.parametrize("pos", [0, 4, 8])
def test_all_branches_recover(name, pos):
    from qutrit_qec.cli import named_errors

    branches = pipeline_branches(Q_TEST, [(pos, named_errors()[name])])
    assert sum(p for p, _ in branches) == pytest.approx(1, abs=1e-9)
    for _, report in branches:
        assert not report.uncorrectable
        assert report.fidelity >= 1 - 1e-9


def test_shifts_in_two_blocks_are_corrected(rng):
    report = run_pipeline(Q_TEST, [(0, build("X1")), (4, build("X1"))], rng)
    assert not report.uncorrectable
    assert report.fidelity == pytest.approx(1, abs=1e-9)


def test_opposite_shifts_in_one_block_are_flagged(rng):
    report = run_pipeline(Q_TEST, [(0, build("X1")), (1, build("X2"))], rng)
    assert report.uncorrectable


def test_equal_shifts_in_one_block_are_a_silent_logical_failure(rng):
    report = run_pipeline(Q_TEST, [(0, build("X1")), (1, build("X1"))], rng)
    assert not report.uncorrectable
    assert report.fidelity < 1 - 1e-6


def test_corrected_state_is_back_in_codespace(rng):
    report = run_pipeline(Q_TEST, [(5, build("X20"))], rng)
    assert report.residual < 1e-6
    out = report.final_state
    for sid in SHIFT_STABILIZERS:
        assert expectation(out, sid) == pytest.approx(1, abs=1e-9)


def test_report_is_json_serializable(rng):
    report = run_pipeline(Q_TEST, [(2, build("Z1"))], rng)
    d = json.loads(json.dumps(report.to_dict()))
    assert d["errors"] == [{"position": 2, "error": "Z1"}]
    assert d["fidelity"] == pytest.approx(1)


def test_pipeline_is_deterministic_for_a_seed():
    err = [(7, build("X12"))]
    a = run_pipeline(Q_TEST, err, np.random.default_rng(5)).to_dict()
    b = run_pipeline(Q_TEST, err, np.random.default_rng(5)).to_dict()
    assert a == b


def test_block_layout():
    assert BLOCKS == ((0, 1, 2), (3, 4, 5), (6, 7, 8))
    assert isinstance(encode(Q_TEST), QutritRegister)
    assert apply_gate(encode(Q_TEST), build("X1"), [0]).n == 9
