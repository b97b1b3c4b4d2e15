"""Command-line entry point.

Every command prints one JSON (or CSV) document to stdout. JSON reports
carry the ``config`` that produced them, and ``rerun`` replays a saved
report byte for byte.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import analysis, code, errors, gates
from .core import GateOperator

CSV_COLUMNS = ("p", "trials", "mc_fail", "mc_stderr", "analytic_fail", "uncorrectable_count", "multi_error_count")


def _cx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# verify


def _check(name: str, passed: bool, deviation: float) -> dict:
    return {"name": name, "passed": bool(passed), "max_deviation": float(deviation)}


def verification_checks() -> list[dict]:
    checks = [_check(c.name, c.passed, c.deviation) for c in gates.verify_identities()]

    rows = code.stabilizer_table_rows()
    matched = sum(r.matched for r in rows)
    checks.append(_check(f"stabilizer eigenvalue table rows: {matched}/{len(rows)} matched",
                         matched == len(rows), 0.0))

    tt = code.truth_table_rows()
    hits = sum(code.COMPARISON_TABLE[(x, y)] == bits for x, y, bits in tt)
    checks.append(_check(f"comparison truth table rows: {hits}/{len(tt)} matched", hits == len(tt), 0.0))

    grid = gates.rotation_grid()
    devs = [float(np.max(np.abs(gates.four_term_rotation(t, p) - gates.rotation(t, p).matrix))) for t, p in grid]
    ok = sum(d <= 1e-12 for d in devs)
    checks.append(_check(f"rotation expansion grid {ok}/{len(grid)} within 1e-12", ok == len(grid), max(devs)))

    worst, good = 0.0, 0
    for name in errors.SWAPS:
        g = gates.build(name)
        dec = errors.pauli_decompose(g)
        resid = float(np.max(np.abs(dec.reconstruct() - g.matrix)))
        mod_dev = float(np.max(np.abs(np.abs(dec.coefficients) - 1 / 3)))
        worst = max(worst, resid, mod_dev)
        good += resid < 1e-12 and mod_dev < 1e-12
    checks.append(_check(f"swap decompositions: {good}/3 with nine coefficients of modulus 1/3", good == 3, worst))

    rng = np.random.default_rng(0)
    worst = 0.0
    for a, b, c in rng.uniform(-10, 10, size=(100, 3)):
        theta, phi, _ = errors.reduce_to_rotation(errors.superposition_error(errors.SuperpositionErrorSpec(a, b, c)))
        worst = max(worst, _circular_distance(theta, b - a), _circular_distance(phi, c - a))
    checks.append(_check("phase-only superposition error round trip: 100 triples", worst <= 1e-12, worst))

    bound = analysis.qutrit_bound()
    checks.append(_check(f"qutrit bound n_min = {bound.n_min}", bound.n_min == 5, 0.0))
    return checks


def _circular_distance(x: float, y: float) -> float:
    d = (x - y) % (2 * np.pi)
    return float(min(d, 2 * np.pi - d))


def cmd_verify(args) -> tuple[dict, int]:
    checks = verification_checks()
    passed = all(c["passed"] for c in checks)
    return {"checks": checks, "passed": passed}, 0 if passed else 1


# ---------------------------------------------------------------------------
# demo


def named_errors() -> dict[str, GateOperator]:
    table = {g.label: g for g in errors.discrete_menu(wide=True)}
    for name in ("R1", "R2"):
        table[name] = gates.build(name)
    return table


def resolve_error(name: str, theta: float, phi: float) -> GateOperator | None:
    if name == "none":
        return None
    if name == "Rtheta":
        return gates.rotation(theta, phi)
    table = named_errors()
    if name not in table:
        raise UsageError(f"unknown error {name!r}; choose from none, Rtheta, {', '.join(sorted(table))}")
    return table[name]


def cmd_demo(args) -> tuple[dict, int]:
    if not 0 <= args.pos < code.N_QUTRITS:
        raise UsageError(f"--pos must lie in 0..{code.N_QUTRITS - 1}")
    gate = resolve_error(args.error, args.theta, args.phi)
    rng = np.random.default_rng(args.seed)
    q = code.LogicalQutrit.random(rng)
    injected = [] if gate is None else [(args.pos, gate)]
    report = code.run_pipeline(q, injected, rng)
    return {"trace": report.to_dict()}, 0


# ---------------------------------------------------------------------------
# montecarlo


def _parse_p_list(values: list[str]) -> list[float]:
    ps = [float(x) for v in values for x in v.split(",") if x.strip()]
    if not ps:
        raise UsageError("at least one --p value is required")
    for p in ps:
        if not 0.0 <= p <= 1.0:
            raise UsageError(f"probability {p} outside [0, 1]")
    return ps


def cmd_montecarlo(args) -> tuple[dict, int]:
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    points = [analysis.monte_carlo(p, args.trials, args.mode, args.seed, args.workers, args.wide)
              for p in _parse_p_list(args.p)]
    return {"points": [pt.as_row() for pt in points]}, 0


def montecarlo_csv(result: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in result["points"]:
        w.writerow([repr(row["p"]), row["mc_trials"], repr(row["mc_fail"]), repr(row["mc_stderr"]),
                    repr(row["analytic_fail"]), row["uncorrectable_count"], row["multi_error_count"]])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# decompose


def parse_matrix(text: str) -> np.ndarray:
    try:
        entries = [complex(x.strip().replace(" ", "")) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"malformed matrix entry: {exc}") from None
    if len(entries) != 9:
        raise UsageError(f"expected 9 comma-separated entries, got {len(entries)}")
    return np.array(entries).reshape(3, 3)


def cmd_decompose(args) -> tuple[dict, int]:
    if args.matrix is not None:
        m = parse_matrix(args.matrix)
    elif args.source is not None:
        try:
            m = gates.build(args.source).matrix
        except ValueError:
            table = named_errors()
            if args.source not in table:
                raise UsageError(f"unknown gate {args.source!r}") from None
            m = table[args.source].matrix
    else:
        raise UsageError("give a gate name or --matrix")
    dec = errors.pauli_decompose(m)
    residual = float(np.max(np.abs(dec.reconstruct() - m)))
    rows = [{"u": u, "v": v, "coefficient": _cx(c), "modulus": abs(c)} for u, v, c in dec.rows()]
    return {"coefficients": rows, "residual": residual}, 0


# ---------------------------------------------------------------------------
# phase-frames


def cmd_phase_frames(args) -> tuple[dict, int]:
    """Sign flips seen through the two-level Hadamards, and their repair.

    In the H01 frame a Z1 flip becomes the swap X01; in the H20 frame a Z2
    flip becomes X20. Z12 shows up in both frames and is repaired by
    applying Z1 and then Z2.
    """
    frames = {"H01": (gates.build("H01").matrix, "Z1"), "H20": (gates.build("H20").matrix, "Z2")}
    z = {n: gates.build(n).matrix for n in ("Z1", "Z2", "Z12")}
    rows = []
    for name, e in z.items():
        repair, detected, applied = np.eye(3), [], []
        for frame, (h, fix) in frames.items():
            seen = h @ e @ h
            # a sign flip inside the frame's two levels turns into a swap
            if np.max(np.abs(seen - np.diag(np.diag(seen)))) > 1e-12:
                detected.append(frame)
                applied.append(fix)
                repair = z[fix] @ repair
        rows.append({"error": name, "detected_in": detected, "applied": applied,
                     "residual": float(np.max(np.abs(repair @ e - np.eye(3))))})
    ok = all(r["residual"] < 1e-12 for r in rows)
    return {"rows": rows, "passed": ok}, 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qutrit-qec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output=False):
        p.add_argument("--seed", type=int, default=0)
        if output:
            p.add_argument("--output", choices=("json", "csv"), default="json")

    p = sub.add_parser("verify", help="check identities and tables")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("demo", help="encode, inject one error, correct, decode")
    common(p)
    p.add_argument("--error", default="none")
    p.add_argument("--pos", type=int, default=0)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("montecarlo", help="logical failure rate sweep")
    common(p, output=True)
    p.add_argument("--p", action="append", required=True, help="probability or comma list; repeatable")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--mode", choices=("discrete", "continuous"), default="discrete")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--wide", action="store_true", help="use the 17-entry error menu")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("decompose", help="expand a 3x3 operator over X^u R^v")
    common(p)
    p.add_argument("source", nargs="?")
    p.add_argument("--matrix", help="9 comma-separated complex entries, row major")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("phase-frames", help="sign-flip detection via two-level Hadamards")
    common(p)
    p.set_defaults(func=cmd_phase_frames)

    p = sub.add_parser("rerun", help="replay the config stored in a JSON report")
    p.add_argument("report")
    p.set_defaults(func=None)
    return parser


def config_of(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def config_to_argv(config: dict) -> list[str]:
    argv = [config["command"]]
    for key, value in config.items():
        if key == "command" or value is None:
            continue
        if key == "source":
            argv.append(str(value))
        elif isinstance(value, bool):
            if value:
                argv.append(f"--{key}")
        elif isinstance(value, list):
            for item in value:
                argv += [f"--{key}", str(item)]
        else:
            argv += [f"--{key}", repr(value) if isinstance(value, float) else str(value)]
    return argv


def run(argv: list[str] | None = None) -> tuple[str, int]:
    """Parse ``argv`` and return ``(stdout text, exit code)``."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "rerun":
        with open(args.report) as fh:
            config = json.load(fh)["config"]
        return run(config_to_argv(config))
    result, code_ = args.func(args)
    if getattr(args, "output", "json") == "csv":
        return montecarlo_csv(result), code_
    result["config"] = config_of(args)
    return _dump(result) + "\n", code_


def main(argv: list[str] | None = None) -> int:
    try:
        text, status = run(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
