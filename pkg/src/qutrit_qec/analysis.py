"""Failure-rate formulas, the qutrit-count bound and Monte Carlo estimation."""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .code import N_QUTRITS, LogicalQutrit, run_pipeline
from .errors import discrete_menu, sample_error

FIDELITY_THRESHOLD = 1 - 1e-6
N_ERROR_TYPES = 11


def analytic_failure(p: float) -> float:
    """Probability that two or more of nine qutrits are hit: ``1 - (1+8p)(1-p)^8``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    return 1.0 - (1.0 + 8.0 * p) * (1.0 - p) ** 8


@dataclass(frozen=True)
class BoundResult:
    n_min: int
    table: tuple[tuple[int, int, int, bool], ...]


def qutrit_bound(n_max: int = 9, error_types: int = N_ERROR_TYPES) -> BoundResult:
    """Smallest ``n`` with ``3 (error_types * n + 1) <= 3**n``, plus the table for ``1..n_max``."""
    table = []
    for n in range(1, n_max + 1):
        lhs, rhs = 3 * (error_types * n + 1), 3**n
        table.append((n, lhs, rhs, lhs <= rhs))
    n_min = next(n for n, _, _, ok in table if ok)
    return BoundResult(n_min, tuple(table))


@dataclass(frozen=True)
class PerformancePoint:
    p: float
    analytic_fail: float
    mc_fail: float
    mc_trials: int
    mc_stderr: float
    uncorrectable_count: int = 0
    multi_error_count: int = 0
    # failures keyed by number of injected errors
    failures_by_count: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        row = asdict(self)
        row["failures_by_count"] = {str(k): v for k, v in sorted(self.failures_by_count.items())}
        return row


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for trial ``index``; equals the ``index``-th spawned child of ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def run_trial(p: float, index: int, seed: int, mode: str = "discrete", wide: bool = False):
    """One trial: returns ``(n_errors, failed, uncorrectable)``."""
    rng = trial_rng(seed, index)
    errors = sample_error(p, N_QUTRITS, rng, mode, discrete_menu(wide))
    q = LogicalQutrit.random(rng)
    report = run_pipeline(q, errors, rng)
    failed = report.uncorrectable or report.fidelity < FIDELITY_THRESHOLD
    return len(errors), failed, report.uncorrectable


def _run_chunk(args) -> list:
    p, start, stop, seed, mode, wide = args
    return [run_trial(p, i, seed, mode, wide) for i in range(start, stop)]


def monte_carlo(p: float, trials: int = 10_000, mode: str = "discrete", seed: int = 0,
                workers: int = 1, wide: bool = False) -> PerformancePoint:
    """Estimate the logical failure rate at physical error probability ``p``.

    Trial ``i`` draws everything from :func:`trial_rng` ``(seed, i)``, so the
    result does not depend on ``workers`` and one seed gives nested error
    sets across different ``p``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    analytic = analytic_failure(p)
    if workers > 1:
        step = math.ceil(trials / (4 * workers))
        chunks = [(p, s, min(s + step, trials), seed, mode, wide) for s in range(0, trials, step)]
        with ProcessPoolExecutor(workers) as pool:
            outcomes = [o for chunk in pool.map(_run_chunk, chunks) for o in chunk]
    else:
        outcomes = _run_chunk((p, 0, trials, seed, mode, wide))

    fails = Counter(k for k, failed, _ in outcomes if failed)
    n_fail = sum(fails.values())
    frac = n_fail / trials
    return PerformancePoint(
        p=p,
        analytic_fail=analytic,
        mc_fail=frac,
        mc_trials=trials,
        mc_stderr=math.sqrt(frac * (1 - frac) / trials),
        uncorrectable_count=sum(1 for *_, u in outcomes if u),
        multi_error_count=sum(1 for k, *_ in outcomes if k >= 2),
        failures_by_count=dict(fails),
    )


def loglog_slope(points: Sequence[PerformancePoint]) -> float:
    """Least-squares slope of ``log mc_fail`` against ``log p``."""
    if any(pt.mc_fail <= 0 for pt in points):
        raise ValueError("a Monte Carlo failure rate is zero; slope undefined")
    xs = np.log([pt.p for pt in points])
    ys = np.log([pt.mc_fail for pt in points])
    return float(np.polyfit(xs, ys, 1)[0])
