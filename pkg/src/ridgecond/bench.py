"""Timing harness for condition number paths.

For every estimator, dimension ``p`` and step count ``S`` a correlation matrix of
``n = 200`` standard normal draws is timed in a rotation-equivariant setting
(target ``I``) and, for ``arch1`` and ``alt``, a non-equivariant one (target ``I``
with its first diagonal entry set to 2). ``arch2`` is always equivariant.
"""

import statistics
import time
from dataclasses import astuple, dataclass

import numpy as np

from .condpath import Norm, PenaltyGrid, condition_path
from .estimators import EstimatorKind, TargetSpec
from .ingest import cov_ml, to_correlation

BENCH_COLUMNS = ("estimator", "equivariant", "p", "S", "median_seconds", "reps")

#: Penalty domains per estimator.
DOMAINS = {
    EstimatorKind.ARCH_I: (1e-5, 1.0),
    EstimatorKind.ARCH_II: (1e-5, 20.0),
    EstimatorKind.ALT: (1e-5, 20.0),
}


@dataclass(frozen=True)
class BenchRow:
    estimator: str
    equivariant: bool
    p: int
    S: int
    median_seconds: float
    reps: int


def synthetic_correlation(p, n=200, seed=1234):
    rng = np.random.default_rng(seed)
    return to_correlation(cov_ml(rng.standard_normal((n, p))))


def settings(kind, p):
    """``(equivariant, target)`` pairs benchmarked for ``kind`` at dimension ``p``."""
    out = [(True, TargetSpec.scalar(1.0))]
    if kind is not EstimatorKind.ARCH_II:
        t = np.eye(p)
        t[0, 0] = 2.0
        out.append((False, TargetSpec.custom(t)))
    return out


def time_path(s, kind, target, steps, reps, threads=1):
    lo, hi = DOMAINS[kind]
    grid = PenaltyGrid(lo, hi, steps)
    samples = []
    for _ in range(reps):
        start = time.perf_counter()
        condition_path(s, kind, target, grid, Norm.SPECTRAL, threads=threads)
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def run_bench(ps, steps, reps=5, estimators=tuple(EstimatorKind), equivariance=(True, False), seed=1234, threads=1):
    """Median runtime of :func:`condition_path` over the grid ``estimators x p x S``."""
    rows = []
    for kind in estimators:
        kind = kind if isinstance(kind, EstimatorKind) else EstimatorKind.parse(kind)
        for p in ps:
            s = synthetic_correlation(int(p), seed=seed)
            for equivariant, target in settings(kind, int(p)):
                if equivariant not in equivariance:
                    continue
                for S in steps:
                    median = time_path(s, kind, target, int(S), int(reps), threads=threads)
                    rows.append(BenchRow(kind.value, equivariant, int(p), int(S), median, int(reps)))
    return rows


def bench_table(rows):
    return [astuple(r) for r in rows]
