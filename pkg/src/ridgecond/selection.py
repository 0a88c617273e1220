"""Cross-validated penalty selection.

The held-out score is the mean Gaussian negative log-likelihood

    0.5 * [p ln(2 pi) - ln|Omega| + y' Omega y]

of test rows centered (and optionally scaled) with training-fold statistics only.
The penalty is chosen by Brent minimization over ``ln(lambda)``.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceFailure, DegenerateVariance, InvalidInput, NearSingular
from .estimators import (
    EstimatorKind,
    TargetSpec,
    alt_shrink,
    check_combination,
    is_rotation_equivariant,
    precision_of,
    ridge_estimate,
    scalar_target_value,
)

LOG_2PI = math.log(2.0 * math.pi)
_GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class CVConfig:
    """Settings for :func:`cv_score` and :func:`select_penalty`.

    ``folds=None`` means leave-one-out. K-fold assignment puts row ``i`` in fold
    ``i mod K``; with ``seed`` set the rows are shuffled by a
    ``numpy.random.default_rng(seed)`` permutation first.
    """

    lambda_lo: float
    lambda_hi: float
    estimator: EstimatorKind = EstimatorKind.ALT
    target: TargetSpec = field(default_factory=TargetSpec.average_eigenvalue)
    folds: int = None
    use_correlation: bool = False
    unbiased: bool = False
    tol: float = 1e-6
    max_iter: int = 200
    seed: int = None

    def __post_init__(self):
        if not (0.0 < self.lambda_lo < self.lambda_hi):
            raise InvalidInput(f"need 0 < lambda_lo < lambda_hi, got {self.lambda_lo}, {self.lambda_hi}")
        if self.estimator is EstimatorKind.ARCH_I:
            EstimatorKind.ARCH_I.check_penalty(self.lambda_hi)
        if self.estimator is not EstimatorKind.ARCH_II:
            check_combination(self.estimator, self.target)
        if self.folds is not None and self.folds < 2:
            raise InvalidInput("need at least 2 folds")
        if not self.tol > 0:
            raise InvalidInput("tol must be positive")


@dataclass
class CVResult:
    lambda_opt: float
    score_opt: float
    evaluations: int
    bracket_history: list


class MinimizeResult(NamedTuple):
    x: float
    fun: float
    evals: int
    history: list


def neg_loglik(test_rows, precision):
    """Mean per-row zero-mean Gaussian negative log-likelihood under ``precision``."""
    y = np.atleast_2d(np.asarray(test_rows, dtype=float))
    omega = np.asarray(precision, dtype=float)
    try:
        chol = np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        raise InvalidInput("precision matrix is not positive definite") from None
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    quad = np.einsum("ij,jk,ik->i", y, omega, y)
    p = omega.shape[0]
    return float(np.mean(0.5 * (p * LOG_2PI - logdet + quad)))


def fold_assignment(n, folds=None, seed=None):
    """Fold label for each of ``n`` rows (LOO when ``folds`` is ``None``)."""
    k = n if folds is None else int(folds)
    if k > n:
        raise InvalidInput(f"{k} folds requested for {n} observations")
    order = np.arange(n)
    if seed is not None:
        order = np.random.default_rng(seed).permutation(n)
    labels = np.empty(n, dtype=int)
    labels[order] = np.arange(n) % k
    return labels


class _Fold:
    """Training statistics of one fold, with a cached spectrum when it can be reused."""

    def __init__(self, train, test, cfg):
        n = train.shape[0]
        if n < 2:
            raise InvalidInput("each training fold needs at least 2 observations")
        mean = train.mean(axis=0)
        centered = train - mean
        s = centered.T @ centered / (n - 1 if cfg.unbiased else n)
        s = 0.5 * (s + s.T)
        test = test - mean
        if cfg.use_correlation:
            sd = np.sqrt(np.diag(s))
            bad = np.flatnonzero(~(sd > 0.0))
            if bad.size:
                raise DegenerateVariance(int(bad[0]), f"variable {int(bad[0])} is constant in a training fold")
            s = s / np.outer(sd, sd)
            s = 0.5 * (s + s.T)
            np.fill_diagonal(s, 1.0)
            test = test / sd
        if not np.all(np.isfinite(s)):
            raise InvalidInput("training covariance is not finite")
        self.s = s
        self.test = test
        self.spectrum = None
        if is_rotation_equivariant(cfg.estimator, cfg.target):
            d, v = np.linalg.eigh(s)
            phi = None if cfg.estimator is EstimatorKind.ARCH_II else scalar_target_value(cfg.target, s)
            self.spectrum = (np.maximum(d, 0.0), v, test @ v, phi)

    def score(self, lam, cfg):
        if self.spectrum is None:
            prec = precision_of(ridge_estimate(self.s, cfg.estimator, cfg.target, lam))
            return neg_loglik(self.test, prec)
        d, _, rotated, phi = self.spectrum
        kind = cfg.estimator
        if kind is EstimatorKind.ARCH_II:
            e = d + lam
        elif kind is EstimatorKind.ARCH_I:
            e = np.full_like(d, phi) if lam == 1.0 else d + lam * (phi - d)
        else:
            e = alt_shrink(d - lam * phi, lam)
        if not (e.min() > 1e-14 * e.max() and e.max() > 0):
            raise NearSingular("ridge estimate is numerically singular")
        p = d.size
        quad = np.sum(rotated**2 / e, axis=1)
        return float(np.mean(0.5 * (p * LOG_2PI + np.sum(np.log(e)) + quad)))


class CrossValidator:
    """Held-out negative log-likelihood as a function of the penalty.

    Training-fold statistics are computed once; in rotation-equivariant settings each
    fold's spectrum is cached so every score evaluation costs ``O(n p^2)``.
    """

    def __init__(self, data, cfg):
        y = np.asarray(getattr(data, "values", data), dtype=float)
        if y.ndim != 2:
            raise InvalidInput("data must be an n x p matrix")
        if not np.all(np.isfinite(y)):
            raise InvalidInput("data contain non-finite values")
        self.cfg = cfg
        labels = fold_assignment(y.shape[0], cfg.folds, cfg.seed)
        self.folds = [
            _Fold(y[labels != k], y[labels == k], cfg) for k in range(int(labels.max()) + 1)
        ]

    def score(self, lam):
        lam = self.cfg.estimator.check_penalty(lam)
        return float(np.mean([fold.score(lam, self.cfg) for fold in self.folds]))


def cv_score(data, lam, cfg):
    """Mean held-out negative log-likelihood of the ridge precision at ``lam``."""
    return CrossValidator(data, cfg).score(lam)


def brent_minimize(f, lo, hi, tol=1e-6, max_iter=200):
    """Brent's bounded scalar minimization (golden section with parabolic steps).

    Never evaluates ``f`` outside ``[lo, hi]``. Both endpoints are checked once the
    interior search converges, so boundary minima are returned exactly.

    Returns
    -------
    MinimizeResult
        ``(x, fun, evals, history)`` where ``history`` lists every ``(x, f(x))``.

    Raises
    ------
    ConvergenceFailure
        More than ``max_iter`` evaluations would be needed; carries the best point.
    """
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise InvalidInput("need lo < hi")
    if max_iter < 3:
        raise InvalidInput("max_iter must allow at least 3 evaluations")
    history = []

    def evaluate(x):
        if len(history) >= max_iter:
            best = min(history, key=lambda h: h[1])
            raise ConvergenceFailure(
                f"no convergence within {max_iter} evaluations", best_x=best[0], best_f=best[1]
            )
        fx = float(f(x))
        history.append((x, fx))
        return fx

    a, b = lo, hi
    x = w = v = a + _GOLDEN * (b - a)
    fx = fw = fv = evaluate(x)
    d = e = 0.0
    while True:
        xm = 0.5 * (a + b)
        tol1 = tol * abs(x) + tol / 3.0
        tol2 = 2.0 * tol1
        if abs(x - xm) <= tol2 - 0.5 * (b - a):
            break
        golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            e_prev, e = e, d
            if abs(p) < abs(0.5 * q * e_prev) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = math.copysign(tol1, xm - x)
                golden = False
        if golden:
            e = (b - x) if x < xm else (a - x)
            d = _GOLDEN * e
        u = x + d if abs(d) >= tol1 else x + math.copysign(tol1, d)
        u = min(max(u, lo), hi)
        fu = evaluate(u)
        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    for end in (lo, hi):
        if all(h[0] != end for h in history):
            evaluate(end)
    best_x, best_f = min(history, key=lambda h: h[1])
    return MinimizeResult(best_x, best_f, len(history), history)


def select_penalty(data, cfg):
    """Minimize the cross-validated score over ``ln(lambda)`` in ``[lambda_lo, lambda_hi]``."""
    cv = CrossValidator(data, cfg)
    lo, hi = math.log(cfg.lambda_lo), math.log(cfg.lambda_hi)

    def objective(u):
        lam = min(max(math.exp(u), cfg.lambda_lo), cfg.lambda_hi)
        return cv.score(lam)

    res = brent_minimize(objective, lo, hi, tol=cfg.tol, max_iter=cfg.max_iter)
    clamp = lambda u: min(max(math.exp(u), cfg.lambda_lo), cfg.lambda_hi)  # noqa: E731
    return CVResult(
        lambda_opt=clamp(res.x),
        score_opt=res.fun,
        evaluations=res.evals,
        bracket_history=[(clamp(u), s) for u, s in res.history],
    )
