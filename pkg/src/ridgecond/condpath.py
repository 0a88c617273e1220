"""Condition numbers along a penalty grid, interpretational aids, and diagnostics."""

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .estimators import (
    EstimatorKind,
    alt_shrink,
    check_combination,
    is_rotation_equivariant,
    scalar_target_value,
    target_matrix,
)
from .spectra import as_symmetric, clamp_psd, decompose

#: Returned by :func:`digits_lost` for an infinite condition number.
INFINITE_LOSS = -1


class Norm(enum.Enum):
    SPECTRAL = 2
    ONE = 1

    @classmethod
    def parse(cls, value):
        try:
            return cls(int(value))
        except (TypeError, ValueError):
            raise InvalidInput(f"norm must be 2 or 1, got {value!r}") from None


@dataclass(frozen=True)
class PenaltyGrid:
    """``steps`` log-equidistant penalties from ``lambda_min`` to ``lambda_max`` inclusive."""

    lambda_min: float
    lambda_max: float
    steps: int
    values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lo, hi, steps = float(self.lambda_min), float(self.lambda_max), int(self.steps)
        if not (np.isfinite(lo) and np.isfinite(hi) and 0.0 < lo < hi):
            raise InvalidInput(f"need 0 < lambda_min < lambda_max, got {lo!r}, {hi!r}")
        if steps < 3:
            raise InvalidInput(f"need at least 3 grid steps, got {steps}")
        values = np.exp(np.linspace(math.log(lo), math.log(hi), steps))
        values[0], values[-1] = lo, hi
        values.setflags(write=False)
        object.__setattr__(self, "lambda_min", lo)
        object.__setattr__(self, "lambda_max", hi)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "values", values)

    @property
    def tau(self):
        """Uniform spacing of the grid in natural-log units."""
        return (math.log(self.lambda_max) - math.log(self.lambda_min)) / (self.steps - 1)

    @property
    def log_values(self):
        return np.log(self.values)


@dataclass
class ConditionPath:
    grid: PenaltyGrid
    cond: np.ndarray
    norm: Norm = Norm.SPECTRAL
    digits_lost: np.ndarray = None
    acceleration: np.ndarray = None
    knee: tuple = None

    def with_aids(self):
        """Fill in digit loss and (spectral paths only) the acceleration aid."""
        self.digits_lost = np.array([digits_lost(c) for c in self.cond], dtype=int)
        if self.norm is Norm.SPECTRAL:
            self.acceleration = acceleration(self)
        return self


def spectral_condition(a):
    """Ratio of largest to smallest eigenvalue; ``inf`` for singular ``a``."""
    d = np.linalg.eigvalsh(as_symmetric(a))
    return _ratio(d[-1], d[0])


def _ratio(top, bottom):
    if not top > 0.0:
        raise InvalidInput("largest eigenvalue is not positive")
    if bottom <= 0.0:
        return math.inf
    return float(top / bottom)


def one_norm_condition(a, a_inv):
    """Product of the maximum absolute column sums of ``a`` and of its inverse."""
    a = np.asarray(a, dtype=float)
    a_inv = np.asarray(a_inv, dtype=float)
    return float(np.abs(a).sum(axis=0).max() * np.abs(a_inv).sum(axis=0).max())


def digits_lost(cond):
    """``floor(log10(cond))``: decimal digits one may lose when inverting."""
    cond = float(cond)
    if math.isinf(cond):
        return INFINITE_LOSS
    if not cond >= 1.0:
        raise InvalidInput(f"condition number must be >= 1, got {cond!r}")
    return int(math.floor(math.log10(cond)))


def acceleration(path):
    """Central second difference of ``cond`` against ``ln(lambda)`` at interior points.

    Entry ``i`` belongs to grid index ``i + 1``. Entries whose stencil touches an
    infinite condition number are ``nan``.
    """
    if path.norm is not Norm.SPECTRAL:
        raise InvalidInput("the acceleration aid is defined for the spectral condition number")
    c = np.asarray(path.cond, dtype=float)
    if c.size < 3:
        raise InvalidInput("acceleration needs at least 3 grid points")
    with np.errstate(invalid="ignore"):
        acc = (c[2:] - 2.0 * c[1:-1] + c[:-2]) / path.grid.tau**2
    acc[~(np.isfinite(c[2:]) & np.isfinite(c[1:-1]) & np.isfinite(c[:-2]))] = np.nan
    return acc


def default_knee_window(steps):
    return max(3, int(steps) // 100)


def find_knee(path, rel_tol=0.01, window=None, scale="point"):
    """First grid point where the condition number has relatively stabilized.

    Returns ``(lambda, index)`` for the smallest ``k`` such that every step drop
    ``cond[s] - cond[s+1]`` for ``s`` in ``k .. k + window - 1`` is at most ``rel_tol``
    times a reference, or ``None`` when the grid holds no such run.

    ``scale="point"`` uses ``cond[s]`` as the reference. The drop per step then
    shrinks with the grid spacing, so finer grids need a smaller ``rel_tol``.
    ``scale="range"`` uses the mean drop per step over the finite part of the path,
    which does not depend on the number of steps; values around 0.25 pick out the
    bend of the curve as it appears on a linear plot.
    """
    if not 0.0 < rel_tol < 1.0:
        raise InvalidInput(f"rel_tol must lie in (0, 1), got {rel_tol!r}")
    c = np.asarray(path.cond, dtype=float)
    window = default_knee_window(c.size) if window is None else int(window)
    if window < 1:
        raise InvalidInput("knee window must be at least 1")
    with np.errstate(invalid="ignore"):
        drops = c[:-1] - c[1:]
        if scale == "point":
            ref = c[:-1]
        elif scale == "range":
            finite = np.flatnonzero(np.isfinite(c))
            if finite.size < 2:
                return None
            span = finite[-1] - finite[0]
            mean_drop = max((c[finite[0]] - c[finite[-1]]) / span, 0.0)
            ref = np.full(drops.shape, mean_drop)
        else:
            raise InvalidInput(f"unknown knee scale {scale!r}")
        calm = np.isfinite(drops) & np.isfinite(ref) & (drops <= rel_tol * ref)
    if calm.size < window:
        return None
    runs = np.convolve(calm.astype(int), np.ones(window, dtype=int), mode="valid")
    hits = np.flatnonzero(runs == window)
    if hits.size == 0:
        return None
    k = int(hits[0])
    return float(path.grid.values[k]), k


def _eigen_map(kind, d, lam, phi):
    """Estimate eigenvalues for sample eigenvalues ``d`` (rows: penalties)."""
    lam = np.asarray(lam, dtype=float)[:, None]
    if kind is EstimatorKind.ARCH_II:
        return d + lam
    if kind is EstimatorKind.ARCH_I:
        out = d + lam * (phi - d)
        out[lam[:, 0] == 1.0] = phi
        return out
    return alt_shrink(d - lam * phi, lam)


def _conds_from_eigenvalues(e):
    top = e.max(axis=1)
    bottom = e.min(axis=1)
    with np.errstate(divide="ignore"):
        cond = top / bottom
    cond[bottom <= 0.0] = math.inf
    return cond


def _fast_path(s, kind, target, grid, norm):
    lam = grid.values
    phi = None if kind is EstimatorKind.ARCH_II else scalar_target_value(target, s)
    if norm is Norm.SPECTRAL:
        d = clamp_psd(np.linalg.eigvalsh(s))
        # every eigenvalue map is non-decreasing in d, so the extremes stay extremes
        return _conds_from_eigenvalues(_eigen_map(kind, d[[0, -1]], lam, phi))
    decomp = decompose(s)
    d = clamp_psd(decomp.eigenvalues)
    v = decomp.eigenvectors
    e = _eigen_map(kind, d, lam, phi)
    cond = np.empty(lam.size)
    for i, ei in enumerate(e):
        cond[i] = _one_norm_from_spectrum(v, ei)
    return cond


def _one_norm_from_spectrum(v, e):
    if e.min() <= 0.0:
        return math.inf
    est = (v * e) @ v.T
    inv = (v / e) @ v.T
    return one_norm_condition(est, inv)


def _slow_point(s, kind, t, lam, norm):
    if kind is EstimatorKind.ARCH_II:
        est = s + lam * np.eye(s.shape[0])
    elif kind is EstimatorKind.ARCH_I:
        est = t if lam == 1.0 else s + lam * (t - s)
    else:
        m = s - lam * t
        if norm is Norm.SPECTRAL:
            return float(_conds_from_eigenvalues(alt_shrink(np.linalg.eigvalsh(m), lam)[None, :])[0])
        e, v = np.linalg.eigh(m)
        return _one_norm_from_spectrum(v, alt_shrink(e, lam))
    if norm is Norm.SPECTRAL:
        return float(_conds_from_eigenvalues(np.linalg.eigvalsh(est)[None, :])[0])
    e, v = np.linalg.eigh(est)
    return _one_norm_from_spectrum(v, e)


def _slow_path(s, kind, target, grid, norm, threads):
    t = None
    if kind is not EstimatorKind.ARCH_II:
        t = target_matrix(target, s, require_pd=kind is EstimatorKind.ARCH_I)
    cond = np.empty(grid.steps)

    def work(i):
        cond[i] = _slow_point(s, kind, t, float(grid.values[i]), norm)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(grid.steps)))
    else:
        for i in range(grid.steps):
            work(i)
    return cond


def condition_path(s, kind, target, grid, norm=Norm.SPECTRAL, method="auto", threads=1):
    """Condition number of the ridge estimate of ``s`` at every grid penalty.

    Parameters
    ----------
    s : array_like
        Sample covariance or correlation matrix.
    kind : EstimatorKind
    target : TargetSpec
        Ignored for ``ARCH_II``.
    grid : PenaltyGrid
    norm : Norm
    method : {"auto", "fast", "slow"}
        ``"fast"`` decomposes ``s`` once and maps its eigenvalues per penalty, which is
        only valid for rotation-equivariant configurations. ``"slow"`` forms and
        decomposes the estimate at every penalty. ``"auto"`` picks ``"fast"`` whenever
        it is valid.
    threads : int
        Worker threads for the slow path.
    """
    kind = kind if isinstance(kind, EstimatorKind) else EstimatorKind.parse(kind)
    norm = norm if isinstance(norm, Norm) else Norm.parse(norm)
    s = as_symmetric(s, "s")
    if kind is EstimatorKind.ARCH_I:
        EstimatorKind.ARCH_I.check_penalty(grid.lambda_max)
    if kind is not EstimatorKind.ARCH_II:
        check_combination(kind, target)
    equivariant = is_rotation_equivariant(kind, target)
    if method == "auto":
        method = "fast" if equivariant else "slow"
    if method == "fast":
        if not equivariant:
            raise InvalidInput("the one-decomposition path needs a rotation-equivariant setting")
        cond = _fast_path(s, kind, target, grid, norm)
    elif method == "slow":
        cond = _slow_path(s, kind, target, grid, norm, threads)
    else:
        raise InvalidInput(f"unknown path method {method!r}")
    if norm is Norm.ONE:
        # rounding in the explicit inverse can push an exact 1 a hair below it
        cond = np.maximum(cond, 1.0)
    return ConditionPath(grid=grid, cond=cond, norm=norm)


def equicorrelation(p, rho):
    """The matrix ``(1 - rho) I + rho J`` of ``p`` unit-variance, equicorrelated variates."""
    _check_equicorr(p, rho)
    return (1.0 - rho) * np.eye(p) + rho * np.ones((p, p))


def equicorr_eigenvalues(p, rho):
    """``p rho + 1 - rho`` once and ``1 - rho`` with multiplicity ``p - 1``, descending."""
    _check_equicorr(p, rho)
    vals = np.array([p * rho + 1.0 - rho] + [1.0 - rho] * (p - 1))
    return np.sort(vals)[::-1]


def equicorr_condition(p, rho):
    """Closed form ``1 + p rho / (1 - rho)``.

    This is the spectral condition number for ``rho >= 0``. For negative ``rho`` the
    large eigenvalue becomes the small one and the expression equals the reciprocal
    of the condition number.
    """
    _check_equicorr(p, rho)
    return 1.0 + p * rho / (1.0 - rho)


def _check_equicorr(p, rho):
    if int(p) != p or p < 2:
        raise InvalidInput(f"p must be an integer >= 2, got {p!r}")
    if not -1.0 / (p - 1) < rho < 1.0:
        raise InvalidInput(f"rho must lie in (-1/(p-1), 1), got {rho!r}")


def contaminated_eigenvalues(d, c, mix):
    """Eigenvalues of ``(1 - mix) Sigma + c mix I`` given those of ``Sigma``."""
    d = np.asarray(d, dtype=float)
    if not c > 0:
        raise InvalidInput("contamination scale c must be positive")
    if not 0.0 <= mix <= 1.0:
        raise InvalidInput("mixing proportion must lie in [0, 1]")
    return (1.0 - mix) * d + c * mix
