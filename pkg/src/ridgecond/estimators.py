"""Ridge-type covariance estimators, their targets, and precision matrices.

Three families are provided:

* ``ARCH_I``  -- convex combination ``(1 - lam) S + lam T`` with ``lam`` in (0, 1].
* ``ARCH_II`` -- diagonal inflation ``S + lam I`` with ``lam`` in (0, inf).
* ``ALT``     -- the l2-penalized estimator
  ``[lam I + (S - lam T)^2 / 4]^{1/2} + (S - lam T) / 2`` with ``lam`` in (0, inf).
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidInput,
    NearSingular,
    NumericalFailure,
    PenaltyOutOfDomain,
    SingularTarget,
    TargetNotPD,
)
from .spectra import as_symmetric, decompose, reconstruct


class EstimatorKind(enum.Enum):
    ARCH_I = "arch1"
    ARCH_II = "arch2"
    ALT = "alt"

    @classmethod
    def parse(cls, text):
        key = str(text).strip().lower()
        aliases = {"archi": "arch1", "archii": "arch2", "arch_i": "arch1", "arch_ii": "arch2"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise InvalidInput(f"unknown estimator type {text!r}; use arch1, arch2 or alt") from None

    @property
    def domain(self):
        """Half-open penalty domain ``(0, upper]`` as a readable string."""
        return "(0, 1]" if self is EstimatorKind.ARCH_I else "(0, inf)"

    def check_penalty(self, lam):
        lam = float(lam)
        ok = np.isfinite(lam) and lam > 0.0
        if self is EstimatorKind.ARCH_I:
            ok = ok and lam <= 1.0
        if not ok:
            raise PenaltyOutOfDomain(
                f"penalty {lam!r} outside the {self.value} domain {self.domain}"
            )
        return lam


class TargetKind(enum.Enum):
    NULL = "null"
    SCALAR = "scalar"
    AVERAGE_EIGENVALUE = "average-eigenvalue"
    RECIPROCAL_VARIANCE = "reciprocal-variance"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TargetSpec:
    """Description of a shrinkage target, resolved against data by :func:`target_matrix`.

    Use the constructors :meth:`null`, :meth:`scalar`, :meth:`average_eigenvalue`,
    :meth:`reciprocal_variance` and :meth:`custom`.
    """

    kind: TargetKind
    phi: float = None
    matrix: np.ndarray = None

    def __post_init__(self):
        if self.kind is TargetKind.SCALAR:
            if self.phi is None or not np.isfinite(self.phi) or self.phi <= 0:
                raise InvalidInput(f"scalar target needs phi > 0, got {self.phi!r}")
        if self.kind is TargetKind.CUSTOM:
            if self.matrix is None:
                raise InvalidInput("custom target needs a matrix")
            m = as_symmetric(self.matrix, "target")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)

    @classmethod
    def null(cls):
        return cls(TargetKind.NULL)

    @classmethod
    def scalar(cls, phi):
        return cls(TargetKind.SCALAR, phi=float(phi))

    @classmethod
    def average_eigenvalue(cls):
        return cls(TargetKind.AVERAGE_EIGENVALUE)

    @classmethod
    def reciprocal_variance(cls):
        return cls(TargetKind.RECIPROCAL_VARIANCE)

    @classmethod
    def custom(cls, matrix):
        return cls(TargetKind.CUSTOM, matrix=np.asarray(matrix, dtype=float))

    @property
    def is_scalar(self):
        """Whether the target is a multiple of the identity for every input."""
        return self.kind in (TargetKind.NULL, TargetKind.SCALAR, TargetKind.AVERAGE_EIGENVALUE)


def scalar_target_value(spec, s):
    """The ``phi`` of a target of the form ``phi * I``, or ``None`` if not scalar."""
    if spec.kind is TargetKind.NULL:
        return 0.0
    if spec.kind is TargetKind.SCALAR:
        return spec.phi
    if spec.kind is TargetKind.AVERAGE_EIGENVALUE:
        s = np.asarray(s, dtype=float)
        total = float(np.trace(s))
        if not total > 0.0:
            raise SingularTarget("average eigenvalue is not positive; cannot take its reciprocal")
        return s.shape[0] / total
    return None


def _is_pd(m):
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return False
    return True


def target_matrix(spec, s, require_pd=False):
    """Build the target matrix for sample covariance (or correlation) ``s``.

    Raises
    ------
    SingularTarget
        A data-driven target would divide by zero.
    TargetNotPD
        ``require_pd`` is set and the target is not positive definite.
    """
    s = np.asarray(s, dtype=float)
    p = s.shape[0]
    if spec.kind is TargetKind.RECIPROCAL_VARIANCE:
        diag = np.diag(s)
        bad = np.flatnonzero(diag <= 0.0)
        if bad.size:
            raise SingularTarget(f"variable {int(bad[0])} has non-positive variance")
        t = np.diag(1.0 / diag)
    elif spec.kind is TargetKind.CUSTOM:
        if spec.matrix.shape != s.shape:
            raise InvalidInput(f"target shape {spec.matrix.shape} does not match {s.shape}")
        t = np.array(spec.matrix)
    else:
        t = scalar_target_value(spec, s) * np.eye(p)
    if require_pd and not _is_pd(t):
        raise TargetNotPD(f"{spec.kind.value} target is not positive definite")
    return t


def ridge_arch1(s, t, lam):
    """Convex combination ``(1 - lam) s + lam t``; ``t`` must be positive definite."""
    lam = EstimatorKind.ARCH_I.check_penalty(lam)
    s = as_symmetric(s, "s")
    t = as_symmetric(t, "target")
    if s.shape != t.shape:
        raise InvalidInput("s and target dimensions differ")
    if not _is_pd(t):
        raise TargetNotPD("archetypal I estimator needs a positive definite target")
    if lam == 1.0:
        return t
    # this form returns s bit-for-bit when t == s
    return s + lam * (t - s)


def ridge_arch2(s, lam):
    """Diagonal inflation ``s + lam I``."""
    lam = EstimatorKind.ARCH_II.check_penalty(lam)
    s = as_symmetric(s, "s")
    return s + lam * np.eye(s.shape[0])


def alt_shrink(e, lam):
    """``sqrt(lam + e^2/4) + e/2`` evaluated without cancellation for negative ``e``.

    Uses ``(sqrt(lam + e^2/4) + e/2) (sqrt(lam + e^2/4) - e/2) = lam``.
    """
    e = np.asarray(e, dtype=float)
    lam = np.asarray(lam, dtype=float)
    root = np.sqrt(lam + 0.25 * e * e)
    with np.errstate(divide="ignore", invalid="ignore"):
        negative = lam / (root - 0.5 * e)
    # cap at fl(sqrt(lam)) so rounding cannot break monotonicity across e = 0
    negative = np.minimum(negative, np.sqrt(lam))
    return np.where(e >= 0.0, root + 0.5 * e, negative)


def ridge_alt_eigmap(d, phi, lam):
    """Eigenvalue map of the alternative estimator under target ``phi * I``.

    Sends a sample eigenvalue ``d`` to ``sqrt(lam + (d - lam phi)^2 / 4) + (d - lam phi) / 2``.
    Works elementwise on arrays and broadcasts ``d`` against ``lam``.
    """
    if np.any(np.asarray(lam) <= 0):
        raise PenaltyOutOfDomain("alternative estimator needs lam > 0")
    if np.any(np.asarray(phi) < 0):
        raise InvalidInput("phi must be non-negative")
    out = alt_shrink(np.asarray(d, dtype=float) - np.asarray(lam) * phi, lam)
    return out if out.ndim else float(out)


def ridge_alt(s, t, lam):
    """Alternative ridge estimator ``[lam I + (s - lam t)^2/4]^{1/2} + (s - lam t)/2``.

    The square-root term commutes with ``s - lam t``, so a single decomposition of
    ``s - lam t`` gives the whole estimate.
    """
    lam = EstimatorKind.ALT.check_penalty(lam)
    s = as_symmetric(s, "s")
    t = as_symmetric(t, "target")
    if s.shape != t.shape:
        raise InvalidInput("s and target dimensions differ")
    decomp = decompose(s - lam * t)
    shrunk = alt_shrink(decomp.eigenvalues, lam)
    if not np.all(np.isfinite(shrunk)) or np.min(shrunk) <= 0.0:
        raise NumericalFailure("alternative estimator lost positive definiteness")
    return reconstruct(decomp, lambda _: shrunk)


def ridge_estimate(s, kind, target, lam):
    """Dispatch to the estimator ``kind`` with target described by ``target``.

    ``target`` is ignored for ``ARCH_II``. ``NULL`` targets are only accepted by ``ALT``.
    """
    kind = kind if isinstance(kind, EstimatorKind) else EstimatorKind.parse(kind)
    if kind is EstimatorKind.ARCH_II:
        return ridge_arch2(s, lam)
    check_combination(kind, target)
    t = target_matrix(target, s, require_pd=kind is EstimatorKind.ARCH_I)
    if kind is EstimatorKind.ARCH_I:
        return ridge_arch1(s, t, lam)
    return ridge_alt(s, t, lam)


def check_combination(kind, target):
    if kind is EstimatorKind.ARCH_I and target.kind is TargetKind.NULL:
        raise TargetNotPD("the null target is only allowed with the alternative estimator")


def is_rotation_equivariant(kind, target):
    """Whether the estimate keeps the eigenvectors of its input for every input."""
    return kind is EstimatorKind.ARCH_II or target.is_scalar


def precision_of(estimate):
    """Inverse of a positive definite estimate via its spectral decomposition."""
    decomp = decompose(estimate)
    d = decomp.eigenvalues
    if not d[-1] > 1e-14 * d[0] or d[0] <= 0.0:
        raise NearSingular(
            f"smallest eigenvalue {d[-1]:.3g} too small relative to largest {d[0]:.3g}"
        )
    return reconstruct(decomp, lambda x: 1.0 / x)
