"""Symmetric eigendecomposition and spectral matrix functions."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NotPositiveSemiDefinite, NumericalFailure

#: Eigenvalues down to ``-PSD_TOL * max(1, |d_1|)`` count as numerical zeros.
PSD_TOL = 1e-10

_SYMMETRY_TOL = 1e-10


def as_symmetric(a, name="matrix"):
    """Validate a square, finite, symmetric matrix and return an exactly symmetric copy.

    Asymmetry up to ``1e-10 * max(1, max|a|)`` is tolerated and averaged away so that
    downstream code can rely on ``a[j, k] == a[k, j]`` bit-for-bit.
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidInput(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > _SYMMETRY_TOL * scale:
        raise InvalidInput(f"{name} is not symmetric")
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigenvalues in descending order and the matching orthonormal eigenvectors.

    Column ``j`` of ``eigenvectors`` belongs to ``eigenvalues[j]``. Both arrays are
    read-only.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    @property
    def dim(self):
        return self.eigenvalues.shape[0]


def _canonical_signs(vectors):
    # largest-magnitude component of each column made non-negative
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def jacobi_eigh(a, tol=1e-12, max_sweeps=100):
    """Cyclic Jacobi eigensolver for a symmetric matrix.

    Sweeps over all upper-triangular pairs until the off-diagonal Frobenius norm
    drops to ``tol * ||a||_F``.

    Returns
    -------
    eigenvalues : ndarray, unsorted
    eigenvectors : ndarray, columns paired with ``eigenvalues``
    sweeps : int
    """
    a = np.array(a, dtype=float, copy=True)
    p = a.shape[0]
    v = np.eye(p)
    target = tol * np.linalg.norm(a)
    for sweep in range(max_sweeps + 1):
        off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off <= target:
            return np.diag(a).copy(), v, sweep
        if sweep == max_sweeps:
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                aij = a[i, j]
                if aij == 0.0:
                    continue
                gap = a[j, j] - a[i, i]
                if abs(aij) <= 1e-300 * max(1.0, abs(gap)):
                    # negligible pivot; rotating would overflow theta
                    a[i, j] = a[j, i] = 0.0
                    continue
                theta = gap / (2.0 * aij)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ci, cj = a[:, i].copy(), a[:, j].copy()
                a[:, i] = c * ci - s * cj
                a[:, j] = s * ci + c * cj
                ri, rj = a[i, :].copy(), a[j, :].copy()
                a[i, :] = c * ri - s * rj
                a[j, :] = s * ri + c * rj
                a[i, j] = a[j, i] = 0.0
                vi, vj = v[:, i].copy(), v[:, j].copy()
                v[:, i] = c * vi - s * vj
                v[:, j] = s * vi + c * vj
    raise NumericalFailure(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def decompose(a, method="lapack"):
    """Spectral decomposition ``a = V diag(d) V^T`` with ``d`` sorted descending.

    Parameters
    ----------
    a : array_like
        Finite symmetric matrix.
    method : {"lapack", "jacobi"}
        ``"lapack"`` calls the divide-and-conquer solver behind
        :func:`numpy.linalg.eigh`; ``"jacobi"`` uses :func:`jacobi_eigh`, which is
        pure Python and only practical for small matrices.
    """
    a = as_symmetric(a)
    if method == "lapack":
        d, v = np.linalg.eigh(a)
    elif method == "jacobi":
        d, v, _ = jacobi_eigh(a)
    else:
        raise InvalidInput(f"unknown eigensolver {method!r}")
    order = np.argsort(d, kind="stable")[::-1]
    d = np.ascontiguousarray(d[order])
    v = _canonical_signs(np.ascontiguousarray(v[:, order]))
    return SpectralDecomp(d, v)


def eigenvalues(a):
    """Eigenvalues only, descending. Cheaper than :func:`decompose`."""
    a = as_symmetric(a)
    return np.linalg.eigvalsh(a)[::-1].copy()


def reconstruct(decomp, f=None):
    """Form ``V diag(f(d)) V^T``.

    ``f`` maps the eigenvalue array elementwise; ``None`` means identity.
    """
    d = decomp.eigenvalues
    fd = d if f is None else np.asarray(f(d), dtype=float)
    if fd.shape != d.shape:
        fd = np.broadcast_to(fd, d.shape)
    if not np.all(np.isfinite(fd)):
        raise InvalidInput("scalar map is not finite on every eigenvalue")
    v = decomp.eigenvectors
    out = (v * fd) @ v.T
    return 0.5 * (out + out.T)


def clamp_psd(d, tol=PSD_TOL):
    """Zero out eigenvalues that are negative only through rounding.

    Raises :class:`NotPositiveSemiDefinite` for anything more negative than
    ``-tol * max(1, |d_max|)``.
    """
    d = np.asarray(d, dtype=float)
    floor = -tol * max(1.0, float(np.max(np.abs(d))))
    if np.min(d) < floor:
        raise NotPositiveSemiDefinite(
            f"smallest eigenvalue {np.min(d):.3g} is below tolerance {floor:.3g}"
        )
    return np.where(d < 0.0, 0.0, d)


def matrix_sqrt(a):
    """Symmetric positive semi-definite square root."""
    decomp = decompose(a)
    root = np.sqrt(clamp_psd(decomp.eigenvalues))
    return reconstruct(decomp, lambda _: root)
