import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from ridgecond.errors import InvalidInput, NotPositiveSemiDefinite
from ridgecond.spectra import (
    as_symmetric,
    clamp_psd,
    decompose,
    eigenvalues,
    jacobi_eigh,
    matrix_sqrt,
    reconstruct,
)

TWO_BY_TWO = np.array([[2.0, 1.0], [1.0, 2.0]])


def symmetric_matrices(max_p=8):
    entries = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
    return st.integers(1, max_p).flatmap(
        lambda p: hnp.arrays(np.float64, (p, p), elements=entries).map(lambda a: 0.5 * (a + a.T))
    )


def closed_form_2x2(a, b, c):
    """Eigenvalues of [[a, b], [b, c]] from the characteristic polynomial."""
    mean, half_gap = 0.5 * (a + c), math.hypot(0.5 * (a - c), b)
    return mean + half_gap, mean - half_gap


class TestDecompose:
    def test_identity(self):
        d = decompose(np.eye(3))
        np.testing.assert_allclose(d.eigenvalues, 1.0)
        np.testing.assert_allclose(d.eigenvectors.T @ d.eigenvectors, np.eye(3), atol=1e-14)

    def test_diagonal_gives_coordinate_axes(self):
        d = decompose(np.diag([3.0, 1.0, 0.0]))
        np.testing.assert_array_equal(d.eigenvalues, [3.0, 1.0, 0.0])
        np.testing.assert_allclose(np.abs(d.eigenvectors), np.eye(3))

    def test_two_by_two(self):
        d = decompose(TWO_BY_TWO)
        np.testing.assert_allclose(d.eigenvalues, closed_form_2x2(2.0, 1.0, 2.0), rtol=1e-15)
        r = 1.0 / math.sqrt(2.0)
        np.testing.assert_allclose(np.abs(d.eigenvectors[:, 0]), [r, r], atol=1e-15)
        np.testing.assert_allclose(np.abs(d.eigenvectors[:, 1]), [r, r], atol=1e-15)
        assert d.eigenvectors[0, 1] * d.eigenvectors[1, 1] < 0

    @pytest.mark.parametrize("method", ["lapack", "jacobi"])
    def test_descending_and_reconstructs(self, method, rng):
        a = rng.standard_normal((12, 12))
        a = a + a.T
        d = decompose(a, method=method)
        assert np.all(np.diff(d.eigenvalues) <= 0)
        np.testing.assert_allclose(reconstruct(d), a, atol=1e-12)

    def test_jacobi_matches_lapack(self, rng):
        for p in (1, 2, 5, 20):
            a = rng.standard_normal((p, p))
            a = a @ a.T
            jac = decompose(a, method="jacobi")
            lap = decompose(a, method="lapack")
            np.testing.assert_allclose(jac.eigenvalues, lap.eigenvalues, rtol=1e-12, atol=1e-12)

    def test_jacobi_reports_sweeps(self):
        _, _, sweeps = jacobi_eigh(np.diag([1.0, 2.0]))
        assert sweeps == 0

    def test_results_are_read_only(self):
        d = decompose(TWO_BY_TWO)
        with pytest.raises(ValueError):
            d.eigenvalues[0] = 0.0

    @pytest.mark.parametrize(
        "bad",
        [np.array([[1.0, np.nan], [np.nan, 1.0]]), np.array([[1.0, np.inf], [np.inf, 1.0]]), np.ones((2, 3))],
    )
    def test_rejects_invalid(self, bad):
        with pytest.raises(InvalidInput):
            decompose(bad)

    def test_rejects_asymmetric(self):
        with pytest.raises(InvalidInput):
            decompose(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_unknown_method(self):
        with pytest.raises(InvalidInput):
            decompose(np.eye(2), method="qr")

    @settings(max_examples=60, deadline=None)
    @given(symmetric_matrices())
    def test_orthonormal_and_reconstructing(self, a):
        d = decompose(a)
        p = a.shape[0]
        np.testing.assert_allclose(d.eigenvectors.T @ d.eigenvectors, np.eye(p), atol=1e-12)
        scale = max(1.0, float(np.max(np.abs(a))))
        np.testing.assert_allclose(reconstruct(d), a, atol=1e-12 * scale * p)

    @settings(max_examples=30, deadline=None)
    @given(symmetric_matrices(max_p=6))
    def test_jacobi_property(self, a):
        scale = max(1.0, float(np.max(np.abs(a))))
        jac = decompose(a, method="jacobi").eigenvalues
        np.testing.assert_allclose(jac, eigenvalues(a), atol=1e-11 * scale * a.shape[0])

    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(-5, 5, allow_nan=False),
        st.floats(-5, 5, allow_nan=False),
        st.floats(-5, 5, allow_nan=False),
    )
    def test_two_by_two_oracle(self, a, b, c):
        expected = closed_form_2x2(a, b, c)
        np.testing.assert_allclose(eigenvalues([[a, b], [b, c]]), expected, atol=1e-13)


class TestReconstruct:
    def test_shift_on_diagonal(self):
        out = reconstruct(decompose(np.diag([3.0, 0.0])), lambda x: x + 1.0)
        np.testing.assert_allclose(out, np.diag([4.0, 1.0]))

    def test_square_root_eigenvalues(self):
        out = reconstruct(decompose(TWO_BY_TWO), np.sqrt)
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(out)), [1.0, math.sqrt(3.0)], rtol=1e-14)

    def test_output_is_exactly_symmetric(self, rng):
        a = rng.standard_normal((7, 7))
        out = reconstruct(decompose(a @ a.T), np.exp)
        np.testing.assert_array_equal(out, out.T)

    def test_rejects_non_finite_map(self):
        with pytest.raises(InvalidInput), np.errstate(divide="ignore"):
            reconstruct(decompose(np.diag([1.0, 0.0])), lambda x: 1.0 / x)


class TestMatrixSqrt:
    def test_identity(self):
        np.testing.assert_allclose(matrix_sqrt(np.eye(4)), np.eye(4))

    def test_diagonal(self):
        np.testing.assert_allclose(matrix_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_square_reproduces_input(self):
        root = matrix_sqrt(TWO_BY_TWO)
        np.testing.assert_allclose(root @ root, TWO_BY_TWO, atol=1e-8)

    def test_rounding_negatives_are_clamped(self):
        np.testing.assert_allclose(matrix_sqrt(np.diag([4.0, -1e-12])), np.diag([2.0, 0.0]))

    def test_negative_eigenvalue_raises(self):
        with pytest.raises(NotPositiveSemiDefinite):
            matrix_sqrt(np.diag([1.0, -1e-3]))


def test_clamp_psd_is_relative():
    np.testing.assert_array_equal(clamp_psd([1e6, -1e-5]), [1e6, 0.0])
    with pytest.raises(NotPositiveSemiDefinite):
        clamp_psd([1.0, -1e-8])


def test_as_symmetric_averages_rounding():
    a = np.array([[1.0, 2.0], [2.0 + 1e-13, 1.0]])
    out = as_symmetric(a)
    assert out[0, 1] == out[1, 0]
