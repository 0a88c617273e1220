import math

import mpmath
import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from ridgecond.errors import PenaltyOutOfDomain, SingularTarget, TargetNotPD
from ridgecond.estimators import (
    EstimatorKind,
    TargetSpec,
    alt_shrink,
    is_rotation_equivariant,
    precision_of,
    ridge_alt,
    ridge_alt_eigmap,
    ridge_arch1,
    ridge_arch2,
    ridge_estimate,
    target_matrix,
)
from ridgecond.errors import NearSingular

ALT, ARCH_I, ARCH_II = EstimatorKind.ALT, EstimatorKind.ARCH_I, EstimatorKind.ARCH_II


def mp_eigmap(d, phi, lam):
    mpmath.mp.dps = 50
    d, phi, lam = mpmath.mpf(d), mpmath.mpf(phi), mpmath.mpf(lam)
    e = d - lam * phi
    return mpmath.sqrt(lam + e * e / 4) + e / 2


def random_psd(rng, p, rank=None):
    x = rng.standard_normal((p, p if rank is None else rank))
    a = x @ x.T
    return a * (p / np.trace(a))


class TestTargets:
    def test_scalar(self):
        np.testing.assert_array_equal(target_matrix(TargetSpec.scalar(2.0), np.ones((3, 3))), 2.0 * np.eye(3))

    def test_average_eigenvalue_of_correlation_is_identity(self, rng):
        y = rng.standard_normal((10, 4))
        r = np.corrcoef(y, rowvar=False)
        np.testing.assert_allclose(target_matrix(TargetSpec.average_eigenvalue(), r), np.eye(4), rtol=1e-15)

    def test_reciprocal_variance(self):
        t = target_matrix(TargetSpec.reciprocal_variance(), np.diag([4.0, 5.0]))
        np.testing.assert_allclose(t, np.diag([0.25, 0.2]))

    def test_null(self):
        np.testing.assert_array_equal(target_matrix(TargetSpec.null(), np.eye(2)), np.zeros((2, 2)))

    def test_reciprocal_variance_zero_diagonal(self):
        with pytest.raises(SingularTarget):
            target_matrix(TargetSpec.reciprocal_variance(), np.diag([1.0, 0.0]))

    def test_average_eigenvalue_of_zero_matrix(self):
        with pytest.raises(SingularTarget):
            target_matrix(TargetSpec.average_eigenvalue(), np.zeros((2, 2)))

    def test_custom_not_pd(self):
        spec = TargetSpec.custom(np.diag([1.0, -1.0]))
        np.testing.assert_array_equal(target_matrix(spec, np.eye(2)), np.diag([1.0, -1.0]))
        with pytest.raises(TargetNotPD):
            target_matrix(spec, np.eye(2), require_pd=True)

    def test_scalar_requires_positive_phi(self):
        with pytest.raises(ValueError):
            TargetSpec.scalar(0.0)


class TestArch1:
    def test_full_shrinkage_returns_target(self):
        t = np.array([[2.0, 0.5], [0.5, 1.0]])
        np.testing.assert_array_equal(ridge_arch1(np.diag([3.0, 0.0]), t, 1.0), t)

    def test_fixed_point(self, rng):
        s = random_psd(rng, 5)
        for lam in (1e-5, 0.3, 0.999):
            np.testing.assert_array_equal(ridge_arch1(s, s, lam), s)

    def test_arithmetic(self):
        np.testing.assert_allclose(ridge_arch1(np.diag([3.0, 0.0]), np.eye(2), 0.5), np.diag([2.0, 0.5]))

    @pytest.mark.parametrize("lam", [0.0, -0.1, 1.0 + 1e-12, math.nan, math.inf])
    def test_domain(self, lam):
        with pytest.raises(PenaltyOutOfDomain):
            ridge_arch1(np.eye(2), np.eye(2), lam)

    def test_null_target_rejected(self):
        with pytest.raises(TargetNotPD):
            ridge_estimate(np.eye(2), ARCH_I, TargetSpec.null(), 0.5)


class TestArch2:
    def test_diagonal(self):
        np.testing.assert_allclose(ridge_arch2(np.diag([3.0, 0.0]), 1.0), np.diag([4.0, 1.0]))

    def test_eigenvalues(self):
        out = ridge_arch2([[2.0, 1.0], [1.0, 2.0]], 0.5)
        np.testing.assert_allclose(np.linalg.eigvalsh(out), [1.5, 3.5])

    @pytest.mark.parametrize("lam", [0.0, -1.0])
    def test_domain(self, lam):
        with pytest.raises(PenaltyOutOfDomain):
            ridge_arch2(np.eye(2), lam)


class TestAlt:
    def test_worked_example_eigenvalues(self):
        d = np.linalg.eigvalsh(ridge_alt(np.diag([3.0, 0.0]), 2.0 * np.eye(2), 1e-10))
        hi, lo = float(mp_eigmap(3, 2, 1e-10)), float(mp_eigmap(0, 2, 1e-10))
        np.testing.assert_allclose(d, [lo, hi], rtol=1e-10)
        assert abs(d[0] - 9.9999e-6) < 1e-10
        assert abs(d[1] / d[0] - 300_003.0) < 1.0

    def test_eigmap_against_high_precision(self):
        # 3 - 1e-10 * 2 / 2 + O(1e-10 / 3): slightly below 3
        value = ridge_alt_eigmap(3.0, 2.0, 1e-10)
        assert abs(value - float(mp_eigmap(3, 2, 1e-10))) <= 1e-12 * 3.0
        assert abs(value - 2.99999999983333) < 1e-13
        assert abs(ridge_alt_eigmap(0.0, 2.0, 1e-10) - 9.9999e-6) < 1e-10

    def test_null_target_at_zero(self):
        np.testing.assert_allclose(ridge_alt(np.zeros((1, 1)), np.zeros((1, 1)), 4.0), [[2.0]])

    def test_large_penalty_limit(self):
        assert abs(ridge_alt_eigmap(0.0, 2.0, 1e8) - 0.5) < 1e-3
        assert abs(ridge_alt_eigmap(3.0, 2.0, 1e8) - 0.5) < 1e-3

    def test_stable_for_large_penalty(self):
        # the naive form cancels catastrophically here
        value = ridge_alt_eigmap(0.0, 1.0, 1e12)
        assert abs(value - float(mp_eigmap(0, 1, 1e12))) <= 1e-14

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(-50, 50, allow_nan=False),
        st.floats(1e-12, 1e8, allow_nan=False),
    )
    def test_shrink_matches_mpmath(self, e, lam):
        mpmath.mp.dps = 50
        exact = mpmath.sqrt(mpmath.mpf(lam) + mpmath.mpf(e) ** 2 / 4) + mpmath.mpf(e) / 2
        assert abs(float(alt_shrink(e, lam)) - float(exact)) <= 1e-14 * float(exact)

    @settings(max_examples=100, deadline=None)
    @given(
        st.floats(0, 100, allow_nan=False),
        st.floats(0, 100, allow_nan=False),
        st.floats(0, 10, allow_nan=False),
        st.floats(1e-8, 1e4, allow_nan=False),
    )
    @example(0.0, 6.497865155061843e-175, 6.564657764077144e-197, 148.0)
    def test_eigmap_monotone_in_d(self, d1, d2, phi, lam):
        lo, hi = min(d1, d2), max(d1, d2)
        assert ridge_alt_eigmap(hi, phi, lam) >= ridge_alt_eigmap(lo, phi, lam)

    def test_full_matrix_matches_eigmap(self, rng):
        for _ in range(20):
            p = int(rng.integers(2, 15))
            s = random_psd(rng, p, rank=int(rng.integers(1, p + 1)))
            phi, lam = float(rng.uniform(0.1, 3)), float(np.exp(rng.uniform(-10, 5)))
            got = np.linalg.eigvalsh(ridge_alt(s, phi * np.eye(p), lam))
            want = np.sort(ridge_alt_eigmap(np.clip(np.linalg.eigvalsh(s), 0, None), phi, lam))
            np.testing.assert_allclose(got, want, rtol=1e-10)

    def test_domain(self):
        with pytest.raises(PenaltyOutOfDomain):
            ridge_alt(np.eye(2), np.eye(2), 0.0)


class TestProperties:
    CASES = [
        (ARCH_II, TargetSpec.null(), 0.7),
        (ARCH_I, TargetSpec.scalar(1.5), 0.4),
        (ARCH_I, TargetSpec.average_eigenvalue(), 0.4),
        (ALT, TargetSpec.scalar(0.5), 2.0),
        (ALT, TargetSpec.null(), 0.01),
        (ALT, TargetSpec.average_eigenvalue(), 5.0),
    ]

    @pytest.mark.parametrize("kind, target, lam", CASES)
    def test_rotation_equivariance_by_commutation(self, kind, target, lam, rng):
        assert is_rotation_equivariant(kind, target)
        for _ in range(10):
            s = random_psd(rng, 8, rank=int(rng.integers(1, 9)))
            est = ridge_estimate(s, kind, target, lam)
            np.testing.assert_allclose(est @ s, s @ est, atol=1e-8)

    def test_non_scalar_target_breaks_equivariance(self, rng):
        target = TargetSpec.reciprocal_variance()
        assert not is_rotation_equivariant(ALT, target)
        s = random_psd(rng, 6) * np.outer(np.arange(1, 7), np.arange(1, 7))
        est = ridge_estimate(s, ALT, target, 1.0)
        assert np.max(np.abs(est @ s - s @ est)) > 1e-6

    @pytest.mark.parametrize(
        "kind, target",
        [
            (ARCH_II, TargetSpec.null()),
            (ARCH_I, TargetSpec.reciprocal_variance()),
            (ALT, TargetSpec.reciprocal_variance()),
            (ALT, TargetSpec.null()),
        ],
    )
    def test_smallest_eigenvalue_positive(self, kind, target, rng):
        for _ in range(20):
            s = random_psd(rng, 6, rank=2) + 1e-3 * np.eye(6)
            lam = float(rng.uniform(1e-4, 1.0))
            assert np.linalg.eigvalsh(ridge_estimate(s, kind, target, lam))[0] > 0


class TestPrecision:
    def test_identity(self):
        np.testing.assert_allclose(precision_of(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(precision_of(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))

    def test_composed(self):
        np.testing.assert_allclose(precision_of(ridge_arch2(np.diag([3.0, 0.0]), 1.0)), np.diag([0.25, 1.0]))

    def test_involution(self, rng):
        for _ in range(10):
            a = random_psd(rng, 7) + 0.5 * np.eye(7)
            np.testing.assert_allclose(precision_of(precision_of(a)), a, atol=1e-6)

    def test_near_singular(self):
        with pytest.raises(NearSingular):
            precision_of(np.diag([1.0, 1e-16]))
