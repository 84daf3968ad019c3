"""Tests for dwt1d.py."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from src.dwt1d import (
    NONDECIMATED,
    SMOOTH_LABEL,
    build_dwt_matrix,
    dwt_forward,
    dwt_inverse,
    dyadic_exponent,
    level_lengths,
    unflatten,
)
from src.errors import TransformError
from src.filterbank import available_filters, get_filter
from src.ndwt1d import ndwt_forward

FAMILIES = available_filters()
SQRT2 = np.sqrt(2.0)
BOUNDED = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(20240611)


class TestDwtForward:
    """Test the pyramid transform."""

    def test_constant_signal(self):
        """Test a constant signal has zero details and a scaled-mean smooth."""
        dec = dwt_forward([1.0, 1.0, 1.0, 1.0], get_filter("haar"), 2)
        assert_allclose(dec.smooth, [2.0], atol=1e-15)
        assert_allclose(dec.details[0], [0.0], atol=1e-15)
        assert_allclose(dec.details[1], [0.0, 0.0], atol=1e-15)

    def test_antisymmetric_pair(self):
        """Test [1, -1] puts all energy in the detail under the fixed convention."""
        dec = dwt_forward([1.0, -1.0], get_filter("haar"), 1)
        assert_allclose(dec.smooth, [0.0], atol=1e-15)
        assert_allclose(dec.detail(1), [SQRT2], atol=1e-15)

    @pytest.mark.parametrize("name", FAMILIES)
    def test_parseval(self, name, rng):
        """Test the coefficient energy equals the signal energy."""
        y = rng.standard_normal(256)
        dec = dwt_forward(y, get_filter(name), 5)
        assert abs(np.sum(dec.flatten() ** 2) - np.sum(y**2)) < 1e-10
        assert abs(sum(dec.energies().values()) - np.sum(y**2)) < 1e-10

    def test_layout_and_labels(self, rng):
        """Test subvectors are coarsest first with matching lengths."""
        dec = dwt_forward(rng.standard_normal(64), get_filter("db4"), 3)
        assert dec.J == 6
        assert dec.labels() == [SMOOTH_LABEL, 3, 2, 1]
        assert [v.size for _, v in dec.subvectors()] == level_lengths(64, 3)
        assert dec.coefficient_count() == 64
        assert dec.detail(1).size == 32

    def test_batched_rows_match_single_rows(self, rng):
        """Test a batch is transformed row by row."""
        fb = get_filter("la8")
        batch = rng.standard_normal((5, 32))
        flat = dwt_forward(batch, fb, 2).flatten()
        for row, expected in zip(batch, flat):
            assert_allclose(dwt_forward(row, fb, 2).flatten(), expected, atol=1e-14)

    @pytest.mark.parametrize(
        "n, L, message",
        [(12, 1, "power-of-two"), (8, 4, "exceeds"), (8, 0, "at least 1"), (1, 1, "too short")],
    )
    def test_invalid_shapes(self, n, L, message):
        """Test length and depth preconditions."""
        with pytest.raises(TransformError, match=message):
            dwt_forward(np.ones(n), get_filter("haar"), L)

    def test_empty_signal(self):
        """Test an empty signal is rejected."""
        with pytest.raises(TransformError):
            dwt_forward([], get_filter("haar"), 1)


class TestDwtInverse:
    """Test reconstruction."""

    def test_small_round_trip(self):
        """Test the Haar round trip of 1..8."""
        fb = get_filter("haar")
        y = np.arange(1.0, 9.0)
        assert_allclose(dwt_inverse(dwt_forward(y, fb, 3), fb), y, atol=1e-12)

    def test_zero_coefficients(self):
        """Test all-zero coefficients reconstruct to zeros."""
        dec = unflatten(np.zeros(16), 16, 2)
        assert_allclose(dwt_inverse(dec, get_filter("db4")), np.zeros(16))

    @pytest.mark.parametrize("name", FAMILIES)
    @pytest.mark.parametrize("n", [8, 64, 512])
    def test_perfect_reconstruction(self, name, n, rng):
        """Test round trips at every valid depth for 100 random signals."""
        fb = get_filter(name)
        batch = rng.standard_normal((100, n))
        for L in range(1, dyadic_exponent(n) + 1):
            restored = dwt_inverse(dwt_forward(batch, fb, L), fb)
            assert np.max(np.abs(restored - batch)) < 1e-10

    def test_rejects_nondecimated(self, rng):
        """Test the inverse refuses a nondecimated decomposition."""
        fb = get_filter("haar")
        dec = ndwt_forward(rng.standard_normal(16), fb, 2)
        with pytest.raises(TransformError, match="orthogonal"):
            dwt_inverse(dec, fb)
        assert dec.scheme == NONDECIMATED

    def test_rejects_inconsistent_lengths(self, rng):
        """Test a tampered decomposition is refused."""
        fb = get_filter("haar")
        dec = dwt_forward(rng.standard_normal(16), fb, 2)
        dec.details[0] = dec.details[0][:-1]
        with pytest.raises(TransformError, match="Inconsistent"):
            dwt_inverse(dec, fb)


class TestUnflatten:
    """Test splitting flattened coefficient vectors."""

    def test_inverse_of_flatten(self, rng):
        """Test unflatten undoes flatten."""
        dec = dwt_forward(rng.standard_normal(32), get_filter("db4"), 3)
        rebuilt = unflatten(dec.flatten(), 32, 3, "db4")
        for (_, a), (_, b) in zip(dec.subvectors(), rebuilt.subvectors()):
            assert_allclose(a, b)

    def test_wrong_size(self):
        """Test a vector of the wrong size is rejected."""
        with pytest.raises(TransformError):
            unflatten(np.zeros(15), 16, 2)


class TestBuildDwtMatrix:
    """Test the dense verification path."""

    def test_single_butterfly(self):
        """Test n=2 Haar gives the 2x2 butterfly."""
        W = build_dwt_matrix(2, get_filter("haar"), 1).entries
        expected = np.array([[1.0, 1.0], [1.0, -1.0]]) / SQRT2
        assert_allclose(W, expected, atol=1e-15)

    @pytest.mark.parametrize("name", FAMILIES)
    @pytest.mark.parametrize("n", [2, 4, 8, 16, 32, 64])
    def test_orthogonality(self, name, n):
        """Test W W^T = I at every depth."""
        fb = get_filter(name)
        for L in range(1, dyadic_exponent(n) + 1):
            W = build_dwt_matrix(n, fb, L)
            assert (W.rows, W.cols) == (n, n)
            assert np.max(np.abs(W.entries @ W.entries.T - np.eye(n))) < 1e-10

    def test_matches_pyramid(self, rng):
        """Test W y equals the flattened pyramid output for 100 random y."""
        fb = get_filter("db4")
        W = build_dwt_matrix(64, fb, 3)
        batch = rng.standard_normal((100, 64))
        expected = dwt_forward(batch, fb, 3).flatten()
        assert_allclose((W.entries @ batch.T).T, expected, atol=1e-10)
        assert_allclose(W.apply(batch[0]), expected[0], atol=1e-10)

    @pytest.mark.parametrize("name", FAMILIES)
    @pytest.mark.parametrize("n", [8, 16, 64])
    def test_matches_pyramid_at_every_depth(self, name, n, rng):
        """Test W y equals the pyramid output for every family, length and depth."""
        fb = get_filter(name)
        batch = rng.standard_normal((20, n))
        for L in range(1, dyadic_exponent(n) + 1):
            W = build_dwt_matrix(n, fb, L)
            expected = dwt_forward(batch, fb, L).flatten()
            assert np.max(np.abs((W.entries @ batch.T).T - expected)) < 1e-10

    def test_size_guard(self):
        """Test the dense guard points to the fast path."""
        with pytest.raises(TransformError, match="dwt_forward"):
            build_dwt_matrix(8192, get_filter("haar"), 1)


class TestDwtInvariants:
    """Property tests of the transform as a linear orthogonal map."""

    @settings(max_examples=50, deadline=None)
    @given(
        signals=arrays(np.float64, (2, 32), elements=BOUNDED),
        a=st.floats(-10, 10),
        b=st.floats(-10, 10),
        name=st.sampled_from(FAMILIES),
        L=st.integers(1, 5),
    )
    def test_linearity(self, signals, a, b, name, L):
        """Test W(ax + by) = aWx + bWy."""
        fb = get_filter(name)
        x, y = signals
        combined = dwt_forward(a * x + b * y, fb, L).flatten()
        separate = a * dwt_forward(x, fb, L).flatten() + b * dwt_forward(y, fb, L).flatten()
        assert_allclose(combined, separate, rtol=1e-9, atol=1e-6)

    @settings(max_examples=50, deadline=None)
    @given(
        signals=arrays(np.float64, (2, 64), elements=BOUNDED),
        name=st.sampled_from(FAMILIES),
        L=st.integers(1, 6),
    )
    def test_inner_products_are_preserved(self, signals, name, L):
        """Test <Wx, Wy> = <x, y> and the levelwise cross-products add up to it."""
        fb = get_filter(name)
        x, y = signals
        dec_x, dec_y = dwt_forward(x, fb, L), dwt_forward(y, fb, L)
        direct = float(np.dot(x, y))
        tolerance = 1e-10 * (np.linalg.norm(x) * np.linalg.norm(y) + 1.0)
        assert abs(float(np.dot(dec_x.flatten(), dec_y.flatten())) - direct) < tolerance
        by_level = sum(
            float(np.dot(a, b))
            for (_, a), (_, b) in zip(dec_x.subvectors(), dec_y.subvectors())
        )
        assert abs(by_level - direct) < tolerance


class TestLevelLengths:
    """Test level length bookkeeping."""

    def test_lengths(self):
        """Test lengths smooth first."""
        assert level_lengths(8, 3) == [1, 1, 2, 4]
        assert level_lengths(64, 2) == [16, 16, 32]

    def test_dyadic_exponent(self):
        """Test exponent and rejection of non-dyadic lengths."""
        assert dyadic_exponent(1024) == 10
        with pytest.raises(TransformError):
            dyadic_exponent(96)
