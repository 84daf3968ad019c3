"""Tests for wt2d.py."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.depstats import pearson
from src.dwt1d import NONDECIMATED, ORTHOGONAL, SMOOTH_LABEL, build_dwt_matrix
from src.errors import TransformError
from src.filterbank import get_filter
from src.ndwt1d import build_ndwt_matrix
from src.wt2d import (
    diagonal_block_labels,
    diagonal_block_series,
    separable_transform,
    wt2d_forward,
)


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(42)


class TestWt2dForward:
    """Test the separable 2D transform."""

    def test_constant_image_orthogonal(self):
        """Test an all-ones image has a single nonzero smooth entry."""
        dec = wt2d_forward(np.ones((4, 4)), get_filter("haar"), 2, scheme=ORTHOGONAL)
        expected = np.zeros((4, 4))
        expected[0, 0] = 4.0
        assert_allclose(dec.full, expected, atol=1e-14)
        assert_allclose(dec.diagonal_blocks[0], [[4.0]], atol=1e-14)
        for block in dec.diagonal_blocks[1:]:
            assert np.max(np.abs(block)) < 1e-14

    def test_nondecimated_shapes(self, rng):
        """Test the full matrix and diagonal block sizes."""
        dec = wt2d_forward(rng.standard_normal((8, 8)), get_filter("haar"), 2)
        assert dec.scheme == NONDECIMATED
        assert dec.full.shape == (24, 24)
        assert [block.shape for block in dec.diagonal_blocks] == [(8, 8)] * 3

    def test_orthogonal_matches_dense_oracle(self, rng):
        """Test full = W A W^T with the dense DWT matrix."""
        fb = get_filter("db4")
        A = rng.standard_normal((16, 16))
        W = build_dwt_matrix(16, fb, 2).entries
        dec = wt2d_forward(A, fb, 2, scheme=ORTHOGONAL)
        assert_allclose(dec.full, W @ A @ W.T, atol=1e-10)

    def test_nondecimated_matches_dense_oracle(self, rng):
        """Test full = W A W^T with the dense NDWT matrix."""
        fb = get_filter("haar")
        A = rng.standard_normal((8, 8))
        W = build_ndwt_matrix(8, fb, 2).entries
        dec = wt2d_forward(A, fb, 2)
        assert_allclose(dec.full, W @ A @ W.T, atol=1e-10)

    @pytest.mark.parametrize("scheme", [ORTHOGONAL, NONDECIMATED])
    def test_pass_order_is_irrelevant(self, scheme, rng):
        """Test rows-first and columns-first passes agree."""
        fb = get_filter("coif6")
        A = rng.standard_normal((32, 32))
        rows_first = separable_transform(A, fb, 2, scheme, rows_first=True)
        columns_first = separable_transform(A, fb, 2, scheme, rows_first=False)
        assert_allclose(rows_first, columns_first, atol=1e-10)

    @pytest.mark.parametrize("scheme", [ORTHOGONAL, NONDECIMATED])
    def test_direct_blocks_match_full(self, scheme, rng):
        """Test blocks computed without the full matrix agree with sliced blocks."""
        fb = get_filter("db4")
        A = rng.standard_normal((16, 16))
        full = wt2d_forward(A, fb, 2, scheme=scheme)
        direct = wt2d_forward(A, fb, 2, scheme=scheme, keep_full=False)
        assert direct.full is None
        for a, b in zip(full.diagonal_blocks, direct.diagonal_blocks):
            assert_allclose(a, b, atol=1e-12)

    @pytest.mark.parametrize("name", ["haar", "db4", "coif6"])
    def test_nondecimated_shift_equivariance(self, name, rng):
        """Test circular shifts of an image shift every diagonal block alike."""
        fb = get_filter(name)
        A = rng.standard_normal((32, 32))
        blocks = wt2d_forward(A, fb, 2).diagonal_blocks
        for shift in [(3, 5), (0, 7), (16, 1)]:
            moved = wt2d_forward(np.roll(A, shift, axis=(0, 1)), fb, 2).diagonal_blocks
            for original, shifted in zip(blocks, moved):
                assert_allclose(shifted, np.roll(original, shift, axis=(0, 1)), atol=1e-12)

    def test_nondecimated_correlations_survive_shifts(self, rng):
        """Test levelwise image correlations are unchanged by a joint shift."""
        fb = get_filter("db4")
        A, B = rng.standard_normal((2, 32, 32))
        A = A + B
        before = [
            pearson(a, b)
            for a, b in zip(
                diagonal_block_series(wt2d_forward(A, fb, 2)),
                diagonal_block_series(wt2d_forward(B, fb, 2)),
            )
        ]
        shift = (3, 5)
        after = [
            pearson(a, b)
            for a, b in zip(
                diagonal_block_series(wt2d_forward(np.roll(A, shift, axis=(0, 1)), fb, 2)),
                diagonal_block_series(wt2d_forward(np.roll(B, shift, axis=(0, 1)), fb, 2)),
            )
        ]
        assert np.max(np.abs(np.subtract(before, after))) < 1e-10

    def test_orthogonal_energy(self, rng):
        """Test the orthogonal 2D transform preserves energy."""
        A = rng.standard_normal((32, 32))
        dec = wt2d_forward(A, get_filter("la8"), 2, scheme=ORTHOGONAL)
        assert abs(np.sum(dec.full**2) - np.sum(A**2)) < 1e-9

    @pytest.mark.parametrize(
        "image, scheme, message",
        [
            (np.ones((4, 8)), ORTHOGONAL, "square"),
            (np.ones(16), ORTHOGONAL, "2D"),
            (np.ones((12, 12)), ORTHOGONAL, "power-of-two"),
            (np.ones((8, 8)), "wavelet-packet", "Unknown scheme"),
        ],
    )
    def test_invalid_images(self, image, scheme, message):
        """Test shape and scheme checks."""
        with pytest.raises(TransformError, match=message):
            wt2d_forward(image, get_filter("haar"), 1, scheme=scheme)


class TestDiagonalBlockSeries:
    """Test the per-level coefficient vectors."""

    def test_lengths_and_labels(self, rng):
        """Test L+1 vectors of n^2 coefficients, smooth first."""
        dec = wt2d_forward(rng.standard_normal((8, 8)), get_filter("haar"), 2)
        series = diagonal_block_series(dec)
        assert [v.size for v in series] == [64, 64, 64]
        assert diagonal_block_labels(dec) == [SMOOTH_LABEL, 2, 1]

    def test_constant_image(self):
        """Test detail vectors of a constant image vanish."""
        dec = wt2d_forward(np.full((16, 16), 2.0), get_filter("db4"), 2)
        for vector in diagonal_block_series(dec)[1:]:
            assert np.max(np.abs(vector)) < 1e-12

    def test_identical_images_correlate_perfectly(self, rng):
        """Test per-level correlations of an image with itself."""
        A = rng.standard_normal((16, 16))
        fb = get_filter("haar")
        first = diagonal_block_series(wt2d_forward(A, fb, 2))
        second = diagonal_block_series(wt2d_forward(A.copy(), fb, 2))
        for a, b in zip(first, second):
            assert pearson(a, b) == pytest.approx(1.0, abs=1e-12)
