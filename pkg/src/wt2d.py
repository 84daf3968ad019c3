"""Two-dimensional wavelet transforms of square images.

Orthogonal:    D = W A W^T with W the n x n DWT matrix (scale-mixing tessellation).
Nondecimated:  D = W A W^T with W the (L+1)n x n NDWT matrix.

Both are computed separably (rows, then columns) with the 1D fast transforms.
Correlations are defined on the diagonal hierarchy only: the L+1 blocks where the
row and column scales coincide.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from logutils import get_logger
from src.dwt1d import (
    NONDECIMATED,
    ORTHOGONAL,
    SCHEMES,
    Decomposition1D,
    Label,
    SMOOTH_LABEL,
    dwt_forward,
    level_lengths,
)
from src.errors import TransformError
from src.filterbank import FilterBank
from src.ndwt1d import ndwt_forward

logger = get_logger(__name__)


@dataclass
class Decomposition2D:
    """Coefficients of a 2D transform.

    Attributes:
        scheme: "orthogonal" or "nondecimated".
        n: Image side.
        L: Number of levels.
        full: Full coefficient matrix (n x n, or (L+1)n x (L+1)n); None when only
            the diagonal blocks were computed.
        diagonal_blocks: L+1 square blocks, smooth first, then details coarsest
            to finest.
        wavelet: Name of the filter bank used.
    """

    scheme: str
    n: int
    L: int
    full: Optional[np.ndarray]
    diagonal_blocks: List[np.ndarray] = field(default_factory=list)
    wavelet: str = ""


def _transform_1d(values: np.ndarray, fb: FilterBank, L: int, scheme: str) -> Decomposition1D:
    if scheme == ORTHOGONAL:
        return dwt_forward(values, fb, L)
    return ndwt_forward(values, fb, L)


def _segment_lengths(n: int, L: int, scheme: str) -> List[int]:
    if scheme == ORTHOGONAL:
        return level_lengths(n, L)
    return [n] * (L + 1)


def _check_image(A: np.ndarray, scheme: str) -> int:
    if scheme not in SCHEMES:
        raise TransformError(
            f"Unknown scheme '{scheme}'; expected one of {', '.join(SCHEMES)}"
        )
    if A.ndim != 2:
        raise TransformError(f"Expected a 2D image (got {A.ndim} dimensions)")
    rows, cols = A.shape
    if rows != cols:
        raise TransformError(f"Image must be square (got {rows} x {cols})")
    return rows


def separable_transform(
    A, fb: FilterBank, L: int, scheme: str, rows_first: bool = True
) -> np.ndarray:
    """Full two-sided transform W A W^T by row and column passes."""
    A = np.asarray(A, dtype=float)
    _check_image(A, scheme)
    if rows_first:
        row_pass = _transform_1d(A, fb, L, scheme).flatten()  # A W^T
        return _transform_1d(row_pass.T, fb, L, scheme).flatten().T
    column_pass = _transform_1d(A.T, fb, L, scheme).flatten().T  # W A
    return _transform_1d(column_pass, fb, L, scheme).flatten()


def _diagonal_blocks_direct(
    A: np.ndarray, fb: FilterBank, L: int, scheme: str
) -> List[np.ndarray]:
    """Diagonal blocks without materialising the full coefficient matrix."""
    row_subvectors = [vector for _, vector in _transform_1d(A, fb, L, scheme).subvectors()]
    blocks = []
    for index, rows in enumerate(row_subvectors):
        # rows: A W_i^T; transform its columns and keep subvector i again
        columns = _transform_1d(rows.T, fb, L, scheme).subvectors()[index][1]
        blocks.append(columns.T)
    return blocks


def wt2d_forward(
    A, fb: FilterBank, L: int, scheme: str = NONDECIMATED, keep_full: bool = True
) -> Decomposition2D:
    """Two-dimensional wavelet transform of a square image.

    Args:
        A (array_like): n x n image.
        fb (FilterBank): Orthonormal filter bank.
        L (int): Number of levels.
        scheme (str): "orthogonal" (dyadic n, L <= log2 n) or "nondecimated"
            (fb.length * 2^(L-1) <= n).
        keep_full (bool): Keep the full coefficient matrix. The nondecimated full
            matrix is (L+1)^2 times the image size; set False to compute only the
            diagonal blocks.

    Returns:
        Decomposition2D: Full matrix (optional) and diagonal-hierarchy blocks.

    Raises:
        TransformError: On a non-square image or scheme/size violations.
    """
    A = np.asarray(A, dtype=float)
    n = _check_image(A, scheme)

    if keep_full:
        full = separable_transform(A, fb, L, scheme)
        offsets = np.concatenate([[0], np.cumsum(_segment_lengths(n, L, scheme))])
        blocks = [
            full[start:stop, start:stop]
            for start, stop in zip(offsets[:-1], offsets[1:])
        ]
    else:
        full = None
        blocks = _diagonal_blocks_direct(A, fb, L, scheme)

    logger.debug(
        "2D %s transform (%s): n=%d, L=%d, block sides %s",
        scheme,
        fb.name,
        n,
        L,
        [block.shape[0] for block in blocks],
    )
    return Decomposition2D(
        scheme=scheme, n=n, L=L, full=full, diagonal_blocks=blocks, wavelet=fb.name
    )


def diagonal_block_labels(dec: Decomposition2D) -> List[Label]:
    """Labels aligned with diagonal_block_series: smooth, then L down to 1."""
    return [SMOOTH_LABEL] + list(range(dec.L, 0, -1))


def diagonal_block_series(dec: Decomposition2D) -> List[np.ndarray]:
    """Flattens each diagonal-hierarchy block into one coefficient vector."""
    return [np.ravel(block) for block in dec.diagonal_blocks]
