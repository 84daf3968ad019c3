"""Non-decimated (stationary) wavelet transform.

No downsampling: at level j the filters are upsampled by 2^(j-1) (zeros inserted
between taps) and every subvector keeps the input length n. Filters keep their
orthonormal normalization at every level; per-level correlations are scale free,
so a 2^(-j/2) rescaling would not change them.
"""

import numpy as np

from logutils import get_logger
from src.dwt1d import NONDECIMATED, Decomposition1D, WaveletMatrix
from src.errors import TransformError
from src.filterbank import FilterBank
from src.utils import get_int_config

logger = get_logger(__name__)

DENSE_LIMIT_NDWT = get_int_config("WAVECORR_DENSE_LIMIT_NDWT", default_value=2048)


def max_ndwt_level(n: int, fb: FilterBank) -> int:
    """Deepest L with fb.length * 2^(L-1) <= n (0 when even L=1 does not fit)."""
    if n < fb.length:
        return 0
    return int(np.floor(np.log2(n / fb.length))) + 1


def _check_depth(n: int, fb: FilterBank, L: int) -> None:
    if n == 0:
        raise TransformError("Cannot transform an empty signal")
    if L < 1:
        raise TransformError(f"Number of levels must be at least 1 (got {L})")
    needed = fb.length * 2 ** (L - 1)
    if needed > n:
        raise TransformError(
            f"NDWT depth {L} with {fb.name} ({fb.length} taps) needs n >= {needed} "
            f"(got {n}); deepest allowed level is {max_ndwt_level(n, fb)}"
        )


def ndwt_forward(y, fb: FilterBank, L: int) -> Decomposition1D:
    """Non-decimated periodic wavelet transform.

    Args:
        y (array_like): Signal(s) along the last axis; any length n with
            fb.length * 2^(L-1) <= n.
        fb (FilterBank): Orthonormal filter bank.
        L (int): Number of levels.

    Returns:
        Decomposition1D: Nondecimated-scheme decomposition with L+1 subvectors of
            length n.

    Raises:
        TransformError: On empty input or a depth too large for n.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim == 0:
        raise TransformError("Cannot transform a scalar")
    n = y.shape[-1]
    _check_depth(n, fb, L)

    t = np.arange(n)
    smooth = y
    details = []
    for level in range(1, L + 1):
        step = 2 ** (level - 1)
        next_smooth = np.zeros_like(smooth)
        detail = np.zeros_like(smooth)
        for k in range(fb.length):
            shifted = smooth[..., (t + k * step) % n]
            next_smooth += fb.h[k] * shifted
            detail += fb.g[k] * shifted
        smooth = next_smooth
        details.append(detail)

    logger.debug("NDWT %s: n=%d, L=%d", fb.name, n, L)
    return Decomposition1D(
        scheme=NONDECIMATED,
        n=n,
        J=None,
        L=L,
        smooth=smooth,
        details=details[::-1],
        wavelet=fb.name,
    )


def _upsampled_circulant(n: int, taps: np.ndarray, step: int) -> np.ndarray:
    operator = np.zeros((n, n))
    rows = np.arange(n)
    for k, tap in enumerate(taps):
        np.add.at(operator, (rows, (rows + k * step) % n), tap)
    return operator


def build_ndwt_matrix(n: int, fb: FilterBank, L: int) -> WaveletMatrix:
    """Dense (L+1)n x n NDWT matrix; W y equals flattened ndwt_forward(y).

    Raises:
        TransformError: If n exceeds the dense size guard or L is invalid.
    """
    if n > DENSE_LIMIT_NDWT:
        raise TransformError(
            f"Dense NDWT matrix limited to n <= {DENSE_LIMIT_NDWT} (got {n}); "
            "use ndwt_forward instead"
        )
    _check_depth(n, fb, L)

    smooth_operator = np.eye(n)
    detail_blocks = []
    for level in range(1, L + 1):
        step = 2 ** (level - 1)
        detail_blocks.append(_upsampled_circulant(n, fb.g, step) @ smooth_operator)
        smooth_operator = _upsampled_circulant(n, fb.h, step) @ smooth_operator

    entries = np.vstack([smooth_operator] + detail_blocks[::-1])
    return WaveletMatrix(scheme=NONDECIMATED, entries=entries)
