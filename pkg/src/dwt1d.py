"""Orthogonal discrete wavelet transform of dyadic-length signals.

Two paths compute the same periodic transform:

- the pyramid (production path, O(n) per signal), and
- an explicit n x n wavelet matrix W (verification path, O(n^2), size guarded).

Coefficients are laid out coarsest first: (c_{J-L}, d_{J-L}, ..., d_{J-1}).
At every level c[t] = sum_k h[k] s[(2t + k) mod N] and likewise for d with g.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from logutils import get_logger
from src.errors import TransformError
from src.filterbank import FilterBank
from src.utils import get_int_config

logger = get_logger(__name__)

ORTHOGONAL = "orthogonal"
NONDECIMATED = "nondecimated"
SCHEMES = (ORTHOGONAL, NONDECIMATED)

SMOOTH_LABEL = "smooth"

DENSE_LIMIT_DWT = get_int_config("WAVECORR_DENSE_LIMIT_DWT", default_value=4096)

Label = Union[int, str]


@dataclass
class Decomposition1D:
    """Levelwise coefficients of a 1D transform.

    Arrays may carry leading batch axes; the coefficient index is always the last
    axis.

    Attributes:
        scheme: "orthogonal" or "nondecimated".
        n: Input length.
        J: log2(n) for the orthogonal scheme, None otherwise.
        L: Number of decomposition levels.
        smooth: Scaling coefficients c_{J-L}.
        details: Detail vectors ordered coarsest first (d_{J-L}, ..., d_{J-1}).
        wavelet: Name of the filter bank used.
    """

    scheme: str
    n: int
    J: Optional[int]
    L: int
    smooth: np.ndarray
    details: List[np.ndarray] = field(default_factory=list)
    wavelet: str = ""

    def detail(self, level: int) -> np.ndarray:
        """Detail vector for a level label (1 = finest, L = coarsest)."""
        if not 1 <= level <= self.L:
            raise TransformError(f"Level {level} outside 1..{self.L}")
        return self.details[self.L - level]

    def labels(self) -> List[Label]:
        """Labels aligned with subvectors(): smooth, then L down to 1."""
        return [SMOOTH_LABEL] + list(range(self.L, 0, -1))

    def subvectors(self) -> List[Tuple[Label, np.ndarray]]:
        """(label, vector) pairs in flattened order, coarsest first."""
        return list(zip(self.labels(), [self.smooth] + list(self.details)))

    def flatten(self) -> np.ndarray:
        """Concatenation (smooth, details coarsest to finest)."""
        return np.concatenate([self.smooth] + list(self.details), axis=-1)

    def energies(self) -> Dict[Label, float]:
        """Sum of squared coefficients per subvector."""
        return {
            label: float(np.sum(np.square(vector)))
            for label, vector in self.subvectors()
        }

    def coefficient_count(self) -> int:
        return sum(vector.shape[-1] for _, vector in self.subvectors())


@dataclass
class WaveletMatrix:
    """Dense matrix form of a transform: d = W y."""

    scheme: str
    entries: np.ndarray

    @property
    def rows(self) -> int:
        return int(self.entries.shape[0])

    @property
    def cols(self) -> int:
        return int(self.entries.shape[1])

    def apply(self, y: np.ndarray) -> np.ndarray:
        """Flattened coefficients W y."""
        return self.entries @ np.asarray(y, dtype=float)


def dyadic_exponent(n: int) -> int:
    """Returns J with n = 2^J.

    Raises:
        TransformError: If n is not a positive power of two.
    """
    if n < 1 or n & (n - 1):
        raise TransformError(
            f"Orthogonal transform needs a power-of-two length (got {n})"
        )
    return int(n).bit_length() - 1


def level_lengths(n: int, L: int) -> List[int]:
    """Subvector lengths of an orthogonal decomposition, smooth first."""
    J = dyadic_exponent(n)
    return [2 ** (J - L)] + [2 ** (J - i) for i in range(L, 0, -1)]


def _check_depth(n: int, L: int) -> int:
    if n < 2:
        raise TransformError(f"Signal of length {n} is too short to transform")
    J = dyadic_exponent(n)
    if L < 1:
        raise TransformError(f"Number of levels must be at least 1 (got {L})")
    if L > J:
        raise TransformError(
            f"Number of levels {L} exceeds log2(n) = {J} for length {n}"
        )
    return J


def analysis_step(s: np.ndarray, fb: FilterBank) -> Tuple[np.ndarray, np.ndarray]:
    """One periodic filter-and-decimate step along the last axis."""
    size = s.shape[-1]
    half = np.arange(size // 2)
    smooth = np.zeros(s.shape[:-1] + (size // 2,))
    detail = np.zeros_like(smooth)
    for k in range(fb.length):
        window = s[..., (2 * half + k) % size]
        smooth += fb.h[k] * window
        detail += fb.g[k] * window
    return smooth, detail


def synthesis_step(
    smooth: np.ndarray, detail: np.ndarray, fb: FilterBank
) -> np.ndarray:
    """Adjoint of analysis_step; exact inverse for an orthonormal bank."""
    half_size = smooth.shape[-1]
    size = 2 * half_size
    half = np.arange(half_size)
    out = np.zeros(smooth.shape[:-1] + (size,))
    for k in range(fb.length):
        # positions are distinct for a fixed k, so fancy += is safe
        out[..., (2 * half + k) % size] += fb.h[k] * smooth + fb.g[k] * detail
    return out


def dwt_forward(y, fb: FilterBank, L: int) -> Decomposition1D:
    """Orthogonal periodic DWT by the pyramid algorithm.

    Args:
        y (array_like): Signal(s) of dyadic length along the last axis.
        fb (FilterBank): Orthonormal filter bank.
        L (int): Number of levels, 1 <= L <= log2(n).

    Returns:
        Decomposition1D: Orthogonal-scheme decomposition.

    Raises:
        TransformError: On non-dyadic length or invalid depth.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim == 0 or y.shape[-1] == 0:
        raise TransformError("Cannot transform an empty signal")
    n = y.shape[-1]
    J = _check_depth(n, L)

    smooth = y
    details = []
    for _ in range(L):
        smooth, detail = analysis_step(smooth, fb)
        details.append(detail)

    logger.debug("DWT %s: n=%d, L=%d", fb.name, n, L)
    return Decomposition1D(
        scheme=ORTHOGONAL,
        n=n,
        J=J,
        L=L,
        smooth=smooth,
        details=details[::-1],
        wavelet=fb.name,
    )


def dwt_inverse(dec: Decomposition1D, fb: FilterBank) -> np.ndarray:
    """Reconstructs the signal from an orthogonal decomposition.

    Raises:
        TransformError: On a non-orthogonal decomposition or inconsistent lengths.
    """
    if dec.scheme != ORTHOGONAL:
        raise TransformError(
            f"Inverse DWT needs an orthogonal decomposition (got {dec.scheme})"
        )
    if len(dec.details) != dec.L:
        raise TransformError(
            f"Decomposition declares {dec.L} levels but holds {len(dec.details)}"
        )
    expected = level_lengths(dec.n, dec.L)
    actual = [vector.shape[-1] for _, vector in dec.subvectors()]
    if actual != expected:
        raise TransformError(
            f"Inconsistent subvector lengths {actual}; expected {expected}"
        )

    signal = np.asarray(dec.smooth, dtype=float)
    for detail in dec.details:
        signal = synthesis_step(signal, np.asarray(detail, dtype=float), fb)
    return signal


def unflatten(vector, n: int, L: int, wavelet: str = "") -> Decomposition1D:
    """Splits a flattened coefficient vector into a decomposition."""
    vector = np.asarray(vector, dtype=float)
    J = _check_depth(n, L)
    lengths = level_lengths(n, L)
    if vector.shape[-1] != sum(lengths):
        raise TransformError(
            f"Flattened vector has {vector.shape[-1]} coefficients; expected {n}"
        )
    parts = np.split(vector, np.cumsum(lengths)[:-1], axis=-1)
    return Decomposition1D(
        scheme=ORTHOGONAL,
        n=n,
        J=J,
        L=L,
        smooth=parts[0],
        details=parts[1:],
        wavelet=wavelet,
    )


def _level_operator(size: int, fb: FilterBank) -> np.ndarray:
    """[H; G] for one level: size x size, rows are 2t-shifted circulant taps."""
    half = size // 2
    operator = np.zeros((size, size))
    rows = np.repeat(np.arange(half), fb.length)
    cols = (2 * rows + np.tile(np.arange(fb.length), half)) % size
    np.add.at(operator, (rows, cols), np.tile(fb.h, half))
    np.add.at(operator, (rows + half, cols), np.tile(fb.g, half))
    return operator


def build_dwt_matrix(n: int, fb: FilterBank, L: int) -> WaveletMatrix:
    """Dense orthogonal wavelet matrix W with W y = flattened dwt_forward(y).

    W is the product of per-level stages, each acting on the current smooth block
    and leaving the already-computed details untouched.

    Raises:
        TransformError: If n exceeds the dense size guard, is not dyadic, or L is
            invalid.
    """
    if n > DENSE_LIMIT_DWT:
        raise TransformError(
            f"Dense DWT matrix limited to n <= {DENSE_LIMIT_DWT} (got {n}); "
            "use dwt_forward instead"
        )
    _check_depth(n, L)

    matrix = np.eye(n)
    size = n
    for _ in range(L):
        stage = np.eye(n)
        stage[:size, :size] = _level_operator(size, fb)
        matrix = stage @ matrix
        size //= 2

    return WaveletMatrix(scheme=ORTHOGONAL, entries=matrix)
