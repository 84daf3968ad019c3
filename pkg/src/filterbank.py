"""Orthonormal wavelet filter banks.

Haar and Daubechies-4 are written in closed form. The least-asymmetric 8-tap and
the 6-tap Coiflet are read from the PyWavelets tables and checked against the
orthonormality conditions before first use.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence

import numpy as np
import pywt

from logutils import get_logger
from src.errors import FilterBankError, UnknownWaveletError

logger = get_logger(__name__)

VALIDATION_TOLERANCE = 1e-10

SQRT2 = np.sqrt(2.0)
SQRT3 = np.sqrt(3.0)

# our name -> PyWavelets name; the reconstruction low-pass is the analysis h
_TABLE_SOURCED = {
    "la8": "sym4",
    "coif6": "coif1",
}

_DESCRIPTIONS = {
    "haar": "Haar (2 taps)",
    "db4": "Daubechies extremal phase (4 taps)",
    "la8": "Daubechies least asymmetric (8 taps)",
    "coif6": "Coiflet (6 taps)",
}


def quadrature_mirror(h: Sequence[float]) -> np.ndarray:
    """High-pass taps from low-pass taps: g_k = (-1)^k h_{m-1-k}."""
    h = np.asarray(h, dtype=float)
    signs = np.where(np.arange(h.size) % 2 == 0, 1.0, -1.0)
    return signs * h[::-1]


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Paired low-pass/high-pass filter taps of one wavelet family.

    Attributes:
        name: Family identifier (haar, db4, la8, coif6).
        h: Low-pass taps.
        g: High-pass taps, same length as h.
    """

    name: str
    h: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        g = np.array(self.g, dtype=float)
        h.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)

    @property
    def length(self) -> int:
        """Number of taps m."""
        return int(self.h.size)

    def describe(self) -> Dict:
        """Metadata block written next to transform outputs."""
        return {
            "name": self.name,
            "description": _DESCRIPTIONS.get(self.name, self.name),
            "length": self.length,
            "h": self.h.tolist(),
            "g": self.g.tolist(),
        }


def available_filters() -> List[str]:
    """Names accepted by get_filter."""
    return ["haar", "db4", "la8", "coif6"]


def _closed_form_taps(name: str) -> np.ndarray:
    if name == "haar":
        return np.array([1.0, 1.0]) / SQRT2
    # db4
    return np.array([1 + SQRT3, 3 + SQRT3, 3 - SQRT3, 1 - SQRT3]) / (4 * SQRT2)


def _table_taps(name: str) -> np.ndarray:
    return np.array(pywt.Wavelet(_TABLE_SOURCED[name]).rec_lo, dtype=float)


def validate(fb: FilterBank) -> List[str]:
    """Checks the orthonormality conditions of a filter bank.

    Args:
        fb (FilterBank): Filter bank to check.

    Returns:
        list: Human-readable descriptions of every violated condition; empty when
            the bank is a valid orthonormal quadrature-mirror pair.
    """
    violations = []
    h = np.asarray(fb.h, dtype=float)
    g = np.asarray(fb.g, dtype=float)
    tol = VALIDATION_TOLERANCE

    if h.size == 0 or h.size % 2:
        violations.append(f"filter length must be a positive even number (got {h.size})")
        return violations

    if g.size != h.size:
        violations.append(
            f"high-pass length {g.size} differs from low-pass length {h.size}"
        )
        return violations

    if abs(h.sum() - SQRT2) > tol:
        violations.append(f"low-pass sum ≠ √2 (got {h.sum():.17g})")
    if abs(np.dot(h, h) - 1.0) > tol:
        violations.append(f"low-pass energy ≠ 1 (got {np.dot(h, h):.17g})")
    if abs(np.dot(g, g) - 1.0) > tol:
        violations.append(f"high-pass energy ≠ 1 (got {np.dot(g, g):.17g})")
    if abs(g.sum()) > tol:
        violations.append(f"high-pass sum ≠ 0 (got {g.sum():.17g})")

    m = h.size
    for shift in range(1, m // 2):
        overlap = np.dot(h[: m - 2 * shift], h[2 * shift :])
        if abs(overlap) > tol:
            violations.append(
                f"shift-orthogonality violated at shift {shift} "
                f"(sum h_k h_(k+{2 * shift}) = {overlap:.17g})"
            )

    mirror = quadrature_mirror(h)
    if np.max(np.abs(mirror - g)) > tol:
        violations.append("quadrature-mirror relation g_k = (-1)^k h_(m-1-k) violated")

    return violations


@lru_cache(maxsize=None)
def get_filter(name: str) -> FilterBank:
    """Returns the filter bank of a supported wavelet family.

    Args:
        name (str): One of haar, db4, la8, coif6 (case-insensitive).

    Returns:
        FilterBank: A validated, immutable filter bank.

    Raises:
        UnknownWaveletError: If the family is not supported.
        FilterBankError: If the taps fail validation.
    """
    key = str(name).strip().lower()
    if key not in available_filters():
        raise UnknownWaveletError(
            f"Unknown wavelet '{name}'. Supported families: "
            + ", ".join(available_filters())
        )

    h = _table_taps(key) if key in _TABLE_SOURCED else _closed_form_taps(key)
    fb = FilterBank(name=key, h=h, g=quadrature_mirror(h))

    violations = validate(fb)
    if violations:
        logger.error("Filter bank %s failed validation: %s", key, violations)
        raise FilterBankError(f"Filter bank '{key}' is invalid: " + "; ".join(violations))

    logger.debug("Loaded filter bank %s with %d taps", key, fb.length)
    return fb
