"""Dependence measures on coefficient vectors and their confidence intervals.

Measures: Pearson, Kendall tau (merge-sort fast path and pairwise oracle),
G-correlations with pluggable contrasts, partial and semipartial correlations.
Intervals: Fisher z (optionally bias corrected), partial/semipartial Fisher z with
control-set size, Kendall asymptotic or exact-variance normal intervals.
"""

import itertools
from dataclasses import dataclass, asdict
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, stats

from logutils import get_logger
from src.errors import (
    CollinearityError,
    DegenerateIntervalError,
    DegenerateScaleError,
    InsufficientSampleError,
    NegativeVarianceError,
    TiedValuesError,
    WavecorrError,
)

logger = get_logger(__name__)

FISHER = "fisher"
FISHER_BIAS_CORRECTED = "fisher_bias_corrected"
KENDALL_ASYMPTOTIC = "kendall_asymptotic"
KENDALL_EXACT = "kendall_exact_variance"

PEARSON = "pearson"
KENDALL = "kendall"
BLOMQVIST = "blomqvist"
MEASURES = (PEARSON, KENDALL, BLOMQVIST)

ASYMPTOTIC = "asymptotic"
EXACT = "exact"

DIFFERENCE = "difference"
SIGN = "sign"
CONTRAST_KINDS = (DIFFERENCE, SIGN, BLOMQVIST)

COLLINEARITY_TOLERANCE = 1e-12
_PAIR_CHUNK = 512

Controls = Union[np.ndarray, Sequence[np.ndarray]]


@dataclass(frozen=True)
class IntervalEstimate:
    """Point estimate with a two-sided confidence interval.

    Attributes:
        estimate: Point estimate the interval is centred on (after the inverse
            transform).
        lower: Lower bound.
        upper: Upper bound.
        alpha: One minus the confidence level.
        n_eff: Sample size the interval was computed for.
        method: fisher, fisher_bias_corrected, kendall_asymptotic or
            kendall_exact_variance.
    """

    estimate: float
    lower: float
    upper: float
    alpha: float
    n_eff: int
    method: str

    def __post_init__(self):
        if not -1.0 <= self.lower <= self.estimate <= self.upper <= 1.0:
            raise WavecorrError(
                f"Malformed interval [{self.lower}, {self.upper}] "
                f"for estimate {self.estimate}"
            )

    @property
    def confidence(self) -> float:
        return 1.0 - self.alpha

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class KendallStats:
    """Pair counts behind a Kendall tau estimate (no ties).

    Attributes:
        C: Concordant pairs.
        D: Discordant pairs.
        n: Sample size.
        c_i: Concordant pairs involving each observation.
        tau_hat: (C - D) / (n choose 2).
    """

    C: int
    D: int
    n: int
    c_i: np.ndarray
    tau_hat: float

    @property
    def pairs(self) -> int:
        return self.n * (self.n - 1) // 2


def _as_pair(x, y, minimum: int = 2) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise WavecorrError(f"Length mismatch: {x.size} vs {y.size}")
    if x.size < minimum:
        raise InsufficientSampleError(
            f"Need at least {minimum} observations (got {x.size})"
        )
    return x, y


def _clip_unit(value: float) -> float:
    return float(np.clip(value, -1.0, 1.0))


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise WavecorrError(f"alpha must lie in (0, 1) (got {alpha})")


def normal_quantile(alpha: float) -> float:
    """z_{1 - alpha/2} of the standard normal."""
    _check_alpha(alpha)
    return float(stats.norm.ppf(1.0 - alpha / 2.0))


def pearson(x, y) -> float:
    """Sample Pearson correlation.

    Raises:
        InsufficientSampleError: Fewer than two observations.
        DegenerateScaleError: Either vector has zero variance.
    """
    x, y = _as_pair(x, y)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = np.dot(xc, xc)
    syy = np.dot(yc, yc)
    if sxx <= 0.0 or syy <= 0.0:
        raise DegenerateScaleError("Zero variance: correlation is undefined")
    return _clip_unit(np.dot(xc, yc) / np.sqrt(sxx * syy))


def _tied_indices(values: np.ndarray) -> List[int]:
    _, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    return np.flatnonzero(counts[inverse] > 1).tolist()


def _check_ties(x: np.ndarray, y: np.ndarray) -> None:
    for name, values in (("x", x), ("y", y)):
        tied = _tied_indices(values)
        if tied:
            raise TiedValuesError(name, tied)


def _merge_count(values: Sequence[float]) -> Tuple[List[int], int]:
    """Bottom-up merge sort counting, per element, the smaller elements before it.

    Returns:
        tuple: (smaller_before per position, number of inversions).
    """
    n = len(values)
    smaller = [0] * n
    order = list(range(n))
    inversions = 0
    width = 1
    while width < n:
        merged = []
        for start in range(0, n, 2 * width):
            left = order[start : start + width]
            right = order[start + width : start + 2 * width]
            i = j = 0
            while i < len(left) and j < len(right):
                if values[left[i]] < values[right[j]]:
                    merged.append(left[i])
                    i += 1
                else:
                    smaller[right[j]] += i
                    inversions += len(left) - i
                    merged.append(right[j])
                    j += 1
            merged.extend(left[i:])
            for index in right[j:]:
                smaller[index] += len(left)
            merged.extend(right[j:])
        order = merged
        width *= 2
    return smaller, inversions


def _kendall_stats(C: int, D: int, n: int, c_i: np.ndarray) -> KendallStats:
    pairs = n * (n - 1) // 2
    return KendallStats(
        C=int(C), D=int(D), n=n, c_i=c_i, tau_hat=_clip_unit((C - D) / pairs)
    )


def kendall_tau(x, y) -> KendallStats:
    """Kendall tau by merge-sort inversion counting, O(n log n).

    Observations are ordered by x; discordant pairs are the inversions of the y
    sequence in that order. The same merge pass yields, per observation, how many
    observations are smaller in both coordinates, which gives c_i.

    Raises:
        TiedValuesError: If x or y contains ties.
    """
    x, y = _as_pair(x, y)
    _check_ties(x, y)
    n = x.size

    order = np.argsort(x, kind="mergesort")
    y_sorted = y[order]
    smaller_both, D = _merge_count(y_sorted.tolist())

    rank_x = np.arange(n)
    rank_y = np.empty(n, dtype=np.int64)
    rank_y[np.argsort(y_sorted, kind="mergesort")] = np.arange(n)
    concordant_sorted = 2 * np.asarray(smaller_both, dtype=np.int64) + (n - 1) - rank_x - rank_y

    c_i = np.empty(n, dtype=np.int64)
    c_i[order] = concordant_sorted
    C = n * (n - 1) // 2 - D
    return _kendall_stats(C, D, n, c_i)


def kendall_tau_oracle(x, y) -> KendallStats:
    """Kendall tau by direct enumeration of all pairs, O(n^2)."""
    x, y = _as_pair(x, y)
    _check_ties(x, y)
    n = x.size
    c_i = np.zeros(n, dtype=np.int64)
    d_i = np.zeros(n, dtype=np.int64)
    for i in range(n):
        product = np.sign(x[i] - x) * np.sign(y[i] - y)
        c_i[i] = np.count_nonzero(product > 0)
        d_i[i] = np.count_nonzero(product < 0)
    return _kendall_stats(int(c_i.sum()) // 2, int(d_i.sum()) // 2, n, c_i)


@dataclass(frozen=True)
class ContrastFunction:
    """Antisymmetric pairwise contrast G(a, b) = -G(b, a).

    difference: a - b (Pearson).
    sign:       sign(a - b) (Kendall).
    blomqvist:  (sign(a - m) - sign(b - m)) / 2 with m the sample lower median.
    """

    kind: str
    center: Optional[float] = None

    def __post_init__(self):
        if self.kind not in CONTRAST_KINDS:
            raise WavecorrError(
                f"Unknown contrast '{self.kind}'; expected one of "
                + ", ".join(CONTRAST_KINDS)
            )
        if self.kind == BLOMQVIST and self.center is None:
            raise WavecorrError("Blomqvist contrast needs a center")

    @classmethod
    def for_sample(cls, kind: str, values) -> "ContrastFunction":
        """Builds a contrast, computing the lower median when one is needed."""
        if kind != BLOMQVIST:
            return cls(kind=kind)
        ordered = np.sort(np.asarray(values, dtype=float).ravel())
        return cls(kind=kind, center=float(ordered[(ordered.size - 1) // 2]))

    def __call__(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.kind == DIFFERENCE:
            return a - b
        if self.kind == SIGN:
            return np.sign(a - b)
        return (np.sign(a - self.center) - np.sign(b - self.center)) / 2.0


def g_correlation(x, y, gx: ContrastFunction, gy: ContrastFunction) -> float:
    """Sample G-correlation over all ordered pairs i != j.

    sum G_X(x_i, x_j) G_Y(y_i, y_j) / sqrt(sum G_X^2 * sum G_Y^2)

    Raises:
        DegenerateScaleError: If every contrast of x or of y is zero.
    """
    x, y = _as_pair(x, y)
    cross = energy_x = energy_y = 0.0
    for start in range(0, x.size, _PAIR_CHUNK):
        stop = start + _PAIR_CHUNK
        contrast_x = gx(x[start:stop, None], x[None, :])
        contrast_y = gy(y[start:stop, None], y[None, :])
        cross += float(np.sum(contrast_x * contrast_y))
        energy_x += float(np.sum(contrast_x * contrast_x))
        energy_y += float(np.sum(contrast_y * contrast_y))
    if energy_x <= 0.0 or energy_y <= 0.0:
        raise DegenerateScaleError("All pairwise contrasts are zero")
    return _clip_unit(cross / np.sqrt(energy_x * energy_y))


def blomqvist(x, y) -> float:
    """Median (Blomqvist) correlation.

    Equal to g_correlation with Blomqvist contrasts, but linear in n: with
    s = sign(x - m_x) and t = sign(y - m_y), the pairwise sums collapse to

        (n sum st - sum s sum t) / sqrt((n sum s^2 - (sum s)^2)(n sum t^2 - (sum t)^2))

    Raises:
        DegenerateScaleError: If every sign of x or of y is the same.
    """
    x, y = _as_pair(x, y)
    s = np.sign(x - ContrastFunction.for_sample(BLOMQVIST, x).center)
    t = np.sign(y - ContrastFunction.for_sample(BLOMQVIST, y).center)
    n = x.size
    sum_s, sum_t = float(s.sum()), float(t.sum())
    energy_x = n * float(np.dot(s, s)) - sum_s**2
    energy_y = n * float(np.dot(t, t)) - sum_t**2
    if energy_x <= 0.0 or energy_y <= 0.0:
        raise DegenerateScaleError("All pairwise contrasts are zero")
    cross = n * float(np.dot(s, t)) - sum_s * sum_t
    return _clip_unit(cross / np.sqrt(energy_x * energy_y))


def measure_correlation(x, y, measure: str = PEARSON) -> float:
    """Dispatches to pearson, Kendall tau_hat or blomqvist."""
    if measure == PEARSON:
        return pearson(x, y)
    if measure == KENDALL:
        return kendall_tau(x, y).tau_hat
    if measure == BLOMQVIST:
        return blomqvist(x, y)
    raise WavecorrError(
        f"Unknown measure '{measure}'; expected one of {', '.join(MEASURES)}"
    )


def _fisher_interval(
    r: float, se: float, alpha: float, n_eff: int, method: str, shift: float = 0.0
) -> IntervalEstimate:
    if abs(r) >= 1.0:
        raise DegenerateIntervalError(
            f"Fisher interval undefined for correlation {r:.17g}"
        )
    z = normal_quantile(alpha)
    w = np.arctanh(r) - shift
    half_width = z * se
    return IntervalEstimate(
        estimate=float(np.tanh(w)),
        lower=float(np.tanh(w - half_width)),
        upper=float(np.tanh(w + half_width)),
        alpha=alpha,
        n_eff=int(n_eff),
        method=method,
    )


def fisher_ci(
    r: float, n: int, alpha: float = 0.05, bias_corrected: bool = False
) -> IntervalEstimate:
    """Fisher z interval for a correlation.

    w = arctanh(r), or w_bc = arctanh(r) - r / (2(n-1)) when bias corrected;
    bounds tanh(w -/+ z_{1-alpha/2} / sqrt(n-3)). The returned estimate is tanh(w),
    which is r itself unless bias corrected.

    Raises:
        InsufficientSampleError: n <= 3.
        DegenerateIntervalError: |r| = 1.
    """
    _check_alpha(alpha)
    if n <= 3:
        raise InsufficientSampleError(f"Fisher interval needs n >= 4 (got {n})")
    shift = r / (2.0 * (n - 1)) if bias_corrected else 0.0
    method = FISHER_BIAS_CORRECTED if bias_corrected else FISHER
    return _fisher_interval(r, 1.0 / np.sqrt(n - 3), alpha, n, method, shift)


def partial_ci(r_partial: float, n: int, p: int, alpha: float = 0.05) -> IntervalEstimate:
    """Fisher z interval for a partial correlation with p controls, se 1/sqrt(n-p-2)."""
    _check_alpha(alpha)
    if n <= p + 3:
        raise InsufficientSampleError(
            f"Partial-correlation interval needs n > p + 3 (n={n}, p={p})"
        )
    return _fisher_interval(r_partial, 1.0 / np.sqrt(n - p - 2), alpha, n, FISHER)


def semipartial_ci(r_s: float, n: int, p: int, alpha: float = 0.05) -> IntervalEstimate:
    """Fisher z interval for a semipartial correlation, se 1/sqrt(n-p-1)."""
    _check_alpha(alpha)
    if n <= p + 2:
        raise InsufficientSampleError(
            f"Semipartial-correlation interval needs n > p + 2 (n={n}, p={p})"
        )
    return _fisher_interval(r_s, 1.0 / np.sqrt(n - p - 1), alpha, n, FISHER)


def kendall_asymptotic_variance(n: int) -> float:
    """2(2n+5) / (9n(n-1))."""
    return 2.0 * (2 * n + 5) / (9.0 * n * (n - 1))


def kendall_exact_variance(stats_: KendallStats) -> float:
    """(4 sum c_i^2 - 2C - 2D(2n-3) - C^2/(n(n-1))) / (n choose 2)^2, verbatim.

    The expression can be negative; callers decide what to do with that.
    """
    n = stats_.n
    c_i = np.asarray(stats_.c_i, dtype=float)
    numerator = (
        4.0 * np.sum(c_i**2)
        - 2.0 * stats_.C
        - 2.0 * stats_.D * (2 * n - 3)
        - stats_.C**2 / (n * (n - 1))
    )
    return float(numerator / stats_.pairs**2)


def _normal_interval(
    estimate: float, variance: float, alpha: float, n: int, method: str
) -> IntervalEstimate:
    half_width = normal_quantile(alpha) * np.sqrt(variance)
    return IntervalEstimate(
        estimate=estimate,
        lower=_clip_unit(estimate - half_width),
        upper=_clip_unit(estimate + half_width),
        alpha=alpha,
        n_eff=int(n),
        method=method,
    )


def kendall_ci_from_value(tau: float, n: int, alpha: float = 0.05) -> IntervalEstimate:
    """Asymptotic Kendall interval around a tau value with sample size n."""
    _check_alpha(alpha)
    if n < 3:
        raise InsufficientSampleError(f"Asymptotic Kendall interval needs n >= 3 (got {n})")
    return _normal_interval(
        _clip_unit(tau), kendall_asymptotic_variance(n), alpha, n, KENDALL_ASYMPTOTIC
    )


def kendall_ci(
    stats_: KendallStats,
    alpha: float = 0.05,
    variance_mode: str = ASYMPTOTIC,
    fallback_to_asymptotic: bool = False,
) -> IntervalEstimate:
    """Normal interval for Kendall tau, intersected with [-1, 1].

    Args:
        stats_ (KendallStats): Pair counts.
        alpha (float): One minus the confidence level.
        variance_mode (str): "asymptotic" or "exact".
        fallback_to_asymptotic (bool): With the exact mode, use the asymptotic
            variance instead of raising when the exact formula goes negative.

    Raises:
        NegativeVarianceError: Exact variance < 0 and no fallback requested.
        InsufficientSampleError: n too small for the chosen variance.
    """
    _check_alpha(alpha)
    n = stats_.n
    if variance_mode == ASYMPTOTIC:
        return kendall_ci_from_value(stats_.tau_hat, n, alpha)
    if variance_mode != EXACT:
        raise WavecorrError(
            f"Unknown variance mode '{variance_mode}'; expected asymptotic or exact"
        )

    if n < 2:
        raise InsufficientSampleError(f"Exact Kendall interval needs n >= 2 (got {n})")
    variance = kendall_exact_variance(stats_)
    if variance < 0.0:
        if not fallback_to_asymptotic:
            raise NegativeVarianceError(
                f"Exact Kendall variance formula is negative ({variance:.17g}) "
                f"for n={n}, C={stats_.C}, D={stats_.D}"
            )
        logger.warning(
            "Exact Kendall variance negative (%.6g) at n=%d; using asymptotic variance",
            variance,
            n,
        )
        return kendall_ci_from_value(stats_.tau_hat, n, alpha)
    return _normal_interval(stats_.tau_hat, variance, alpha, n, KENDALL_EXACT)


def _stack(x, y, controls: Controls) -> List[np.ndarray]:
    vectors = [np.asarray(v, dtype=float).ravel() for v in (x, y)]
    vectors += [np.asarray(c, dtype=float).ravel() for c in _control_list(controls)]
    lengths = {v.size for v in vectors}
    if len(lengths) != 1:
        raise WavecorrError(f"All vectors must have equal length (got {sorted(lengths)})")
    return vectors


def _control_list(controls: Optional[Controls]) -> List[np.ndarray]:
    if controls is None:
        return []
    if isinstance(controls, np.ndarray):
        return [controls] if controls.ndim == 1 else list(controls)
    return list(controls)


def measure_matrix(vectors: Sequence[np.ndarray], measure: str = PEARSON) -> np.ndarray:
    """Symmetric matrix of pairwise measures with unit diagonal."""
    size = len(vectors)
    matrix = np.eye(size)
    for i, j in itertools.combinations(range(size), 2):
        matrix[i, j] = matrix[j, i] = measure_correlation(vectors[i], vectors[j], measure)
    return matrix


def _stage_name(names: Sequence[str], i: int, j: int, given: Sequence[int]) -> str:
    condition = ",".join(names[k] for k in given)
    return f"r({names[i]},{names[j]}|{condition})" if condition else f"r({names[i]},{names[j]})"


def _check_not_collinear(value: float, stage: str) -> None:
    if abs(value) >= 1.0 - COLLINEARITY_TOLERANCE:
        raise CollinearityError(stage, value)


def partial_from_matrix(
    R: np.ndarray, i: int = 0, j: int = 1, controls: Sequence[int] = None,
    names: Sequence[str] = None,
) -> float:
    """Iterated first-order partial correlation from a matrix of pairwise measures.

    Controls are removed one at a time in the given order:
    r_{ij.Z+l} = (r_{ij.Z} - r_{il.Z} r_{jl.Z}) / sqrt((1 - r_{il.Z}^2)(1 - r_{jl.Z}^2)).

    Raises:
        CollinearityError: If a correlation in a denominator reaches +/-1.
    """
    controls = list(range(2, R.shape[0])) if controls is None else list(controls)
    names = names or ["x", "y"] + [f"z{k}" for k in range(1, R.shape[0] - 1)]
    cache: Dict[Tuple[int, int, int], float] = {}

    def recurse(a: int, b: int, depth: int) -> float:
        key = (min(a, b), max(a, b), depth)
        if key in cache:
            return cache[key]
        if depth == 0:
            value = float(R[a, b])
        else:
            last = controls[depth - 1]
            given = controls[: depth - 1]
            r_ab = recurse(a, b, depth - 1)
            r_al = recurse(a, last, depth - 1)
            r_bl = recurse(b, last, depth - 1)
            _check_not_collinear(r_al, _stage_name(names, a, last, given))
            _check_not_collinear(r_bl, _stage_name(names, b, last, given))
            value = _clip_unit(
                (r_ab - r_al * r_bl) / np.sqrt((1.0 - r_al**2) * (1.0 - r_bl**2))
            )
        cache[key] = value
        return value

    return recurse(i, j, len(controls))


def partial_correlation(x, y, controls: Controls = None, measure: str = PEARSON) -> float:
    """Partial correlation of x and y given controls, in the given control order.

    Args:
        x, y (array_like): Equal-length vectors.
        controls: One vector or a list of vectors; empty gives the plain measure.
        measure (str): pearson (default), kendall or blomqvist; the iterated
            first-order formula is applied to the chosen pairwise measure.

    Raises:
        DegenerateScaleError: A vector has zero variance.
        CollinearityError: A denominator correlation reaches +/-1.
    """
    vectors = _stack(x, y, controls)
    if len(vectors) == 2:
        return measure_correlation(vectors[0], vectors[1], measure)
    return partial_from_matrix(measure_matrix(vectors, measure))


def residualize(x, controls: Controls) -> np.ndarray:
    """Least-squares residuals of x on an intercept and the controls."""
    x = np.asarray(x, dtype=float).ravel()
    columns = [np.ones_like(x)] + [
        np.asarray(c, dtype=float).ravel() for c in _control_list(controls)
    ]
    design = np.column_stack(columns)
    beta = linalg.lstsq(design, x)[0]
    return x - design @ beta


def semipartial_correlation(x, y, z: Controls, measure: str = PEARSON) -> float:
    """Semipartial correlation: control removed from x only.

    One control uses r_s = (r_xy - r_xz r_yz) / sqrt(1 - r_xz^2); several Pearson
    controls use the correlation of y with the residuals of x on all controls.

    Raises:
        CollinearityError: x and a control are collinear.
    """
    controls = _control_list(z)
    vectors = _stack(x, y, controls)
    if not controls:
        return measure_correlation(vectors[0], vectors[1], measure)

    if len(controls) == 1:
        R = measure_matrix(vectors, measure)
        r_xy, r_xz, r_yz = R[0, 1], R[0, 2], R[1, 2]
        _check_not_collinear(r_xz, "r(x,z1)")
        return _clip_unit((r_xy - r_xz * r_yz) / np.sqrt(1.0 - r_xz**2))

    if measure != PEARSON:
        raise WavecorrError(
            "Semipartial correlation with several controls is only defined for pearson"
        )
    residual = residualize(vectors[0], vectors[2:])
    if np.dot(residual, residual) <= 1e-24 * max(np.dot(vectors[0], vectors[0]), 1.0):
        raise CollinearityError("r(x,controls)", 1.0)
    return pearson(residual, vectors[1])


def partial_order_sensitivity(
    x, y, controls: Sequence[np.ndarray], measure: str = PEARSON
) -> Tuple[float, Dict[Tuple[int, ...], float]]:
    """Partial correlation under every ordering of the controls.

    Returns:
        tuple: (max absolute discrepancy between orderings,
            {ordering of control indices: partial correlation}).
    """
    vectors = _stack(x, y, controls)
    R = measure_matrix(vectors, measure)
    control_indices = list(range(2, len(vectors)))
    values = {}
    for ordering in itertools.permutations(control_indices):
        values[tuple(k - 2 for k in ordering)] = partial_from_matrix(R, 0, 1, ordering)
    spread = max(values.values()) - min(values.values()) if values else 0.0
    return float(spread), values
