"""Level-by-level dependence analysis on wavelet coefficients.

Correlograms (per-level estimates with confidence intervals, optionally partial or
semipartial on control series), the exact cross-scale covariance decomposition with
its weighted recovery of the overall correlation, run averaging, independent-pairing
baselines and wavelet-basis comparisons.

Levels are reported finest first: 1, 2, ..., L, then "smooth".
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from logutils import get_logger
from src.depstats import (
    ASYMPTOTIC,
    KENDALL,
    MEASURES,
    PEARSON,
    IntervalEstimate,
    fisher_ci,
    kendall_ci,
    kendall_ci_from_value,
    kendall_tau,
    measure_correlation,
    partial_ci,
    partial_correlation,
    semipartial_ci,
    semipartial_correlation,
)
from src.dwt1d import ORTHOGONAL, NONDECIMATED, SCHEMES, SMOOTH_LABEL, Label, dwt_forward
from src.errors import (
    DegenerateScaleError,
    InsufficientSampleError,
    ManifestError,
    NegativeVarianceError,
    TransformError,
    WavecorrError,
)
from src.filterbank import FilterBank, get_filter
from src.ndwt1d import ndwt_forward
from src.utils import evaluate_concurrently, get_int_config
from src.wt2d import diagonal_block_labels, diagonal_block_series, wt2d_forward

logger = get_logger(__name__)

BIAS_THRESHOLD = get_int_config("WAVECORR_BIAS_THRESHOLD", default_value=30)
BOUNDARY_TOLERANCE = 1e-12
# level energy, relative to the total, below which a level counts as empty
ENERGY_TOLERANCE = 1e-20

STATUS_OK = "ok"
STATUS_BOUNDARY = "boundary"
STATUS_INSUFFICIENT = "insufficient"
STATUS_DEGENERATE = "degenerate"

PARTIAL = "partial"
SEMIPARTIAL = "semipartial"
PARTIAL_KINDS = (PARTIAL, SEMIPARTIAL)


@dataclass
class LevelEstimate:
    """Estimate at one level of a correlogram.

    estimate is None when the measure itself is undefined at this level; interval is
    None when the estimate exists but no interval can be formed (|r| = 1, too few
    coefficients, negative exact Kendall variance).
    """

    label: Label
    n_eff: int
    estimate: Optional[float]
    interval: Optional[IntervalEstimate]
    status: str = STATUS_OK
    message: str = ""

    @property
    def lower(self) -> Optional[float]:
        return None if self.interval is None else self.interval.lower

    @property
    def upper(self) -> Optional[float]:
        return None if self.interval is None else self.interval.upper

    @property
    def defined(self) -> bool:
        return self.estimate is not None

    def to_dict(self) -> Dict:
        return {
            "level": self.label,
            "estimate": self.estimate,
            "lower": self.lower,
            "upper": self.upper,
            "n_eff": self.n_eff,
            "status": self.status,
            "method": None if self.interval is None else self.interval.method,
            "message": self.message,
        }


@dataclass
class Correlogram:
    """Per-level correlations of one pair of series or images.

    Attributes:
        levels: Level labels, 1 (finest) to L, then "smooth".
        corr: Plain correlation at every level.
        partial_corr: Partial (or semipartial) correlation at every level when
            controls were given, else None.
        measure: pearson, kendall or blomqvist.
        scheme: orthogonal or nondecimated.
        wavelet: Filter family.
        controls: Identifiers of the control series, in removal order.
        alpha: One minus the confidence level.
        partial_kind: partial or semipartial (only meaningful with controls).
        bias_threshold: Fisher bias correction applies below this n_eff; None when
            disabled.
        runs: Number of runs averaged into this correlogram.
        baseline: Independent-pairing reference curve, when requested.
    """

    levels: List[Label]
    corr: List[LevelEstimate]
    partial_corr: Optional[List[LevelEstimate]] = None
    measure: str = PEARSON
    scheme: str = ORTHOGONAL
    wavelet: str = ""
    controls: List[str] = field(default_factory=list)
    alpha: float = 0.05
    partial_kind: str = PARTIAL
    bias_threshold: Optional[int] = BIAS_THRESHOLD
    runs: int = 1
    baseline: Optional["Correlogram"] = None

    def curve(self) -> List[LevelEstimate]:
        """Headline curve: the partial one when controls are present."""
        return self.partial_corr if self.partial_corr is not None else self.corr

    def level(self, label: Label, partial: bool = False) -> LevelEstimate:
        block = self.partial_corr if partial else self.corr
        if block is None:
            raise WavecorrError("Correlogram has no partial curve")
        for estimate in block:
            if estimate.label == label:
                return estimate
        raise WavecorrError(f"Level {label!r} not in correlogram")

    def to_dict(self) -> Dict:
        body = {
            "measure": self.measure,
            "scheme": self.scheme,
            "wavelet": self.wavelet,
            "alpha": self.alpha,
            "controls": list(self.controls),
            "partial_kind": self.partial_kind if self.controls else None,
            "runs": self.runs,
            "levels": [],
        }
        for index, label in enumerate(self.levels):
            entry = {"level": label, "corr": self.corr[index].to_dict()}
            if self.partial_corr is not None:
                entry["partial_corr"] = self.partial_corr[index].to_dict()
            body["levels"].append(entry)
        if self.baseline is not None:
            body["baseline"] = self.baseline.to_dict()
        return body


def level_order(L: int) -> List[Label]:
    """Reporting order: 1..L then smooth."""
    return list(range(1, L + 1)) + [SMOOTH_LABEL]


def _decompose_series(series: np.ndarray, fb: FilterBank, L: int, scheme: str) -> Dict:
    if scheme == ORTHOGONAL:
        dec = dwt_forward(series, fb, L)
    elif scheme == NONDECIMATED:
        dec = ndwt_forward(series, fb, L)
    else:
        raise TransformError(
            f"Unknown scheme '{scheme}'; expected one of {', '.join(SCHEMES)}"
        )
    return dict(dec.subvectors())


def _decompose_image(image: np.ndarray, fb: FilterBank, L: int, scheme: str) -> Dict:
    dec = wt2d_forward(image, fb, L, scheme=scheme, keep_full=False)
    return dict(zip(diagonal_block_labels(dec), diagonal_block_series(dec)))


def _boundary(value: float) -> bool:
    return abs(value) >= 1.0 - BOUNDARY_TOLERANCE


def _interval(
    value: float,
    n: int,
    p: int,
    measure: str,
    kind: Optional[str],
    alpha: float,
    bias_threshold: Optional[int],
    kendall_stats=None,
    kendall_variance: str = ASYMPTOTIC,
) -> IntervalEstimate:
    if measure == KENDALL:
        if kendall_stats is not None:
            return kendall_ci(kendall_stats, alpha, kendall_variance)
        return kendall_ci_from_value(value, n, alpha)
    if kind == PARTIAL:
        return partial_ci(value, n, p, alpha)
    if kind == SEMIPARTIAL:
        return semipartial_ci(value, n, p, alpha)
    bias_corrected = bias_threshold is not None and n < bias_threshold
    return fisher_ci(value, n, alpha, bias_corrected=bias_corrected)


def _estimate_level(
    label: Label,
    x: np.ndarray,
    y: np.ndarray,
    controls: List[np.ndarray],
    measure: str,
    kind: Optional[str],
    alpha: float,
    bias_threshold: Optional[int],
    kendall_variance: str,
) -> LevelEstimate:
    n = int(x.size)
    stats_ = None
    try:
        if kind is None and measure == KENDALL:
            stats_ = kendall_tau(x, y)
            value = stats_.tau_hat
        elif kind is None:
            value = measure_correlation(x, y, measure)
        elif kind == PARTIAL:
            value = partial_correlation(x, y, controls, measure)
        else:
            value = semipartial_correlation(x, y, controls, measure)
    except InsufficientSampleError as error:
        return LevelEstimate(label, n, None, None, STATUS_INSUFFICIENT, str(error))
    except WavecorrError as error:
        logger.warning("Level %s: %s", label, error)
        return LevelEstimate(label, n, None, None, STATUS_DEGENERATE, str(error))

    if _boundary(value):
        return LevelEstimate(
            label,
            n,
            float(np.copysign(1.0, value)),
            None,
            STATUS_BOUNDARY,
            "correlation at +/-1; no interval",
        )

    try:
        interval = _interval(
            value, n, len(controls), measure, kind, alpha, bias_threshold,
            stats_, kendall_variance,
        )
    except InsufficientSampleError as error:
        return LevelEstimate(label, n, value, None, STATUS_INSUFFICIENT, str(error))
    except NegativeVarianceError as error:
        logger.warning("Level %s: %s", label, error)
        return LevelEstimate(label, n, value, None, STATUS_DEGENERATE, str(error))
    return LevelEstimate(label, n, value, interval, STATUS_OK)


def _correlogram_from_levels(
    labels: List[Label],
    x_levels: Dict,
    y_levels: Dict,
    control_levels: List[Dict],
    measure: str,
    alpha: float,
    partial_kind: str,
    bias_threshold: Optional[int],
    kendall_variance: str,
    threads: Optional[int],
) -> Tuple[List[LevelEstimate], Optional[List[LevelEstimate]]]:
    kinds = [None] + ([partial_kind] if control_levels else [])

    def evaluate(label: Label) -> List[LevelEstimate]:
        controls = [levels[label] for levels in control_levels]
        return [
            _estimate_level(
                label, x_levels[label], y_levels[label], controls if kind else [],
                measure, kind, alpha, bias_threshold, kendall_variance,
            )
            for kind in kinds
        ]

    per_level = evaluate_concurrently(evaluate, labels, threads)
    corr = [pair[0] for pair in per_level]
    partial = [pair[1] for pair in per_level] if control_levels else None
    return corr, partial


def _check_options(measure: str, partial_kind: str, n_controls: int, alpha: float) -> None:
    if measure not in MEASURES:
        raise WavecorrError(
            f"Unknown measure '{measure}'; expected one of {', '.join(MEASURES)}"
        )
    if partial_kind not in PARTIAL_KINDS:
        raise WavecorrError(
            f"Unknown partial kind '{partial_kind}'; expected partial or semipartial"
        )
    if partial_kind == SEMIPARTIAL and measure != PEARSON and n_controls > 1:
        raise WavecorrError(
            "Semipartial correlograms with several controls need the pearson measure"
        )
    if not 0.0 < alpha < 1.0:
        raise WavecorrError(f"alpha must lie in (0, 1) (got {alpha})")


def _control_names(controls: Sequence, names: Optional[Sequence[str]]) -> List[str]:
    if names is None:
        return [f"z{index}" for index in range(1, len(controls) + 1)]
    if len(names) != len(controls):
        raise WavecorrError(
            f"Got {len(names)} control names for {len(controls)} controls"
        )
    return list(names)


def correlogram(
    x,
    y,
    fb: FilterBank,
    L: int,
    scheme: str = ORTHOGONAL,
    measure: str = PEARSON,
    alpha: float = 0.05,
    controls: Optional[Sequence] = None,
    control_names: Optional[Sequence[str]] = None,
    partial_kind: str = PARTIAL,
    bias_threshold: Optional[int] = BIAS_THRESHOLD,
    kendall_variance: str = ASYMPTOTIC,
    threads: Optional[int] = None,
) -> Correlogram:
    """Wavelet correlogram of two series.

    Every series (x, y and each control) is transformed identically; each level then
    gets the chosen measure between the corresponding subvectors and the matching
    interval: fisher_ci without controls (bias corrected when n_eff is below
    bias_threshold), partial_ci / semipartial_ci with p = len(controls), kendall_ci
    for Kendall. Per-level failures become status markers, never exceptions.

    Args:
        x, y (array_like): Equal-length series.
        fb (FilterBank): Filter bank.
        L (int): Number of levels.
        scheme (str): orthogonal or nondecimated.
        measure (str): pearson, kendall or blomqvist.
        alpha (float): One minus the confidence level.
        controls (list, optional): Control series, removed in the given order.
        control_names (list, optional): Identifiers recorded for the controls.
        partial_kind (str): partial (controls removed from both) or semipartial
            (removed from x only).
        bias_threshold (int, optional): n_eff below which Fisher intervals are bias
            corrected; None disables the correction.
        kendall_variance (str): asymptotic or exact.
        threads (int, optional): Worker cap for level evaluation.

    Returns:
        Correlogram: L + 1 levels, with a partial curve when controls are given.

    Raises:
        TransformError: On length mismatch or transform preconditions.
        WavecorrError: On unknown options.
    """
    controls = [np.asarray(c, dtype=float).ravel() for c in (controls or [])]
    names = _control_names(controls, control_names)
    _check_options(measure, partial_kind, len(controls), alpha)

    series = [np.asarray(x, dtype=float).ravel(), np.asarray(y, dtype=float).ravel()]
    series += controls
    lengths = {s.size for s in series}
    if len(lengths) != 1:
        raise TransformError(f"All series must have equal length (got {sorted(lengths)})")

    decomposed = [_decompose_series(s, fb, L, scheme) for s in series]
    labels = level_order(L)
    corr, partial = _correlogram_from_levels(
        labels, decomposed[0], decomposed[1], decomposed[2:], measure, alpha,
        partial_kind, bias_threshold, kendall_variance, threads,
    )
    logger.debug(
        "Correlogram %s/%s/%s: n=%d, L=%d, controls=%s",
        measure, scheme, fb.name, series[0].size, L, names,
    )
    return Correlogram(
        levels=labels,
        corr=corr,
        partial_corr=partial,
        measure=measure,
        scheme=scheme,
        wavelet=fb.name,
        controls=names,
        alpha=alpha,
        partial_kind=partial_kind,
        bias_threshold=bias_threshold,
    )


def correlogram2d(
    A,
    B,
    fb: FilterBank,
    L: int,
    scheme: str = NONDECIMATED,
    measure: str = PEARSON,
    alpha: float = 0.05,
    controls: Optional[Sequence] = None,
    control_names: Optional[Sequence[str]] = None,
    partial_kind: str = PARTIAL,
    bias_threshold: Optional[int] = BIAS_THRESHOLD,
    kendall_variance: str = ASYMPTOTIC,
    threads: Optional[int] = None,
) -> Correlogram:
    """Correlogram of two square images over the diagonal-hierarchy blocks.

    Arguments as for correlogram; controls are images of the same side. n_eff of a
    level is the number of coefficients in its diagonal block.
    """
    images = [np.asarray(image, dtype=float) for image in [A, B] + list(controls or [])]
    names = _control_names(images[2:], control_names)
    _check_options(measure, partial_kind, len(images) - 2, alpha)
    shapes = {image.shape for image in images}
    if len(shapes) != 1:
        raise TransformError(f"All images must have the same shape (got {sorted(shapes)})")

    decomposed = [_decompose_image(image, fb, L, scheme) for image in images]
    labels = level_order(L)
    corr, partial = _correlogram_from_levels(
        labels, decomposed[0], decomposed[1], decomposed[2:], measure, alpha,
        partial_kind, bias_threshold, kendall_variance, threads,
    )
    return Correlogram(
        levels=labels,
        corr=corr,
        partial_corr=partial,
        measure=measure,
        scheme=scheme,
        wavelet=fb.name,
        controls=names,
        alpha=alpha,
        partial_kind=partial_kind,
        bias_threshold=bias_threshold,
    )


@dataclass
class ScaleDecomposition:
    """Exact split of the covariance and correlation of a pair across levels.

    With x and y de-meaned once and uncentered per-level moments:

        cov(x, y) = sum over levels of covariance_contributions
        rho(x, y) = sum over levels of weights * correlations

    Attributes:
        wavelet: Filter family.
        n: Series length.
        L: Number of levels.
        levels: 1..L then smooth.
        weights: w per level (w* for smooth); 0 where a level is degenerate.
        correlations: Uncentered levelwise correlation, None where degenerate.
        covariance_contributions: Weighted covariance term per level.
        recovered_correlation: sum of weights * correlations.
        direct_correlation: Pearson correlation of the raw inputs.
        covariance_sum: sum of covariance_contributions.
        direct_covariance: (1/n) sum x_t y_t of the de-meaned inputs.
    """

    wavelet: str
    n: int
    L: int
    levels: List[Label]
    weights: Dict[Label, float]
    correlations: Dict[Label, Optional[float]]
    covariance_contributions: Dict[Label, float]
    recovered_correlation: float
    direct_correlation: float
    covariance_sum: float
    direct_covariance: float

    @property
    def weight_sum(self) -> float:
        """Sum of the weights; not 1 in general."""
        return float(sum(self.weights.values()))

    def weighted_contribution(self, label: Label) -> float:
        correlation = self.correlations[label]
        return 0.0 if correlation is None else self.weights[label] * correlation

    def rows(self) -> List[Dict]:
        return [
            {
                "level": label,
                "weight": self.weights[label],
                "level_correlation": self.correlations[label],
                "weighted_contribution": self.weighted_contribution(label),
            }
            for label in self.levels
        ]


def scale_decomposition(x, y, fb: FilterBank, L: int) -> ScaleDecomposition:
    """Covariance decomposition and weighted correlation recovery (orthogonal DWT).

    Each weighted per-level covariance reduces to (1/n) times the subvector
    cross-product, so by orthogonality the terms add up to the direct covariance.
    Level weights are w = sigma_X,l sigma_Y,l / (2^l sigma_X sigma_Y) with 2^L for
    the smooth level, sigma the root mean square of the coefficients.

    Raises:
        TransformError: On unequal or non-dyadic lengths or invalid L.
        DegenerateScaleError: If either series is constant.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise TransformError(f"Length mismatch: {x.size} vs {y.size}")
    x = x - x.mean()
    y = y - y.mean()
    n = x.size

    sigma_x = np.sqrt(np.mean(x * x))
    sigma_y = np.sqrt(np.mean(y * y))
    if sigma_x == 0.0 or sigma_y == 0.0:
        raise DegenerateScaleError("Total variance is zero; correlation is undefined")
    direct_covariance = float(np.mean(x * y))
    direct_correlation = float(np.clip(direct_covariance / (sigma_x * sigma_y), -1, 1))

    x_levels = dict(dwt_forward(x, fb, L).subvectors())
    y_levels = dict(dwt_forward(y, fb, L).subvectors())

    labels = level_order(L)
    weights, correlations, contributions = {}, {}, {}
    for label in labels:
        cx, cy = x_levels[label], y_levels[label]
        scale = 2.0 ** (L if label == SMOOTH_LABEL else label)
        cross = float(np.dot(cx, cy))
        contributions[label] = cross / n
        energy_x, energy_y = float(np.dot(cx, cx)), float(np.dot(cy, cy))
        if (
            energy_x <= ENERGY_TOLERANCE * n * sigma_x**2
            or energy_y <= ENERGY_TOLERANCE * n * sigma_y**2
        ):
            logger.warning("Level %s has zero energy; weight set to 0", label)
            weights[label], correlations[label] = 0.0, None
            continue
        rms_x = np.sqrt(energy_x / cx.size)
        rms_y = np.sqrt(energy_y / cy.size)
        weights[label] = float(rms_x * rms_y / (scale * sigma_x * sigma_y))
        correlations[label] = float(cross / np.sqrt(energy_x * energy_y))

    recovered = sum(
        weights[label] * correlations[label]
        for label in labels
        if correlations[label] is not None
    )
    return ScaleDecomposition(
        wavelet=fb.name,
        n=n,
        L=L,
        levels=labels,
        weights=weights,
        correlations=correlations,
        covariance_contributions=contributions,
        recovered_correlation=float(recovered),
        direct_correlation=direct_correlation,
        covariance_sum=float(sum(contributions.values())),
        direct_covariance=direct_covariance,
    )


def _check_runs(runs: Sequence[Correlogram]) -> None:
    first = runs[0]
    for index, run in enumerate(runs[1:], start=2):
        for attribute in ("levels", "measure", "scheme", "wavelet", "partial_kind"):
            if getattr(run, attribute) != getattr(first, attribute):
                raise ManifestError(
                    f"Run {index} differs from run 1 in {attribute}: "
                    f"{getattr(run, attribute)!r} vs {getattr(first, attribute)!r}"
                )
        if len(run.controls) != len(first.controls):
            raise ManifestError(
                f"Run {index} has {len(run.controls)} controls; run 1 has "
                f"{len(first.controls)}"
            )
        if [e.n_eff for e in run.corr] != [e.n_eff for e in first.corr]:
            raise ManifestError(f"Run {index} has different per-level sample sizes")


def _average_block(
    blocks: List[List[LevelEstimate]], kind: Optional[str], template: Correlogram
) -> List[LevelEstimate]:
    averaged = []
    p = len(template.controls)
    for position, label in enumerate(template.levels):
        estimates = [block[position] for block in blocks]
        n = estimates[0].n_eff
        values = [e.estimate for e in estimates if e.defined]
        if not values:
            averaged.append(
                LevelEstimate(
                    label, n, None, None, estimates[0].status,
                    "undefined in every run",
                )
            )
            continue
        mean = float(np.mean(values))
        message = (
            "" if len(values) == len(estimates)
            else f"averaged over {len(values)} of {len(estimates)} runs"
        )
        if _boundary(mean):
            averaged.append(
                LevelEstimate(label, n, float(np.copysign(1.0, mean)), None,
                              STATUS_BOUNDARY, message)
            )
            continue
        try:
            interval = _interval(
                mean, n, p, PEARSON, kind, template.alpha, template.bias_threshold
            )
        except InsufficientSampleError as error:
            averaged.append(
                LevelEstimate(label, n, mean, None, STATUS_INSUFFICIENT, str(error))
            )
            continue
        averaged.append(LevelEstimate(label, n, mean, interval, STATUS_OK, message))
    return averaged


def average_correlogram(runs: Sequence[Correlogram]) -> Correlogram:
    """Averages correlograms across runs.

    Per level the arithmetic mean of the defined estimates is taken, then a Fisher-z
    interval is formed around the mean with n_eff the per-level subvector length
    (partial_ci / semipartial_ci for the partial curve). A single run is returned
    unchanged.

    Raises:
        ManifestError: If there are no runs or their structure differs.
    """
    runs = list(runs)
    if not runs:
        raise ManifestError("No correlograms to average")
    if len(runs) == 1:
        return runs[0]
    _check_runs(runs)

    template = runs[0]
    corr = _average_block([run.corr for run in runs], None, template)
    partial = None
    if template.partial_corr is not None:
        partial = _average_block(
            [run.partial_corr for run in runs], template.partial_kind, template
        )
    logger.debug("Averaged %d correlograms", len(runs))
    return Correlogram(
        levels=list(template.levels),
        corr=corr,
        partial_corr=partial,
        measure=template.measure,
        scheme=template.scheme,
        wavelet=template.wavelet,
        controls=list(template.controls),
        alpha=template.alpha,
        partial_kind=template.partial_kind,
        bias_threshold=template.bias_threshold,
        runs=sum(run.runs for run in runs),
    )


def independent_baseline(
    records: Sequence[Tuple],
    analyse: Callable[..., Correlogram],
    threads: Optional[int] = None,
) -> Correlogram:
    """Average correlogram of x from record i against y from record i+1 (cyclic).

    Pairs series from different records, giving the reference curve expected when
    there is no same-record dependence.

    Args:
        records (list): (x, y, *controls) tuples, one per record.
        analyse (Callable): Builds a correlogram from (x, y, controls).
        threads (int, optional): Worker cap.

    Raises:
        ManifestError: With fewer than two records.
    """
    records = list(records)
    if len(records) < 2:
        raise ManifestError("Independent baseline needs at least two records")

    def shifted(index: int) -> Correlogram:
        partner = records[(index + 1) % len(records)]
        current = records[index]
        return analyse(current[0], partner[1], list(current[2:]))

    runs = evaluate_concurrently(shifted, range(len(records)), threads)
    return average_correlogram(runs)


def compare_wavelets(
    x, y, families: Sequence[str], L: int, **options
) -> Dict[str, Correlogram]:
    """Correlograms of one pair under several wavelet families.

    Args:
        x, y (array_like): Series.
        families (list): Filter names.
        L (int): Number of levels.
        **options: Passed to correlogram (scheme, measure, alpha, controls, ...).

    Returns:
        dict: {family: Correlogram}, in the given order.
    """
    return {
        family: correlogram(x, y, get_filter(family), L, **options)
        for family in families
    }
