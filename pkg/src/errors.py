"""Exception hierarchy shared by the transform and statistics modules."""

from typing import Sequence


class WavecorrError(ValueError):
    """Base class for every data or numeric error raised by the library."""


class UnknownWaveletError(WavecorrError):
    """Requested wavelet family is not supported."""


class FilterBankError(WavecorrError):
    """Filter taps violate the orthonormality conditions."""


class TransformError(WavecorrError):
    """Input shape, length or depth does not fit the requested transform."""


class DegenerateScaleError(WavecorrError):
    """A coefficient vector has zero variance (or all-zero contrasts)."""


class CollinearityError(WavecorrError):
    """A correlation inside the partial-correlation recursion reached +/-1."""

    def __init__(self, stage: str, value: float):
        self.stage = stage
        self.value = value
        super().__init__(
            f"Collinear variables at stage {stage} (correlation {value:.17g})"
        )


class DegenerateIntervalError(WavecorrError):
    """Fisher interval requested for a correlation of exactly +/-1."""


class InsufficientSampleError(WavecorrError):
    """Sample is too small for the requested estimate or interval."""


class TiedValuesError(WavecorrError):
    """Kendall tau received tied observations."""

    def __init__(self, variable: str, indices: Sequence[int]):
        self.variable = variable
        self.indices = list(indices)
        shown = ", ".join(str(i) for i in self.indices[:10])
        more = "" if len(self.indices) <= 10 else ", ..."
        super().__init__(
            f"Tied values in {variable} at indices [{shown}{more}]; "
            "tie-corrected Kendall variants are not supported"
        )


class NegativeVarianceError(WavecorrError):
    """Exact Kendall variance formula evaluated to a negative number."""


class ManifestError(WavecorrError):
    """Averaging manifest or replicate set is malformed."""


class InputFormatError(WavecorrError):
    """Input file cannot be parsed as a numeric series or matrix."""
