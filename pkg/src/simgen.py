"""Seeded synthetic inputs: coupled AR(1) systems, Gaussian vectors, image pairs.

Every generator draws from numpy's PCG64 bit generator, seeded through
SeedSequence(seed).spawn(k) so that independent streams (X innovations, Y
innovations, image fields) never share state.
"""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy import linalg, ndimage, signal

from logutils import get_logger
from src.errors import WavecorrError

logger = get_logger(__name__)

GENERATOR = "numpy.random.PCG64"
SEEDING_RULE = "SeedSequence(seed).spawn(k), one child stream per component"

DEFAULT_LENGTH = 512
DEFAULT_BURN_IN = 1000

X_AUTOREGRESSION = 0.5
Y_AUTOREGRESSION = 0.5
# system id -> coefficient of X_{t-1} in the Y recursion
COUPLING = {1: 0.5, 2: 1.0}


def generator_identity() -> Dict[str, str]:
    """Generator description recorded in simulation metadata."""
    return {
        "bit_generator": GENERATOR,
        "seeding": SEEDING_RULE,
        "numpy_version": np.__version__,
    }


def _streams(seed: int, count: int):
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(count)]


@dataclass(frozen=True)
class ARSystem:
    """Coupled AR(1) pair.

    X_t = 0.5 X_{t-1} + e_t
    Y_t = b X_{t-1} + 0.5 Y_{t-1} + u_t,  b = 0.5 (system 1) or 1 (system 2)

    e and u are independent standard normal streams; X_0 = Y_0 = 0 and the first
    burn_in samples are discarded.
    """

    system_id: int
    n: int = DEFAULT_LENGTH
    seed: int = 0
    burn_in: int = DEFAULT_BURN_IN

    def __post_init__(self):
        if self.system_id not in COUPLING:
            raise WavecorrError(
                f"Unknown AR system {self.system_id}; expected one of "
                + ", ".join(str(k) for k in COUPLING)
            )
        if self.n < 1:
            raise WavecorrError(f"Series length must be at least 1 (got {self.n})")
        if self.burn_in < 0:
            raise WavecorrError(f"Burn-in must be non-negative (got {self.burn_in})")
        if self.seed < 0:
            raise WavecorrError(f"Seed must be non-negative (got {self.seed})")

    @property
    def coupling(self) -> float:
        return COUPLING[self.system_id]

    def metadata(self) -> Dict:
        return {
            "system": self.system_id,
            "n": self.n,
            "seed": self.seed,
            "burn_in": self.burn_in,
            "generator": generator_identity(),
        }


def draw_innovations(cfg: ARSystem) -> Tuple[np.ndarray, np.ndarray]:
    """Independent standard normal innovation streams for X and Y.

    Each has burn_in + n values (the initial state is not drawn).
    """
    rng_x, rng_y = _streams(cfg.seed, 2)
    total = cfg.burn_in + cfg.n
    return rng_x.standard_normal(total), rng_y.standard_normal(total)


def simulate_ar_pair(cfg: ARSystem) -> Tuple[np.ndarray, np.ndarray]:
    """Simulates one of the coupled AR(1) systems.

    Returns:
        tuple: (x, y), each of length cfg.n, after discarding cfg.burn_in samples.
    """
    e, u = draw_innovations(cfg)
    # index 0 is the zero initial state
    e = np.concatenate([[0.0], e])
    u = np.concatenate([[0.0], u])

    x = signal.lfilter([1.0], [1.0, -X_AUTOREGRESSION], e)
    x_lagged = np.concatenate([[0.0], x[:-1]])
    y = signal.lfilter([1.0], [1.0, -Y_AUTOREGRESSION], cfg.coupling * x_lagged + u)

    start = 1 + cfg.burn_in
    logger.debug(
        "Simulated AR system %d: n=%d, seed=%d, burn_in=%d",
        cfg.system_id, cfg.n, cfg.seed, cfg.burn_in,
    )
    return x[start:], y[start:]


def stationary_correlation(system_id: int) -> float:
    """Stationary corr(X_t, Y_t) of an AR system in closed form.

    With a = 0.5 (X), c = 0.5 (Y) and coupling b:
      var X = 1 / (1 - a^2)
      cov(X, Y) = a b var X / (1 - a c)
      var Y = (b^2 var X + 2 b c cov(X, Y) + 1) / (1 - c^2)
    """
    if system_id not in COUPLING:
        raise WavecorrError(f"Unknown AR system {system_id}")
    a, c, b = X_AUTOREGRESSION, Y_AUTOREGRESSION, COUPLING[system_id]
    var_x = 1.0 / (1.0 - a**2)
    cov_xy = a * b * var_x / (1.0 - a * c)
    var_y = (b**2 * var_x + 2.0 * b * c * cov_xy + 1.0) / (1.0 - c**2)
    return float(cov_xy / np.sqrt(var_x * var_y))


def white_noise_pair(n: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Two independent standard normal series of length n."""
    if n < 1:
        raise WavecorrError(f"Series length must be at least 1 (got {n})")
    rng_x, rng_y = _streams(seed, 2)
    return rng_x.standard_normal(n), rng_y.standard_normal(n)


def correlated_gaussian(n: int, correlation, seed: int, exact: bool = False) -> np.ndarray:
    """Draws k correlated Gaussian series.

    Args:
        n (int): Series length.
        correlation (array_like): k x k target correlation matrix.
        seed (int): Seed.
        exact (bool): Whiten the draws first so the sample correlation equals the
            target up to rounding (needs n > k).

    Returns:
        np.ndarray: k x n array, one series per row.
    """
    R = np.asarray(correlation, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise WavecorrError(f"Correlation matrix must be square (got shape {R.shape})")
    k = R.shape[0]
    try:
        target = linalg.cholesky(R, lower=True)
    except linalg.LinAlgError as error:
        raise WavecorrError(f"Correlation matrix is not positive definite: {error}") from error

    draws = np.random.default_rng(np.random.SeedSequence(seed)).standard_normal((k, n))
    if exact:
        if n <= k:
            raise WavecorrError(f"Exact correlation needs n > {k} (got {n})")
        draws = draws - draws.mean(axis=1, keepdims=True)
        sample = draws @ draws.T / n
        draws = linalg.solve_triangular(
            linalg.cholesky(sample, lower=True), draws, lower=True
        )
    return target @ draws


def _smooth_field(rng: np.random.Generator, n: int, smoothness: float) -> np.ndarray:
    field = rng.standard_normal((n, n))
    if smoothness > 0:
        field = ndimage.gaussian_filter(field, sigma=smoothness, mode="wrap")
    return (field - field.mean()) / field.std()


def simulate_image_pair(
    n: int,
    dependence: float,
    seed: int,
    noise: float = 0.05,
    smoothness: float = 1.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """Two n x n images sharing a smooth component.

    A = d S + (1 - d) S_A + noise E_A and B = d S + (1 - d) S_B + noise E_B, where
    S, S_A, S_B are independent unit-variance Gaussian fields blurred with periodic
    boundaries and E_A, E_B are independent white noise.

    Raises:
        WavecorrError: If n < 8, dependence is outside [0, 1], or noise/smoothness
            is negative.
    """
    if n < 8:
        raise WavecorrError(f"Image side must be at least 8 (got {n})")
    if not 0.0 <= dependence <= 1.0:
        raise WavecorrError(f"Dependence must lie in [0, 1] (got {dependence})")
    if noise < 0 or smoothness < 0:
        raise WavecorrError("Noise and smoothness must be non-negative")

    shared_rng, a_rng, b_rng, noise_a_rng, noise_b_rng = _streams(seed, 5)
    shared = _smooth_field(shared_rng, n, smoothness)
    A = dependence * shared + (1.0 - dependence) * _smooth_field(a_rng, n, smoothness)
    B = dependence * shared + (1.0 - dependence) * _smooth_field(b_rng, n, smoothness)
    if noise > 0:
        A = A + noise * noise_a_rng.standard_normal((n, n))
        B = B + noise * noise_b_rng.standard_normal((n, n))

    logger.debug(
        "Simulated image pair: n=%d, dependence=%.3f, noise=%.3f, seed=%d",
        n, dependence, noise, seed,
    )
    return A, B
