"""
Additive quantization noise model (AQNM) and its Lloyd-Max reference.

A b-bit scalar MMSE quantizer applied to a Gaussian input is linearized as
y_q = α·y + n_q with distortion factor β(b), gain α(b) = 1 - β(b) and
quantization noise uncorrelated with y. For b <= 5 the distortion factors
are the Lloyd-Max values for a unit Gaussian (pinned in BETA_TABLE and
reproduced by lloyd_max_codebook); for larger b the high-resolution law
β(b) = (π√3/2)·2^(-2b) applies.

The relaxed MSQE msqe() uses the high-resolution law for every b, including
b = 0. It is the bit allocator's objective only; reported distortions use
distortion_factors().

Example:
    >>> from src.quantization import alpha, beta, lloyd_max_codebook
    >>> beta(1)
    0.3634
    >>> round(lloyd_max_codebook(1).distortion, 4)
    0.3634
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.stats import norm

from .errors import ConvergenceError, DimensionMismatchError, InvalidParameterError

logger = logging.getLogger(__name__)

HIGH_RES_COEFFICIENT: float = np.pi * np.sqrt(3.0) / 2.0

# Lloyd-Max distortion of a unit-variance Gaussian for b = 1..5
BETA_TABLE: np.ndarray = np.array([0.3634, 0.1175, 0.03454, 0.009497, 0.002499])

ArrayLike = Union[int, float, np.ndarray]


def distortion_factors(bits: ArrayLike) -> np.ndarray:
    """
    Vectorized β(b): 1 for b = 0, BETA_TABLE for 1 <= b <= 5, (π√3/2)·2^(-2b) above.

    Args:
        bits: Non-negative integer bit counts (scalar or array).

    Returns:
        Array of distortion factors with the shape of ``bits``.

    Raises:
        InvalidParameterError: On negative bit counts.
    """
    b = np.asarray(bits)
    if np.any(b < 0):
        raise InvalidParameterError(f"bit counts must be non-negative, got {bits}")

    b = b.astype(int)
    table_idx = np.clip(b - 1, 0, len(BETA_TABLE) - 1)
    high_res = HIGH_RES_COEFFICIENT * np.power(2.0, -2.0 * b)
    return np.where(b == 0, 1.0, np.where(b <= len(BETA_TABLE), BETA_TABLE[table_idx], high_res))


def quantization_gains(bits: ArrayLike) -> np.ndarray:
    """Vectorized α(b) = 1 - β(b)."""
    return 1.0 - distortion_factors(bits)


def beta(b: int) -> float:
    """
    Distortion factor β(b) of a b-bit quantizer.

    b = 0 gives 1 (the chain carries no signal).
    """
    return float(distortion_factors(b))


def alpha(b: int) -> float:
    """Quantization gain α(b) = 1 - β(b); α(0) = 0."""
    return float(quantization_gains(b))


def msqe(b: ArrayLike, sigma2_x: ArrayLike) -> np.ndarray:
    """
    Relaxed mean squared quantization error (π√3/2)·σ²·2^(-2b).

    Valid for any real b >= 0 by construction; at b = 0 it exceeds σ², which is
    acceptable for an optimization objective.

    Args:
        b: Bits (real or integer, scalar or array).
        sigma2_x: Signal variance(s), same shape as b or broadcastable.

    Returns:
        The MSQE (scalar arrays for scalar inputs).
    """
    b_arr = np.asarray(b, dtype=float)
    s_arr = np.asarray(sigma2_x, dtype=float)
    if np.any(b_arr < 0) or np.any(s_arr < 0):
        raise InvalidParameterError("msqe needs b >= 0 and sigma2_x >= 0")
    return HIGH_RES_COEFFICIENT * s_arr * np.power(2.0, -2.0 * b_arr)


@dataclass(frozen=True)
class LloydMaxCodebook:
    """
    MMSE scalar quantizer for a standard real Gaussian.

    Attributes:
        bits: Resolution b (2^b levels).
        levels: Reconstruction levels, ascending.
        thresholds: Decision thresholds including ±inf (length 2^b + 1).
        distortion: Mean squared error for a unit-variance input.
        iterations: Lloyd iterations used.
    """

    bits: int
    levels: np.ndarray
    thresholds: np.ndarray
    distortion: float
    iterations: int

    def quantize(self, x: np.ndarray) -> np.ndarray:
        """Map samples to their reconstruction levels."""
        cells = np.searchsorted(self.thresholds[1:-1], x, side="right")
        return self.levels[cells]


def _cell_moments(thresholds: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Probability, first and second partial moments of N(0,1) on each cell."""
    lo, hi = thresholds[:-1], thresholds[1:]
    prob = norm.cdf(hi) - norm.cdf(lo)
    pdf_lo, pdf_hi = norm.pdf(lo), norm.pdf(hi)
    first = pdf_lo - pdf_hi
    # t·φ(t) vanishes at ±inf
    t_pdf_lo = np.where(np.isfinite(lo), lo * pdf_lo, 0.0)
    t_pdf_hi = np.where(np.isfinite(hi), hi * pdf_hi, 0.0)
    second = prob + t_pdf_lo - t_pdf_hi
    return prob, first, second


def _distortion(thresholds: np.ndarray, levels: np.ndarray) -> float:
    prob, first, second = _cell_moments(thresholds)
    return float(np.sum(second - 2.0 * levels * first + levels**2 * prob))


def lloyd_max_codebook(b: int, iterations: int = 10000, tolerance: float = 1e-12) -> LloydMaxCodebook:
    """
    Design the 2^b-level MMSE quantizer of a standard Gaussian by Lloyd iteration.

    Thresholds start from the asymptotically optimal companding law (point
    density ∝ φ^(1/3), i.e. quantiles of N(0, 3)); levels are cell centroids and
    thresholds midpoints. Iteration stops when the relative distortion change
    falls below ``tolerance``. Cell integrals use closed-form Gaussian moments.

    Args:
        b: Resolution in bits, 1..8.
        iterations: Maximum Lloyd iterations.
        tolerance: Relative distortion change that counts as converged.

    Returns:
        The converged codebook.

    Raises:
        InvalidParameterError: If b is outside 1..8.
        ConvergenceError: If the distortion has not settled after ``iterations``.

    Example:
        >>> cb = lloyd_max_codebook(1)
        >>> cb.levels
        array([-0.79788456,  0.79788456])
    """
    if not 1 <= b <= 8:
        raise InvalidParameterError(f"Lloyd-Max design supports 1 <= b <= 8, got {b}")

    n_levels = 2**b
    thresholds = norm.ppf(np.linspace(0.0, 1.0, n_levels + 1), scale=np.sqrt(3.0))
    previous = np.inf

    for it in range(1, iterations + 1):
        prob, first, _ = _cell_moments(thresholds)
        levels = first / prob
        thresholds = np.concatenate(([-np.inf], 0.5 * (levels[:-1] + levels[1:]), [np.inf]))
        distortion = _distortion(thresholds, levels)

        if abs(previous - distortion) <= tolerance * distortion:
            logger.debug(f"Lloyd-Max b={b} converged after {it} iterations, distortion {distortion:.6g}")
            return LloydMaxCodebook(
                bits=b, levels=levels, thresholds=thresholds, distortion=distortion, iterations=it
            )
        previous = distortion

    raise ConvergenceError(f"Lloyd-Max design for b={b}", iterations)


def empirical_distortion(codebook: LloydMaxCodebook, n_samples: int, rng: np.random.Generator) -> float:
    """Normalized MSE of the codebook measured on ``n_samples`` standard Gaussian draws."""
    x = rng.standard_normal(n_samples)
    return float(np.mean((x - codebook.quantize(x)) ** 2) / np.mean(x**2))


def quantization_noise_covariance(h_b: np.ndarray, bits: np.ndarray, p_u: float) -> np.ndarray:
    """
    Diagonal AQNM noise covariance W_α·W_β·diag(p_u·H_b·H_b^H + I).

    Entry i is α_i·β_i·(p_u·‖[H_b]_{i,:}‖² + 1).

    Args:
        h_b: Effective channel (N_RF×N_u).
        bits: Integer bits per RF chain (length N_RF).
        p_u: Linear transmit power.

    Returns:
        Real N_RF×N_RF diagonal matrix.

    Raises:
        DimensionMismatchError: If len(bits) != N_RF.
    """
    return np.diag(_noise_variances(h_b, bits, p_u))


def _noise_variances(h_b: np.ndarray, bits: np.ndarray, p_u: float) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.shape != (h_b.shape[0],):
        raise DimensionMismatchError("bits", (h_b.shape[0],), bits.shape)

    b = distortion_factors(bits)
    a = 1.0 - b
    row_energy = np.sum(np.abs(h_b) ** 2, axis=1)
    return a * b * (p_u * row_energy + 1.0)


def apply_aqnm(
    y: np.ndarray,
    bits: np.ndarray,
    h_b: np.ndarray,
    p_u: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Draw the AQNM output W_α·y + n_q for received samples y.

    n_q is zero-mean circularly-symmetric complex Gaussian with the covariance of
    quantization_noise_covariance, independent across columns of ``y``.

    Args:
        y: Received samples, shape (N_RF,) or (N_RF, n_samples).
        bits: Integer bits per RF chain (length N_RF).
        h_b: Effective channel used for the noise covariance.
        p_u: Linear transmit power.
        rng: Caller-owned random generator.

    Returns:
        Quantized samples with the shape of ``y``.

    Raises:
        DimensionMismatchError: If the first dimension of y is not N_RF.
    """
    y = np.asarray(y)
    if y.shape[0] != h_b.shape[0]:
        raise DimensionMismatchError("y", h_b.shape[0], y.shape[0])

    variances = _noise_variances(h_b, bits, p_u)
    gains = quantization_gains(bits)
    scale = np.sqrt(variances / 2.0).reshape((-1,) + (1,) * (y.ndim - 1))
    noise = scale * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return gains.reshape(scale.shape) * y + noise
