"""
Monte Carlo link evaluation: uplink sum spectral efficiency and energy efficiency.

The digital combiner is MRC on the quantized signal, F = W_α·H_b. With
H_b = G·D^{1/2}, user k's rate is

    R_k = log2(1 + p_u·γ_k·|Σ_i α_i²·|g_ik|²|² / (UI_k + N_k + QN_k))

    UI_k = p_u·Σ_{m≠k} γ_m·|g_k^H·W_α²·g_m|²
    N_k  = g_k^H·W_α⁴·g_k
    QN_k = g_k^H·W_α·R_q·W_α·g_k

where R_q is the AQNM noise covariance. All vectors have N_RF entries.

Four receivers are compared over a grid of average resolutions b̄:

    infinite     every chain at b_cap bits
    fixed        every chain at b̄ bits
    adc_ba       allocation under the fixed receiver's total ADC power
    proposed_ba  allocation under the adc_ba receiver's total power, with P̄_SW
                 from the trained switching-power model
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .allocator import AllocationProblem, allocate_bits, allocate_bits_adc_constrained
from .channel import realize_channel
from .config import SystemConfig
from .errors import DimensionMismatchError, EmptyChannelError, InfeasibleBudgetError, InvalidParameterError
from .power import BitAllocation, relaxed_adc_power, total_power
from .quantization import distortion_factors
from .switching import SwitchingPowerModel, predict_psw

logger = logging.getLogger(__name__)


class Method(str, Enum):
    """Receiver configurations compared by run_comparison."""

    INFINITE = "infinite"
    FIXED = "fixed"
    ADC_BA = "adc_ba"
    PROPOSED_BA = "proposed_ba"


@dataclass(frozen=True)
class RateTerms:
    """
    Per-user SINR terms under quantized MRC (arrays of length N_u).

    Attributes:
        signal: p_u·γ_k·|𝛂^H·v_k|².
        user_interference: UI_k.
        noise: N_k.
        quant_noise: QN_k.
    """

    signal: np.ndarray
    user_interference: np.ndarray
    noise: np.ndarray
    quant_noise: np.ndarray

    @property
    def rates(self) -> np.ndarray:
        """log2(1 + SINR_k); users with a zero denominator get rate 0."""
        denominator = self.user_interference + self.noise + self.quant_noise
        with np.errstate(divide="ignore", invalid="ignore"):
            sinr = np.where(denominator > 0, self.signal / denominator, 0.0)
        return np.log2(1.0 + sinr)


@dataclass(frozen=True)
class SweepResult:
    """
    Means of one (method, b̄) point.

    ``ee`` is derived from the reported means, so ee = sum_se·W/mean_power holds
    exactly.

    Attributes:
        method: Receiver configuration.
        b_bar: Average resolution of the point.
        sum_se: Mean sum spectral efficiency (bps/Hz).
        ee: Energy efficiency (bits/joule).
        mean_power: Mean total receiver power (watts, actual switching).
        mean_m_opt: Mean number of chains considered active.
        n: Realization count.
        infeasible: Realizations where the allocation was infeasible (recorded at rate 0).
    """

    method: Method
    b_bar: int
    sum_se: float
    ee: float
    mean_power: float
    mean_m_opt: float
    n: int
    infeasible: int = 0

    def csv_row(self) -> Tuple:
        """Fields in results-CSV column order."""
        return (self.method.value, self.b_bar, self.sum_se, self.ee, self.mean_power, self.mean_m_opt, self.n)


def rate_terms(h_b: np.ndarray, gamma: np.ndarray, bits: np.ndarray, p_u: float) -> RateTerms:
    """
    SINR terms of every user for one channel and allocation.

    Args:
        h_b: Effective channel G·D^{1/2} (N_RF×N_u).
        gamma: Large-scale gains γ_k (positive, length N_u).
        bits: Integer bits per RF chain (length N_RF).
        p_u: Linear transmit power.

    Raises:
        DimensionMismatchError: If bits or gamma have the wrong length.
        InvalidParameterError: If a γ_k is not positive.
    """
    n_rf, n_u = h_b.shape
    bits = np.asarray(bits)
    gamma = np.asarray(gamma, dtype=float)
    if bits.shape != (n_rf,):
        raise DimensionMismatchError("bits", (n_rf,), bits.shape)
    if gamma.shape != (n_u,):
        raise DimensionMismatchError("gamma", (n_u,), gamma.shape)
    if np.any(gamma <= 0):
        raise InvalidParameterError("large-scale gains must be positive")

    g = h_b / np.sqrt(gamma)[np.newaxis, :]
    beta = distortion_factors(bits)
    alpha = 1.0 - beta
    alpha2 = alpha**2

    # C[k, m] = g_k^H W_α² g_m
    c = g.conj().T @ (alpha2[:, np.newaxis] * g)
    c_abs2 = np.abs(c) ** 2
    desired = np.real(np.diag(c))

    signal = p_u * gamma * desired**2
    interference = p_u * (c_abs2 @ gamma - np.diag(c_abs2) * gamma)
    g_abs2 = np.abs(g) ** 2
    noise = (alpha2**2) @ g_abs2

    r_q = alpha * beta * (p_u * np.sum(np.abs(h_b) ** 2, axis=1) + 1.0)
    quant_noise = (alpha2 * r_q) @ g_abs2

    return RateTerms(
        signal=signal,
        user_interference=np.maximum(interference, 0.0),
        noise=noise,
        quant_noise=quant_noise,
    )


def instantaneous_rate(h_b: np.ndarray, gamma: np.ndarray, bits: np.ndarray, p_u: float) -> np.ndarray:
    """
    Per-user achievable rates (bps/Hz) under quantized MRC.

    All bits zero gives all-zero rates.

    Example:
        >>> instantaneous_rate(np.array([[1.0 + 0j]]), np.array([1.0]), np.array([0]), 100.0)
        array([0.])
    """
    return rate_terms(h_b, gamma, bits, p_u).rates


def energy_efficiency(sum_rate_bps_per_hz: float, total_power_w: float, bandwidth_hz: float) -> float:
    """
    Energy efficiency R·W/P_tot in bits/joule.

    Raises:
        InvalidParameterError: If total_power_w <= 0.
    """
    if total_power_w <= 0:
        raise InvalidParameterError(f"total power must be positive, got {total_power_w}")
    return sum_rate_bps_per_hz * bandwidth_hz / total_power_w


class _Accumulator:
    """Per-method sample store; means use compensated summation."""

    def __init__(self) -> None:
        self.sum_se: List[float] = []
        self.power: List[float] = []
        self.m_opt: List[float] = []
        self.infeasible = 0

    def add(self, sum_se: float, power: float, m_opt: float) -> None:
        self.sum_se.append(sum_se)
        self.power.append(power)
        self.m_opt.append(m_opt)

    def result(self, method: Method, b_bar: int, bandwidth_hz: float) -> SweepResult:
        n = len(self.sum_se)
        mean_se = math.fsum(self.sum_se) / n
        mean_power = math.fsum(self.power) / n
        return SweepResult(
            method=method,
            b_bar=b_bar,
            sum_se=mean_se,
            ee=energy_efficiency(mean_se, mean_power, bandwidth_hz),
            mean_power=mean_power,
            mean_m_opt=math.fsum(self.m_opt) / n,
            n=n,
            infeasible=self.infeasible,
        )


def _evaluate_point(
    cfg: SystemConfig,
    b_bar: int,
    psw_model: Optional[SwitchingPowerModel],
    n_realizations: int,
    block_rng: np.random.Generator,
    refill: bool,
    progress: bool,
) -> List[SweepResult]:
    """All four methods at one b̄ over one channel stream."""
    n_rf = cfg.n_rf
    acc: Dict[Method, _Accumulator] = {m: _Accumulator() for m in Method}
    infinite_bits = np.full(n_rf, cfg.b_cap, dtype=int)
    fixed_bits = np.full(n_rf, b_bar, dtype=int)
    # fixed receivers never switch; allocating receivers start deactivated
    prev = {
        Method.ADC_BA: np.zeros(n_rf, dtype=int),
        Method.PROPOSED_BA: np.zeros(n_rf, dtype=int),
    }
    # ADC power of the fixed b̄ receiver, 2·N_RF·c·f_s·2^b̄
    adc_budget: float = 2.0 * n_rf * relaxed_adc_power(b_bar, cfg)

    for _ in tqdm(range(n_realizations), desc=f"b_bar={b_bar}", unit="block", leave=False, disable=not progress):
        channel = realize_channel(cfg, block_rng)
        h_b, gamma = channel.h_b, channel.gamma
        sigma2: np.ndarray = cfg.p_u * np.sum(np.abs(h_b) ** 2, axis=1)

        for method, bits in ((Method.INFINITE, infinite_bits), (Method.FIXED, fixed_bits)):
            power = total_power(BitAllocation(bits=bits, prev_bits=bits, b_cap=cfg.b_cap), cfg).total
            se = float(np.sum(instantaneous_rate(h_b, gamma, bits, cfg.p_u)))
            acc[method].add(se, power, n_rf)

        adc_result = allocate_bits_adc_constrained(sigma2, adc_budget, cfg, refill=refill)
        adc_power_total = total_power(BitAllocation(adc_result.bits, prev[Method.ADC_BA], cfg.b_cap), cfg).total
        se = float(np.sum(instantaneous_rate(h_b, gamma, adc_result.bits, cfg.p_u)))
        acc[Method.ADC_BA].add(se, adc_power_total, adc_result.m_opt)
        prev[Method.ADC_BA] = adc_result.bits

        # proposed receiver gets the total power the adc_ba receiver drew in this block
        psw_bar: float = predict_psw(psw_model, adc_power_total) if psw_model is not None else 0.0
        try:
            result = allocate_bits(AllocationProblem(sigma2, adc_power_total, psw_bar, cfg), refill=refill)
        except (InfeasibleBudgetError, EmptyChannelError) as e:
            logger.debug(f"Proposed BA infeasible at b_bar={b_bar}: {e}")
            acc[Method.PROPOSED_BA].infeasible += 1
            bits = np.zeros(n_rf, dtype=int)
            power = total_power(BitAllocation(bits, prev[Method.PROPOSED_BA], cfg.b_cap), cfg).total
            acc[Method.PROPOSED_BA].add(0.0, power, 0)
        else:
            bits = result.bits
            power = total_power(BitAllocation(bits, prev[Method.PROPOSED_BA], cfg.b_cap), cfg).total
            se = float(np.sum(instantaneous_rate(h_b, gamma, bits, cfg.p_u)))
            acc[Method.PROPOSED_BA].add(se, power, result.m_opt)
        prev[Method.PROPOSED_BA] = bits

    infeasible = acc[Method.PROPOSED_BA].infeasible
    if infeasible:
        logger.warning(f"b_bar={b_bar}: proposed BA infeasible in {infeasible} of {n_realizations} realizations")

    return [acc[m].result(m, b_bar, cfg.bandwidth_hz) for m in Method]


def run_comparison(
    cfg: SystemConfig,
    b_bar_grid: Sequence[int],
    psw_model: Optional[SwitchingPowerModel],
    n_realizations: int,
    rng: np.random.Generator,
    refill: bool = True,
    progress: bool = False,
) -> List[SweepResult]:
    """
    Evaluate the four receivers over a grid of average resolutions.

    One stream seed is drawn from ``rng``; every b̄ point replays the channel
    stream it seeds, and within a realization all methods see the same channel.
    Users are re-dropped every block. The proposed method's budget is the
    realized total power (with actual switching) of the adc_ba receiver in the
    same block; its infeasible blocks count as rate 0 with deactivated chains.

    Args:
        cfg: System configuration.
        b_bar_grid: Average resolutions, each in [1, b_cap].
        psw_model: Trained P̄_SW model (None substitutes P̄_SW = 0).
        n_realizations: Blocks per b̄ point.
        rng: Caller-owned random generator.
        refill: Allocator refill option.
        progress: Show progress bars.

    Returns:
        Results ordered by b̄, then method (infinite, fixed, adc_ba, proposed_ba).

    Raises:
        InvalidParameterError: On an empty grid, a b̄ outside [1, b_cap] or n_realizations < 1.
    """
    if not b_bar_grid:
        raise InvalidParameterError("b_bar grid is empty")
    if n_realizations < 1:
        raise InvalidParameterError(f"n_realizations must be positive, got {n_realizations}")
    for b_bar in b_bar_grid:
        if not 1 <= b_bar <= cfg.b_cap:
            raise InvalidParameterError(f"b_bar {b_bar} outside [1, {cfg.b_cap}]")
    if psw_model is not None and psw_model.scenario_key != cfg.scenario_key:
        logger.warning(f"Switching model trained for {psw_model.scenario_key}, evaluating {cfg.scenario_key}")

    stream_seed = int(rng.integers(2**63))
    results: List[SweepResult] = []
    for b_bar in tqdm(b_bar_grid, desc="Sweep", unit="b_bar", disable=not progress):
        point = _evaluate_point(
            cfg, int(b_bar), psw_model, n_realizations, np.random.default_rng(stream_seed), refill, progress
        )
        results.extend(point)
        summary = ", ".join(f"{r.method.value}={r.sum_se:.3f}" for r in point)
        logger.info(f"b_bar={b_bar}: sum SE {summary}")

    return results
