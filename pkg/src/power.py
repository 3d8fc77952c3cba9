"""
Receiver power model.

Per ADC: P_ADC(b) = c·f_s·2^b for b > 0 and 0 for a deactivated ADC, and a
resolution-switching cost P_SW = c_sw·|2^b - 2^b_prev| (c_sw_up when the
resolution grows, c_sw_down when it shrinks; 2^0 counts as 1).

Receiver total:
    N_r·P_LNA + N_act·(N_r·P_PS + P_RFchain) + 2·Σ_i (P_ADC(b_i) + P_SW(b_i, b_i^p)) + P_BB

where N_act counts chains with b_i > 0 and the factor 2 accounts for the
I/Q ADC pair of each RF chain.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .config import SystemConfig
from .errors import DimensionMismatchError, InvalidParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BitAllocation:
    """
    Integer bits per RF-chain ADC pair and the previous block's bits.

    Both vectors satisfy 0 <= b <= b_cap. The cap is checked here when given;
    total_power always checks it against the configuration.

    Attributes:
        bits: Current resolutions (length N_RF, non-negative integers).
        prev_bits: Resolutions of the previous coherence block (same length).
        b_cap: Largest admissible resolution, or None to defer the check.
    """

    bits: np.ndarray
    prev_bits: np.ndarray
    b_cap: Optional[int] = None

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits)
        prev = np.asarray(self.prev_bits)
        if bits.ndim != 1:
            raise InvalidParameterError(f"bits must be a vector, got shape {bits.shape}")
        if prev.shape != bits.shape:
            raise DimensionMismatchError("prev_bits", bits.shape, prev.shape)
        if np.any(bits < 0) or np.any(prev < 0):
            raise InvalidParameterError("bits must be non-negative")
        if np.any(bits != np.round(bits)) or np.any(prev != np.round(prev)):
            raise InvalidParameterError("bits must be integers")
        if self.b_cap is not None and (np.any(bits > self.b_cap) or np.any(prev > self.b_cap)):
            raise InvalidParameterError(f"bits exceed b_cap={self.b_cap}")
        object.__setattr__(self, "bits", bits.astype(int))
        object.__setattr__(self, "prev_bits", prev.astype(int))

    @classmethod
    def from_zero(cls, bits: np.ndarray, b_cap: Optional[int] = None) -> "BitAllocation":
        """Allocation that starts from deactivated ADCs."""
        bits = np.asarray(bits)
        return cls(bits=bits, prev_bits=np.zeros_like(bits, dtype=int), b_cap=b_cap)

    @property
    def n_act(self) -> int:
        """Number of activated RF chains."""
        return int(np.count_nonzero(self.bits))

    def advance(self, next_bits: np.ndarray) -> "BitAllocation":
        """Allocation of the next block, with the current bits as its previous state."""
        return BitAllocation(bits=np.asarray(next_bits), prev_bits=self.bits, b_cap=self.b_cap)


@dataclass(frozen=True)
class PowerBreakdown:
    """
    Receiver power by component, in watts.

    ``total`` is always the sum of the six components (added in field order),
    so a printed breakdown re-sums to its printed total.
    """

    lna: float
    ps: float
    rf_chain: float
    adc: float
    switching: float
    baseband: float
    n_act: int

    @property
    def total(self) -> float:
        return self.lna + self.ps + self.rf_chain + self.adc + self.switching + self.baseband

    def as_dict(self) -> Dict[str, float]:
        return {
            "lna": self.lna,
            "ps": self.ps,
            "rf_chain": self.rf_chain,
            "adc": self.adc,
            "switching": self.switching,
            "baseband": self.baseband,
            "total": self.total,
            "n_act": self.n_act,
        }


def adc_power(b, cfg: SystemConfig):
    """
    Power of one ADC at resolution b: c·f_s·2^b, and 0 at b = 0.

    Accepts scalars or arrays (element-wise).

    Example:
        >>> adc_power(4, SystemConfig())
        0.007904
    """
    b_arr = np.asarray(b, dtype=float)
    if np.any(b_arr < 0):
        raise InvalidParameterError(f"bits must be non-negative, got {b}")
    power = np.where(b_arr > 0, cfg.adc_fom * cfg.sampling_rate_hz * np.power(2.0, b_arr), 0.0)
    return float(power) if power.ndim == 0 else power


def relaxed_adc_power(b, cfg: SystemConfig):
    """Continuous ADC power c·f_s·2^b without the b = 0 exception (optimizer constraint only)."""
    power = cfg.adc_fom * cfg.sampling_rate_hz * np.power(2.0, np.asarray(b, dtype=float))
    return float(power) if np.ndim(power) == 0 else power


def switching_power(b, b_prev, cfg: SystemConfig):
    """
    Resolution-switching power c_sw·|2^b - 2^b_prev| of one ADC.

    c_sw_up applies when b > b_prev, c_sw_down when b < b_prev. Scalars or arrays.

    Example:
        >>> switching_power(3, 1, SystemConfig())
        0.02082
    """
    b_arr = np.asarray(b, dtype=float)
    p_arr = np.asarray(b_prev, dtype=float)
    if np.any(b_arr < 0) or np.any(p_arr < 0):
        raise InvalidParameterError("bits must be non-negative")

    delta = np.power(2.0, b_arr) - np.power(2.0, p_arr)
    power = np.where(delta > 0, cfg.c_sw_up * delta, -cfg.c_sw_down * delta)
    power = np.where(b_arr == p_arr, 0.0, power)
    return float(power) if power.ndim == 0 else power


def total_power(alloc: BitAllocation, cfg: SystemConfig) -> PowerBreakdown:
    """
    Total receiver power of an allocation.

    Args:
        alloc: Bits and previous bits of the N_RF chains.
        cfg: System configuration.

    Returns:
        PowerBreakdown; deactivated chains draw no phase-shifter, RF-chain or ADC power.

    Raises:
        DimensionMismatchError: If the allocation does not have N_RF entries.
        InvalidParameterError: If any bit count exceeds b_cap.
    """
    if alloc.bits.shape != (cfg.n_rf,):
        raise DimensionMismatchError("bits", (cfg.n_rf,), alloc.bits.shape)
    if np.any(alloc.bits > cfg.b_cap):
        raise InvalidParameterError(f"bits exceed b_cap={cfg.b_cap}: max {alloc.bits.max()}")

    n_act = alloc.n_act
    return PowerBreakdown(
        lna=cfg.n_r * cfg.p_lna,
        ps=n_act * cfg.n_r * cfg.p_ps,
        rf_chain=n_act * cfg.p_rf_chain,
        adc=2.0 * float(np.sum(adc_power(alloc.bits, cfg))),
        switching=2.0 * float(np.sum(switching_power(alloc.bits, alloc.prev_bits, cfg))),
        baseband=cfg.p_bb,
        n_act=n_act,
    )
