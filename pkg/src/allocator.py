"""
ADC bit allocation under a total receiver power budget.

Minimizes the relaxed total MSQE Σ_i (π√3/2)·σ²_i·2^(-2b_i) subject to the
receiver power model with the switching term replaced by the constant
2·N_RF·P̄_SW. For a fixed number M_s of activated chains (the M_s strongest),
the relaxed problem has a water-filling closed form:

    2^(b_i) = p̃·σ_i^(2/3) / (2·c·f_s·Σ_{j<=M_s} σ_j^(2/3))

where p̃ is the budget left for quantization. allocate_bits binary-searches
M_s, clips the continuous solution at zero, rounds to integers and repairs
(then optionally refills) the integer allocation against the budget.

Example:
    >>> import numpy as np
    >>> from src.config import SystemConfig
    >>> from src.allocator import AllocationProblem, allocate_bits
    >>> cfg = SystemConfig(n_r=64, n_rf=4, n_u=2, n_paths=2)
    >>> problem = AllocationProblem(np.array([4.0, 1.0, 0.5, 0.0]), p=4.0, psw_bar=1e-3, cfg=cfg)
    >>> result = allocate_bits(problem)
    >>> int(np.count_nonzero(result.bits)) <= result.m_opt <= 3
    True
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .config import SystemConfig
from .errors import DimensionMismatchError, EmptyChannelError, InfeasibleBudgetError, InvalidParameterError
from .power import adc_power
from .quantization import HIGH_RES_COEFFICIENT, msqe

logger = logging.getLogger(__name__)

# relative slack on budget comparisons after repair and refill
BUDGET_RTOL = 1e-12


@dataclass(frozen=True)
class AllocationProblem:
    """
    One instance of the constrained MMSQE problem.

    Attributes:
        sigma2_x: Desired-signal variances p_u·‖[H_b]_{i,:}‖² per RF chain.
        p: Total receiver power budget in watts.
        psw_bar: Average per-ADC switching power P̄_SW substituted in the constraint.
        cfg: System configuration.
    """

    sigma2_x: np.ndarray
    p: float
    psw_bar: float
    cfg: SystemConfig

    def __post_init__(self) -> None:
        sigma2 = np.asarray(self.sigma2_x, dtype=float)
        if sigma2.shape != (self.cfg.n_rf,):
            raise DimensionMismatchError("sigma2_x", (self.cfg.n_rf,), sigma2.shape)
        if np.any(sigma2 < 0) or not np.all(np.isfinite(sigma2)):
            raise InvalidParameterError("sigma2_x must be finite and non-negative")
        if not self.p > 0:
            raise InvalidParameterError(f"power budget must be positive, got {self.p}")
        if self.psw_bar < 0:
            raise InvalidParameterError(f"psw_bar must be non-negative, got {self.psw_bar}")
        object.__setattr__(self, "sigma2_x", sigma2)

    @classmethod
    def from_channel(
        cls, h_b: np.ndarray, p_u: float, p: float, psw_bar: float, cfg: SystemConfig
    ) -> "AllocationProblem":
        """Problem whose variances are p_u·‖[H_b]_{i,:}‖² of an effective channel."""
        sigma2 = p_u * np.sum(np.abs(h_b) ** 2, axis=1)
        return cls(sigma2_x=sigma2, p=p, psw_bar=psw_bar, cfg=cfg)


@dataclass(frozen=True)
class AllocationResult:
    """
    Outcome of a bit allocation.

    Attributes:
        bits: Integer bits in the original chain order.
        m_opt: Number of chains the optimizer considered for activation.
        continuous_bits: Clipped real solution b̂ (original chain order).
        objective: Total relaxed MSQE of ``bits``.
        budget_used: Model power of ``bits`` (switching term from P̄_SW).
    """

    bits: np.ndarray
    m_opt: int
    continuous_bits: np.ndarray
    objective: float
    budget_used: float


def quantization_budget(p: float, m_s: int, psw_bar: float, cfg: SystemConfig) -> float:
    """
    Budget p̃ left for quantization when M_s chains are active.

    p̃ = p - N_r·P_LNA - 2·N_RF·P̄_SW - P_BB - M_s·(N_r·P_PS + P_RFchain). The
    value may be negative; callers check.
    """
    if m_s < 1:
        raise InvalidParameterError(f"m_s must be at least 1, got {m_s}")
    return p - _fixed_power(psw_bar, cfg) - m_s * cfg.chain_activation_power


def _fixed_power(psw_bar: float, cfg: SystemConfig) -> float:
    """Activation-independent part of the model power."""
    return cfg.n_r * cfg.p_lna + 2.0 * cfg.n_rf * psw_bar + cfg.p_bb


def m_max(p: float, psw_bar: float, sigma2_x: np.ndarray, cfg: SystemConfig) -> int:
    """
    Largest admissible number of activated chains M†.

    min(floor((p - N_r·P_LNA - 2·N_RF·P̄_SW - P_BB)/(N_r·P_PS + P_RFchain)),
    count(σ² != 0), N_RF). A zero activation cost leaves the first term unbounded.

    Raises:
        EmptyChannelError: If every σ² is zero.
        InfeasibleBudgetError: If the budget cannot give one chain a positive quantization budget.
    """
    nonzero = int(np.count_nonzero(np.asarray(sigma2_x)))
    if nonzero == 0:
        raise EmptyChannelError()

    numerator = p - _fixed_power(psw_bar, cfg)
    denominator = cfg.chain_activation_power
    required = _fixed_power(psw_bar, cfg) + denominator
    if numerator <= denominator:
        raise InfeasibleBudgetError(p, required=required, detail="cannot power a single RF chain")

    by_power = int(math.floor(numerator / denominator)) if denominator > 0 else cfg.n_rf
    return min(by_power, nonzero, cfg.n_rf)


def continuous_allocation(sorted_sigma2: np.ndarray, m_s: int, p_tilde: float, cfg: SystemConfig) -> np.ndarray:
    """
    Closed-form real bits of the M_s strongest chains.

    b_i = log2(p̃/(2·c·f_s)) + log2(w_i^(1/3)/Σ_j w_j^(1/3)) with w = σ² of the
    prefix, so that 2·Σ c·f_s·2^b_i = p̃ and w_i·2^(-3b_i) is equal across i.

    Args:
        sorted_sigma2: Variances sorted in descending order.
        m_s: Number of chains to activate.
        p_tilde: Quantization budget p̃ (> 0).
        cfg: System configuration (c, f_s).

    Returns:
        Real bits of length m_s (possibly negative for weak chains).

    Raises:
        InfeasibleBudgetError: If p̃ <= 0.
        InvalidParameterError: If m_s is out of range or a prefix variance is not positive.
    """
    if p_tilde <= 0:
        raise InfeasibleBudgetError(p_tilde, detail="quantization budget must be positive")
    if not 1 <= m_s <= len(sorted_sigma2):
        raise InvalidParameterError(f"m_s must be in [1, {len(sorted_sigma2)}], got {m_s}")

    w = np.asarray(sorted_sigma2[:m_s], dtype=float)
    if np.any(w <= 0):
        raise InvalidParameterError("continuous allocation needs positive variances in the active prefix")

    cube_root = np.cbrt(w)
    scale = math.log2(p_tilde / (2.0 * cfg.adc_fom * cfg.sampling_rate_hz))
    return scale + np.log2(cube_root / math.fsum(cube_root))


def clipped_allocation(
    sorted_sigma2: np.ndarray, m_s: int, p: float, psw_bar: float, cfg: SystemConfig
) -> np.ndarray:
    """
    Clipped real solution b̂ = [max(b^s, 0), 0, ..., 0] for a forced M_s.

    Returns a vector of the full length of ``sorted_sigma2``. A non-positive
    quantization budget gives all zeros.
    """
    b_hat = np.zeros(len(sorted_sigma2))
    p_tilde = quantization_budget(p, m_s, psw_bar, cfg)
    if p_tilde <= 0:
        return b_hat
    b_hat[:m_s] = np.maximum(continuous_allocation(sorted_sigma2, m_s, p_tilde, cfg), 0.0)
    return b_hat


def total_relaxed_msqe(bits: np.ndarray, sigma2_x: np.ndarray) -> float:
    """Σ_i (π√3/2)·σ²_i·2^(-2b_i) over all chains, deactivated ones included."""
    bits = np.asarray(bits, dtype=float)
    sigma2_x = np.asarray(sigma2_x, dtype=float)
    if bits.shape != sigma2_x.shape:
        raise DimensionMismatchError("bits", sigma2_x.shape, bits.shape)
    return math.fsum(msqe(bits, sigma2_x))


def model_power(bits: np.ndarray, psw_bar: float, cfg: SystemConfig) -> float:
    """Receiver power of integer bits with the switching term replaced by 2·N_RF·P̄_SW."""
    bits = np.asarray(bits)
    n_act = int(np.count_nonzero(bits))
    return (
        _fixed_power(psw_bar, cfg)
        + n_act * cfg.chain_activation_power
        + 2.0 * float(np.sum(adc_power(bits, cfg)))
    )


def _search_m_opt(sorted_sigma2: np.ndarray, m_dagger: int, p: float, psw_bar: float, cfg: SystemConfig) -> int:
    """Binary search of the M_s minimizing the relaxed MSQE of the clipped solution."""
    cache: Dict[int, float] = {}

    def objective(m: int) -> float:
        if m not in cache:
            b_hat = clipped_allocation(sorted_sigma2, m, p, psw_bar, cfg)
            cache[m] = total_relaxed_msqe(b_hat, sorted_sigma2)
        return cache[m]

    lo, hi = 1, m_dagger
    best: Optional[int] = None
    while lo <= hi:
        m = (lo + hi) // 2
        here = objective(m)
        left = objective(max(1, m - 1)) if m > 1 else math.inf
        right = objective(min(m_dagger, m + 1)) if m < m_dagger else math.inf

        # walk toward the better improving neighbour; a local minimum stops the search
        if left < here and left <= right:
            hi = m - 1
        elif right < here:
            lo = m + 1
        else:
            best = m
            break

    if best is None:
        # search window closed without a local minimum: take the best seen
        best = min(cache, key=lambda k: (cache[k], k))

    # plateau: equal objective at fewer chains wins
    while best > 1 and objective(best - 1) <= objective(best):
        best -= 1

    logger.debug(f"M search over [1, {m_dagger}] evaluated {len(cache)} candidates, M_opt={best}")
    return best


def _round_half_away(b_hat: np.ndarray, b_cap: int) -> np.ndarray:
    # b_hat >= 0, so floor(x + 0.5) rounds halves away from zero
    return np.minimum(np.floor(b_hat + 0.5), b_cap).astype(int)


def _repair(
    bits: np.ndarray,
    sorted_sigma2: np.ndarray,
    order: np.ndarray,
    budget: float,
    power_of,
    activation_cost: float,
    cfg: SystemConfig,
) -> np.ndarray:
    """Drop single bits, least MSQE lost per watt saved first, until the power fits the budget."""
    bits = bits.copy()
    limit = budget * (1.0 + BUDGET_RTOL)
    steps = 0
    while power_of(bits) > limit:
        active = np.flatnonzero(bits > 0)
        if active.size == 0:
            raise InfeasibleBudgetError(budget, detail="repair removed every bit and the budget still fails")

        b = bits[active]
        # watts saved per unit of MSQE added; dropping the last bit also saves the chain
        saved = 2.0 * (adc_power(b, cfg) - adc_power(b - 1, cfg)) + np.where(b == 1, activation_cost, 0.0)
        lost = 3.0 * HIGH_RES_COEFFICIENT * sorted_sigma2[active] * np.power(2.0, -2.0 * b)
        with np.errstate(divide="ignore"):
            ratio = np.where(lost > 0, saved / lost, np.inf)

        ties = active[ratio == ratio.max()]
        chosen = ties[np.argmin(order[ties])]
        bits[chosen] -= 1
        steps += 1

    if steps:
        logger.debug(f"Repair removed {steps} bits to meet budget {budget:.6g} W")
    return bits


def _refill(
    bits: np.ndarray,
    sorted_sigma2: np.ndarray,
    order: np.ndarray,
    m_limit: int,
    budget: float,
    power_of,
    activation_cost: float,
    cfg: SystemConfig,
) -> np.ndarray:
    """Spend leftover budget on single-bit increments of the first ``m_limit`` chains."""
    bits = bits.copy()
    limit = budget * (1.0 + BUDGET_RTOL)
    used = power_of(bits)
    steps = 0
    while True:
        eligible = np.flatnonzero(bits[:m_limit] < cfg.b_cap)
        if eligible.size == 0:
            break

        b = bits[eligible]
        # MSQE removed per watt spent; the first bit also pays for the chain
        cost = 2.0 * (adc_power(b + 1, cfg) - adc_power(b, cfg)) + np.where(b == 0, activation_cost, 0.0)
        gain = 3.0 * HIGH_RES_COEFFICIENT * sorted_sigma2[eligible] * np.power(2.0, -2.0 * (b + 1))
        fits = used + cost <= limit
        if not np.any(fits):
            break

        eligible, cost, gain = eligible[fits], cost[fits], gain[fits]
        ratio = gain / cost
        ties = eligible[ratio == ratio.max()]
        chosen = ties[np.argmin(order[ties])]
        bits[chosen] += 1
        used = power_of(bits)
        steps += 1

    if steps:
        logger.debug(f"Refill added {steps} bits, model power {used:.6g} of {budget:.6g} W")
    return bits


def _unsort(sorted_values: np.ndarray, order: np.ndarray) -> np.ndarray:
    out = np.empty_like(sorted_values)
    out[order] = sorted_values
    return out


def _sort_chains(sigma2_x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # stable: equal variances keep ascending chain index
    order = np.argsort(-sigma2_x, kind="stable")
    return order, sigma2_x[order]


def allocate_bits(problem: AllocationProblem, refill: bool = True) -> AllocationResult:
    """
    Integer bit allocation minimizing relaxed MSQE under the total power budget.

    Steps: sort chains by σ² (descending, stable); binary-search M_s in
    [1, M†] on the relaxed MSQE of the clipped closed-form solution; round
    half away from zero and cap at b_cap; greedily remove bits until the
    model power fits p; optionally spend what is left on the first M_opt
    chains; restore the original chain order.

    Args:
        problem: Variances, budget and P̄_SW.
        refill: Spend leftover budget after repair.

    Returns:
        The allocation, with count(bits > 0) <= m_opt and budget_used <= p.

    Raises:
        EmptyChannelError: If no chain carries signal.
        InfeasibleBudgetError: If the budget cannot activate one chain.
    """
    cfg = problem.cfg
    order, sorted_sigma2 = _sort_chains(problem.sigma2_x)
    m_dagger = m_max(problem.p, problem.psw_bar, sorted_sigma2, cfg)

    m_opt = _search_m_opt(sorted_sigma2, m_dagger, problem.p, problem.psw_bar, cfg)
    b_hat = clipped_allocation(sorted_sigma2, m_opt, problem.p, problem.psw_bar, cfg)

    def power_of(bits: np.ndarray) -> float:
        return model_power(bits, problem.psw_bar, cfg)

    bits = _round_half_away(b_hat, cfg.b_cap)
    bits = _repair(bits, sorted_sigma2, order, problem.p, power_of, cfg.chain_activation_power, cfg)
    if refill:
        bits = _refill(bits, sorted_sigma2, order, m_opt, problem.p, power_of, cfg.chain_activation_power, cfg)

    return AllocationResult(
        bits=_unsort(bits, order),
        m_opt=m_opt,
        continuous_bits=_unsort(b_hat, order),
        objective=total_relaxed_msqe(bits, sorted_sigma2),
        budget_used=power_of(bits),
    )


def allocate_bits_adc_constrained(
    sigma2_x: np.ndarray, adc_budget: float, cfg: SystemConfig, refill: bool = True
) -> AllocationResult:
    """
    Bit allocation under a total ADC power constraint 2·Σ c·f_s·2^b_i <= adc_budget.

    Every chain with nonzero σ² is eligible (M_s = count(σ² > 0), no
    activation cost); the closed form, clipping, rounding, repair and refill
    are those of allocate_bits. Used as the ADC-power-only baseline, with
    adc_budget equal to the total ADC power of a fixed-resolution receiver.

    Raises:
        DimensionMismatchError: If sigma2_x does not have N_RF entries.
        EmptyChannelError: If no chain carries signal.
        InfeasibleBudgetError: If adc_budget <= 0.
    """
    sigma2_x = np.asarray(sigma2_x, dtype=float)
    if sigma2_x.shape != (cfg.n_rf,):
        raise DimensionMismatchError("sigma2_x", (cfg.n_rf,), sigma2_x.shape)
    if adc_budget <= 0:
        raise InfeasibleBudgetError(adc_budget, detail="ADC power budget must be positive")

    order, sorted_sigma2 = _sort_chains(sigma2_x)
    m_s = int(np.count_nonzero(sorted_sigma2))
    if m_s == 0:
        raise EmptyChannelError()

    b_hat = np.zeros(cfg.n_rf)
    b_hat[:m_s] = np.maximum(continuous_allocation(sorted_sigma2, m_s, adc_budget, cfg), 0.0)

    def power_of(bits: np.ndarray) -> float:
        return 2.0 * float(np.sum(adc_power(bits, cfg)))

    bits = _round_half_away(b_hat, cfg.b_cap)
    bits = _repair(bits, sorted_sigma2, order, adc_budget, power_of, 0.0, cfg)
    if refill:
        bits = _refill(bits, sorted_sigma2, order, m_s, adc_budget, power_of, 0.0, cfg)

    return AllocationResult(
        bits=_unsort(bits, order),
        m_opt=m_s,
        continuous_bits=_unsort(b_hat, order),
        objective=total_relaxed_msqe(bits, sorted_sigma2),
        budget_used=power_of(bits),
    )
