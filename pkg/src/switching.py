"""
Off-line estimation of the average per-ADC switching power P̄_SW.

For a power budget p, training runs the allocator over a sequence of
independent channel realizations with each candidate P̄_est substituted in
the power constraint, measures the switching power actually dissipated by
the resulting bit sequence (P̄_act) and keeps the candidate that best agrees
with its own outcome (T_p). A fifth-order least-squares polynomial fitted to
the (p, T_p) points gives P̄_SW as a function of p; fitted models are kept in
a look-up table keyed by (N_u, L).

Example:
    >>> import numpy as np
    >>> from src.config import SystemConfig
    >>> from src.switching import train_switching_model, predict_psw
    >>> cfg = SystemConfig(n_r=64, n_rf=32, n_u=4, n_paths=8)
    >>> model, points = train_switching_model(cfg, np.linspace(3.0, 25.0, 8), np.random.default_rng(0), n_train=20)
    >>> predict_psw(model, 10.0) >= 0.0
    True
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from tqdm import tqdm

from .allocator import AllocationProblem, allocate_bits
from .channel import realize_channel
from .config import SystemConfig
from .errors import (
    EmptyChannelError,
    FitError,
    InfeasibleBudgetError,
    InvalidParameterError,
    MissingTableEntryError,
    TrainingError,
)
from .parsers import format_lookup_table, parse_lookup_table
from .power import BitAllocation, switching_power
from .utils.atomic_file import AtomicOutputFile

logger = logging.getLogger(__name__)

LSP_DEGREE = 5
ScenarioKey = Tuple[int, int]


@dataclass(frozen=True)
class TrainingPoint:
    """
    Result of training at one power budget.

    Attributes:
        p: Power budget in watts.
        t_p: Selected estimate T_p (watts).
        p_act: Switching power realized with P̄_SW = T_p (watts).
        n_feasible: Number of candidates that were feasible at p.
    """

    p: float
    t_p: float
    p_act: float
    n_feasible: int


@dataclass(frozen=True)
class SwitchingPowerModel:
    """
    Fifth-order LSP model of P̄_SW(p).

    ``coeffs`` are the power-series coefficients in the standardized variable
    x = (2p - p_min - p_max)/(p_max - p_min) ∈ [-1, 1]; ``raw_coefficients``
    converts them to powers of p.

    Attributes:
        grid: Training points (p, T_p), p strictly increasing.
        coeffs: Six coefficients, lowest order first.
        domain: (p_min, p_max) of the grid.
        scenario_key: (N_u, L) the model was trained for.
        fit_residual: RMS error of the fit over the grid (watts).
    """

    grid: Tuple[Tuple[float, float], ...]
    coeffs: np.ndarray
    domain: Tuple[float, float]
    scenario_key: ScenarioKey
    fit_residual: float = 0.0
    polynomial: Polynomial = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (LSP_DEGREE + 1,):
            raise InvalidParameterError(f"model needs {LSP_DEGREE + 1} coefficients, got {coeffs.shape}")
        if not self.domain[0] < self.domain[1]:
            raise InvalidParameterError(f"model domain must be increasing, got {self.domain}")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "polynomial", Polynomial(coeffs, domain=list(self.domain)))

    def raw_coefficients(self) -> np.ndarray:
        """Coefficients c_0..c_5 of T_p ≈ Σ c_k·p^k."""
        raw = self.polynomial.convert().coef
        return np.pad(raw, (0, LSP_DEGREE + 1 - len(raw)))

    def to_record(self) -> Dict[str, Any]:
        """Plain values for the look-up table text format."""
        return {
            "p_min": self.domain[0],
            "p_max": self.domain[1],
            "residual": self.fit_residual,
            "coeffs": [float(c) for c in self.coeffs],
            "grid": [(float(p), float(t)) for p, t in self.grid],
        }

    @classmethod
    def from_record(cls, key: ScenarioKey, record: Dict[str, Any]) -> "SwitchingPowerModel":
        return cls(
            grid=tuple((float(p), float(t)) for p, t in record["grid"]),
            coeffs=np.asarray(record["coeffs"], dtype=float),
            domain=(float(record["p_min"]), float(record["p_max"])),
            scenario_key=key,
            fit_residual=float(record["residual"]),
        )


def actual_average_switching_power(run: Sequence[BitAllocation], cfg: SystemConfig) -> float:
    """
    Realized per-ADC switching power (1/(N_RF·T))·Σ_t Σ_i P_SW(b_i^t, b_i^{t,p}).

    The normalization makes 2·N_RF·P̄ equal the realized total switching term
    2·Σ_i P_SW of an average block.

    Args:
        run: Allocations of T consecutive blocks, prev bits chained.
        cfg: System configuration.

    Raises:
        TrainingError: If the run is empty.
    """
    if len(run) == 0:
        raise TrainingError("cannot average switching power over an empty run")

    total = math.fsum(float(np.sum(switching_power(a.bits, a.prev_bits, cfg))) for a in run)
    return total / (cfg.n_rf * len(run))


def candidate_grid(cfg: SystemConfig, n_candidates: int = 64) -> np.ndarray:
    """
    Candidate P̄_est values: 0 plus ``n_candidates`` log-spaced values up to c_sw_up·2^b_cap.

    With both switching constants zero only 0 is a candidate.
    """
    positive = [c for c in (cfg.c_sw_up, cfg.c_sw_down) if c > 0]
    if not positive or n_candidates < 1:
        return np.zeros(1)

    upper = max(positive) * 2.0**cfg.b_cap if cfg.c_sw_up == 0 else cfg.c_sw_up * 2.0**cfg.b_cap
    lower = min(positive) / cfg.n_rf
    return np.concatenate(([0.0], np.geomspace(lower, upper, n_candidates)))


def draw_training_variances(cfg: SystemConfig, rng: np.random.Generator, n_train: int) -> np.ndarray:
    """Desired-signal variances of ``n_train`` independent blocks (users re-dropped each block)."""
    variances = np.empty((n_train, cfg.n_rf))
    for t in range(n_train):
        channel = realize_channel(cfg, rng)
        variances[t] = cfg.p_u * np.sum(np.abs(channel.h_b) ** 2, axis=1)
    return variances


def _run_allocations(
    variances: np.ndarray, p: float, psw_est: float, cfg: SystemConfig, refill: bool
) -> List[BitAllocation]:
    """Allocate over consecutive blocks starting from deactivated ADCs."""
    run: List[BitAllocation] = []
    prev = np.zeros(cfg.n_rf, dtype=int)
    for sigma2 in variances:
        result = allocate_bits(AllocationProblem(sigma2, p, psw_est, cfg), refill=refill)
        run.append(BitAllocation(bits=result.bits, prev_bits=prev, b_cap=cfg.b_cap))
        prev = result.bits
    return run


def train_point(
    p: float,
    cfg: SystemConfig,
    variances: np.ndarray,
    n_candidates: int = 64,
    refill: bool = True,
) -> TrainingPoint:
    """
    Train T_p at one budget on pre-drawn block variances.

    Every candidate sees the same realizations. Candidates for which the
    budget is infeasible are skipped.

    Raises:
        InfeasibleBudgetError: If no candidate is feasible at p.
    """
    best: Optional[Tuple[float, float, float]] = None
    n_feasible = 0
    for candidate in candidate_grid(cfg, n_candidates):
        try:
            run = _run_allocations(variances, p, float(candidate), cfg, refill)
        except (InfeasibleBudgetError, EmptyChannelError):
            continue

        n_feasible += 1
        p_act = actual_average_switching_power(run, cfg)
        gap = abs(candidate - p_act)
        # ascending candidates: strict comparison keeps the smaller one on ties
        if best is None or gap < best[0]:
            best = (gap, float(candidate), p_act)

    if best is None:
        raise InfeasibleBudgetError(p, detail="infeasible for every switching-power candidate")

    logger.debug(f"p={p:.4g} W: T_p={best[1]:.6g} W, P_act={best[2]:.6g} W, {n_feasible} feasible candidates")
    return TrainingPoint(p=float(p), t_p=best[1], p_act=best[2], n_feasible=n_feasible)


def train_average_switching_power(
    p: float,
    cfg: SystemConfig,
    rng: np.random.Generator,
    n_train: int = 200,
    n_candidates: int = 64,
    refill: bool = True,
) -> float:
    """
    T_p: the candidate P̄_est with the smallest |P̄_est - P̄_act| at budget p.

    Args:
        p: Total receiver power budget (watts).
        cfg: System configuration.
        rng: Caller-owned random generator for the training channels.
        n_train: Realizations per candidate.
        n_candidates: Log-spaced nonzero candidates.
        refill: Allocator refill option.

    Returns:
        T_p in watts.

    Raises:
        InfeasibleBudgetError: If p is infeasible for every candidate.
    """
    variances = draw_training_variances(cfg, rng, n_train)
    return train_point(p, cfg, variances, n_candidates, refill).t_p


def fit_lsp(grid: Iterable[Tuple[float, float]], scenario_key: ScenarioKey = (0, 0)) -> SwitchingPowerModel:
    """
    Least-squares fifth-order polynomial through (p, T_p) points.

    The abscissa is standardized to [-1, 1] over the grid range for
    conditioning.

    Args:
        grid: Training points, p strictly increasing.
        scenario_key: (N_u, L) stored on the model.

    Returns:
        The fitted model with its RMS residual.

    Raises:
        FitError: With fewer than six points, non-increasing p, or a rank-deficient design.
    """
    points = tuple((float(p), float(t)) for p, t in grid)
    if len(points) < LSP_DEGREE + 1:
        raise FitError(f"fifth-order fit needs at least {LSP_DEGREE + 1} points, got {len(points)}")

    p = np.array([pt[0] for pt in points])
    t = np.array([pt[1] for pt in points])
    if np.any(np.diff(p) <= 0):
        raise FitError("training budgets must be strictly increasing (duplicate p values)")

    poly, (_, rank, _, _) = Polynomial.fit(p, t, LSP_DEGREE, full=True)
    if rank < LSP_DEGREE + 1:
        raise FitError(f"rank-deficient design: rank {rank} < {LSP_DEGREE + 1}")

    residual = float(np.sqrt(np.mean((poly(p) - t) ** 2)))
    # +0.0 turns -0.0 into 0.0 so an all-zero fit prints as zeros
    coeffs = np.pad(poly.coef, (0, LSP_DEGREE + 1 - len(poly.coef))) + 0.0
    logger.debug(f"LSP fit over {len(points)} points, RMS residual {residual:.3g} W")
    return SwitchingPowerModel(
        grid=points,
        coeffs=coeffs,
        domain=(float(p[0]), float(p[-1])),
        scenario_key=scenario_key,
        fit_residual=residual,
    )


def predict_psw(model: SwitchingPowerModel, p: float) -> float:
    """
    P̄_SW predicted at budget p.

    p outside the grid range is clamped to the nearest endpoint; negative
    predictions are clamped to zero.
    """
    p_clamped = min(max(float(p), model.domain[0]), model.domain[1])
    return max(0.0, float(model.polynomial(p_clamped)))


def train_switching_model(
    cfg: SystemConfig,
    p_grid: Sequence[float],
    rng: np.random.Generator,
    n_train: int = 200,
    n_candidates: int = 64,
    refill: bool = True,
    progress: bool = False,
) -> Tuple[SwitchingPowerModel, List[TrainingPoint]]:
    """
    Train T_p over a grid of budgets and fit the LSP model.

    One set of ``n_train`` realizations is drawn and shared by every budget
    and candidate. Budgets that are infeasible for every candidate are
    skipped with a warning.

    Raises:
        TrainingError: If fewer than six budgets are feasible.
        FitError: If the fit fails.
    """
    variances = draw_training_variances(cfg, rng, n_train)
    points: List[TrainingPoint] = []
    for p in tqdm(p_grid, desc="Training P_SW", unit="budget", disable=not progress):
        try:
            point = train_point(float(p), cfg, variances, n_candidates, refill)
        except InfeasibleBudgetError as e:
            logger.warning(f"Skipping training budget {float(p):.4g} W: {e}")
            continue
        points.append(point)
        logger.info(f"Trained p={point.p:.4g} W: T_p={point.t_p:.6g} W")

    if len(points) < LSP_DEGREE + 1:
        raise TrainingError(
            f"only {len(points)} of {len(p_grid)} training budgets are feasible; "
            f"{LSP_DEGREE + 1} are needed for the fit"
        )

    model = fit_lsp(((pt.p, pt.t_p) for pt in points), scenario_key=cfg.scenario_key)
    return model, points


class LookupTable:
    """
    Switching-power models keyed by scenario (N_u, L), stored as a text file.

    Saving merges by key: entries of other scenarios already in the file are kept.

    Example:
        >>> table = LookupTable.load("results/switching_table.txt")
        >>> table.put(model)
        >>> table.save("results/switching_table.txt")
        >>> table.get((4, 8)).fit_residual
    """

    def __init__(self, entries: Optional[Dict[ScenarioKey, SwitchingPowerModel]] = None, path: Optional[str] = None):
        self.entries: Dict[ScenarioKey, SwitchingPowerModel] = dict(entries or {})
        self.path = path

    @classmethod
    def load(cls, path: str) -> "LookupTable":
        """Read a table file; a missing file gives an empty table."""
        table_path = Path(path)
        if not table_path.exists():
            logger.debug(f"Look-up table {path} does not exist yet")
            return cls(path=str(path))

        text = table_path.read_text(encoding="utf-8")
        records = parse_lookup_table(text, path=str(path))
        entries = {key: SwitchingPowerModel.from_record(key, rec) for key, rec in records.items()}
        logger.debug(f"Loaded {len(entries)} look-up table entries from {path}")
        return cls(entries, path=str(path))

    def get(self, key: ScenarioKey) -> SwitchingPowerModel:
        """Model for a scenario key; raises MissingTableEntryError if absent."""
        try:
            return self.entries[tuple(key)]
        except KeyError:
            raise MissingTableEntryError(tuple(key), path=self.path) from None

    def put(self, model: SwitchingPowerModel) -> None:
        """Add or replace the model of its scenario key."""
        self.entries[model.scenario_key] = model

    def save(self, path: Optional[str] = None) -> Path:
        """Atomically write the merged table (entries sorted by key)."""
        target = Path(path or self.path or "switching_table.txt")
        if target.exists():
            on_disk = LookupTable.load(str(target))
            merged = {**on_disk.entries, **self.entries}
        else:
            merged = dict(self.entries)

        text = format_lookup_table({key: model.to_record() for key, model in merged.items()})
        with AtomicOutputFile(target) as f:
            f.write(text)
        self.entries = merged
        logger.info(f"Look-up table with {len(merged)} entries written to {target}")
        return target
