"""
System and scenario configuration.

SystemConfig holds the physical and hardware constants of one receiver
scenario; ScenarioFile adds the batch settings (b̄ sweep, training grid,
output paths, logging) read from a sectioned YAML file such as the
repository's ``config.yaml``.

Scenario File Layout:
    system:     every SystemConfig field (full-scale defaults if omitted)
    sweep:      b_bar list, n_realizations
    training:   p_grid {start, stop, num}, n_train, n_candidates
    allocator:  refill
    output:     dir, csv, table, database, report, progress
    logging:    level, file, max_bytes, backup_count

Relative output paths are resolved against ``output.dir``, then the
BITALLOC_OUTPUT_DIR environment variable (a ``.env`` file is honoured),
then the current directory.

Example:
    >>> from src.config import load_scenario
    >>> scenario = load_scenario("config.yaml")
    >>> scenario.system.n_rf
    32
    >>> scenario.system.scenario_key
    (4, 8)
"""

import dataclasses
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import yaml
from dotenv import load_dotenv

from .errors import FormatError, InvalidConfigError

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "BITALLOC_OUTPUT_DIR"


@dataclass(frozen=True)
class SystemConfig:
    """
    Antenna, RF-chain and user counts, channel geometry and power constants.

    Powers are in watts, energies per conversion step in joules (c) or watts
    per conversion step (switching). ``p_u_dbm`` is stored in dBm; see ``p_u``.

    Attributes:
        n_r: Number of BS antennas N_r.
        n_rf: Number of RF chains (ADC pairs) N_RF, at most n_r.
        n_u: Number of single-antenna users N_u.
        n_paths: Propagation paths per user L.
        p_u_dbm: User transmit power in dBm.
        bandwidth_hz: Transmission bandwidth W.
        sampling_rate_hz: ADC sampling rate f_s.
        noise_figure_db: Receiver noise figure n_f.
        cell_radius_m: Outer radius of the user drop area.
        min_distance_m: Inner radius of the user drop area.
        alpha_pl: Pathloss intercept in dB.
        beta_pl: Pathloss exponent.
        sigma_sh_db: Shadowing standard deviation in dB.
        p_lna: Power of one low-noise amplifier.
        p_ps: Power of one phase shifter.
        p_rf_chain: Power of one RF chain.
        p_bb: Baseband processor power.
        adc_fom: Walden figure of merit c (J/conversion step).
        c_sw_up: Switching power per conversion step when resolution increases.
        c_sw_down: Switching power per conversion step when resolution decreases.
        b_cap: Maximum ADC resolution in bits (also the "infinite" resolution).
        seed: Seed of the simulation random stream.
    """

    n_r: int = 256
    n_rf: int = 128
    n_u: int = 10
    n_paths: int = 13
    p_u_dbm: float = 20.0
    bandwidth_hz: float = 1e9
    sampling_rate_hz: float = 1e9
    noise_figure_db: float = 5.0
    cell_radius_m: float = 200.0
    min_distance_m: float = 30.0
    alpha_pl: float = 72.0
    beta_pl: float = 2.92
    sigma_sh_db: float = 8.7
    p_lna: float = 20e-3
    p_ps: float = 10e-3
    p_rf_chain: float = 40e-3
    p_bb: float = 200e-3
    adc_fom: float = 494e-15
    c_sw_up: float = 3.47e-3
    c_sw_down: float = 0.94e-3
    b_cap: int = 12
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("n_r", "n_rf", "n_u", "n_paths", "b_cap"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise InvalidConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.n_rf > self.n_r:
            raise InvalidConfigError(f"n_rf ({self.n_rf}) must not exceed n_r ({self.n_r})")
        for name in ("p_lna", "p_ps", "p_rf_chain", "p_bb", "adc_fom", "c_sw_up", "c_sw_down", "sigma_sh_db"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvalidConfigError(f"{name} must be a finite non-negative number, got {value!r}")
        if self.bandwidth_hz <= 0 or self.sampling_rate_hz <= 0:
            raise InvalidConfigError("bandwidth_hz and sampling_rate_hz must be positive")
        if not 0 < self.min_distance_m < self.cell_radius_m:
            raise InvalidConfigError(
                f"need 0 < min_distance_m < cell_radius_m, got {self.min_distance_m} and {self.cell_radius_m}"
            )

    @property
    def p_u(self) -> float:
        """Linear transmit power relative to 1 mW, so that p_u·γ_k is an SNR."""
        return 10.0 ** (self.p_u_dbm / 10.0)

    @property
    def noise_power_dbm(self) -> float:
        """Thermal noise power -174 + 10·log10(W) + n_f in dBm."""
        return -174.0 + 10.0 * math.log10(self.bandwidth_hz) + self.noise_figure_db

    @property
    def chain_activation_power(self) -> float:
        """Power drawn by one activated RF chain: N_r·P_PS + P_RFchain."""
        return self.n_r * self.p_ps + self.p_rf_chain

    @property
    def scenario_key(self) -> Tuple[int, int]:
        """Look-up table key (N_u, L)."""
        return (self.n_u, self.n_paths)

    def replace(self, **changes: Any) -> "SystemConfig":
        """Return a copy with some fields changed (validated again)."""
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SweepSettings:
    """b̄ grid and Monte Carlo size of the comparison sweep."""

    b_bar: Tuple[int, ...] = tuple(range(1, 13))
    n_realizations: int = 1000


@dataclass(frozen=True)
class TrainingSettings:
    """Grid of power budgets p and effort of the switching-power training."""

    p_start: float = 3.0
    p_stop: float = 25.0
    p_num: int = 15
    n_train: int = 200
    n_candidates: int = 64

    @property
    def p_grid(self) -> np.ndarray:
        """Linearly spaced training budgets in watts."""
        return np.linspace(self.p_start, self.p_stop, self.p_num)


@dataclass(frozen=True)
class AllocatorSettings:
    """Options of the bit allocator."""

    refill: bool = True


@dataclass(frozen=True)
class OutputSettings:
    """Output locations (relative paths resolve against the output directory)."""

    dir: Optional[str] = None
    csv: str = "results/sweep.csv"
    table: str = "results/switching_table.txt"
    database: Optional[str] = "results/runs.db"
    report: str = "results/summary.json"
    progress: bool = True


@dataclass(frozen=True)
class LoggingSettings:
    """Log level and optional rotating log file."""

    level: str = "INFO"
    file: Optional[str] = None
    max_bytes: int = 10 * 1024 * 1024
    backup_count: int = 5


@dataclass(frozen=True)
class ScenarioFile:
    """
    A complete batch scenario.

    Attributes:
        system: Physical/hardware configuration.
        sweep: b̄ values and realization count for ``sweep``.
        training: p grid and effort for ``train``.
        allocator: Allocator options.
        output: Output paths.
        logging: Logging options.
    """

    system: SystemConfig = field(default_factory=SystemConfig)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    training: TrainingSettings = field(default_factory=TrainingSettings)
    allocator: AllocatorSettings = field(default_factory=AllocatorSettings)
    output: OutputSettings = field(default_factory=OutputSettings)
    logging: LoggingSettings = field(default_factory=LoggingSettings)

    def __post_init__(self) -> None:
        if not self.sweep.b_bar:
            raise InvalidConfigError("sweep.b_bar must list at least one value")
        for b in self.sweep.b_bar:
            if not 1 <= b <= self.system.b_cap:
                raise InvalidConfigError(f"sweep.b_bar value {b} outside [1, {self.system.b_cap}]")
        if self.sweep.n_realizations < 1:
            raise InvalidConfigError("sweep.n_realizations must be positive")
        if self.training.p_num < 1 or self.training.n_train < 1 or self.training.n_candidates < 1:
            raise InvalidConfigError("training.p_grid.num, n_train and n_candidates must be positive")
        if self.training.p_start <= 0 or self.training.p_stop < self.training.p_start:
            raise InvalidConfigError("training.p_grid needs 0 < start <= stop")


def _section(cls: type, raw: Any, section: str) -> Any:
    """Build a settings dataclass from a mapping, rejecting unknown keys."""
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise InvalidConfigError(f"section '{section}' must be a mapping")

    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise InvalidConfigError(f"unknown keys in '{section}': {sorted(unknown)}")

    # YAML 1.1 reads "1e9" as a string; coerce scalars to the field's default type
    values: Dict[str, Any] = {}
    defaults = {f.name: f.default for f in dataclasses.fields(cls)}
    for key, value in raw.items():
        default = defaults[key]
        try:
            if isinstance(default, bool) or value is None:
                values[key] = value
            elif isinstance(default, float):
                values[key] = float(value)
            elif isinstance(default, int):
                if float(value) != int(float(value)):
                    raise ValueError(f"{value!r} is not an integer")
                values[key] = int(float(value))
            else:
                values[key] = value
        except (TypeError, ValueError) as e:
            raise InvalidConfigError(f"section '{section}', key '{key}': {e}") from e

    try:
        return cls(**values)
    except TypeError as e:
        raise InvalidConfigError(f"section '{section}': {e}") from e


def scenario_from_dict(data: Dict[str, Any]) -> ScenarioFile:
    """
    Build a ScenarioFile from the nested mapping of a YAML document.

    Args:
        data: Parsed YAML mapping (sections as documented in the module docstring).

    Returns:
        The validated scenario.

    Raises:
        InvalidConfigError: On unknown sections/keys or violated invariants.
    """
    if not isinstance(data, dict):
        raise InvalidConfigError("scenario must be a mapping of sections")

    sections = {"system", "sweep", "training", "allocator", "output", "logging"}
    unknown = set(data) - sections
    if unknown:
        raise InvalidConfigError(f"unknown sections: {sorted(unknown)}")

    sweep_raw = dict(data.get("sweep") or {})
    if "b_bar" in sweep_raw:
        try:
            sweep_raw["b_bar"] = tuple(int(b) for b in sweep_raw["b_bar"])
        except (TypeError, ValueError) as e:
            raise InvalidConfigError(f"section 'sweep': b_bar must be a list of integers: {e}") from e

    training_raw = dict(data.get("training") or {})
    grid = training_raw.pop("p_grid", None)
    if grid is not None:
        if not isinstance(grid, dict) or set(grid) - {"start", "stop", "num"}:
            raise InvalidConfigError("training.p_grid must be a mapping with start, stop, num")
        for key in ("start", "stop", "num"):
            if key in grid:
                training_raw[f"p_{key}"] = grid[key]

    return ScenarioFile(
        system=_section(SystemConfig, data.get("system"), "system"),
        sweep=_section(SweepSettings, sweep_raw, "sweep"),
        training=_section(TrainingSettings, training_raw, "training"),
        allocator=_section(AllocatorSettings, data.get("allocator"), "allocator"),
        output=_section(OutputSettings, data.get("output"), "output"),
        logging=_section(LoggingSettings, data.get("logging"), "logging"),
    )


def scenario_to_dict(scenario: ScenarioFile) -> Dict[str, Any]:
    """Inverse of scenario_from_dict, using plain YAML-safe types."""
    training = scenario.training
    return {
        "system": dataclasses.asdict(scenario.system),
        "sweep": {
            "b_bar": [int(b) for b in scenario.sweep.b_bar],
            "n_realizations": scenario.sweep.n_realizations,
        },
        "training": {
            "p_grid": {"start": training.p_start, "stop": training.p_stop, "num": training.p_num},
            "n_train": training.n_train,
            "n_candidates": training.n_candidates,
        },
        "allocator": dataclasses.asdict(scenario.allocator),
        "output": dataclasses.asdict(scenario.output),
        "logging": dataclasses.asdict(scenario.logging),
    }


def load_scenario(path: str) -> ScenarioFile:
    """
    Read and validate a scenario YAML file.

    Args:
        path: Path to the YAML scenario.

    Returns:
        The parsed scenario.

    Raises:
        InvalidConfigError: If the file is missing or violates an invariant.
        FormatError: If the file is not valid YAML.
    """
    scenario_path = Path(path)
    if not scenario_path.is_file():
        raise InvalidConfigError(f"scenario file not found: {path}")

    try:
        with open(scenario_path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise FormatError(f"invalid YAML: {e}", path=str(path)) from e

    scenario = scenario_from_dict(data)
    logger.debug(f"Scenario loaded from {path}: key={scenario.system.scenario_key}")
    return scenario


def dump_scenario(scenario: ScenarioFile) -> str:
    """Serialize a scenario to YAML text (section order preserved)."""
    return yaml.safe_dump(scenario_to_dict(scenario), sort_keys=False, default_flow_style=False)


def output_dir(scenario: ScenarioFile) -> Path:
    """
    Directory that relative output paths are resolved against.

    Order: ``output.dir`` from the scenario, the BITALLOC_OUTPUT_DIR
    environment variable (``.env`` is loaded first when present), the
    current directory.
    """
    if scenario.output.dir:
        return Path(scenario.output.dir)

    if Path(".env").exists():
        load_dotenv(".env")

    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    return Path(env_dir) if env_dir else Path(".")


def resolve_output(scenario: ScenarioFile, path: str) -> Path:
    """Resolve one output path of the scenario."""
    candidate = Path(path)
    if candidate.is_absolute():
        return candidate
    return output_dir(scenario) / candidate
