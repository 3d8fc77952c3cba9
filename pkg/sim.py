#!/usr/bin/env python3
"""
ADC Bit Allocation Simulator

Command-line front-end of the simulator. It trains the switching-power
model, runs the four-receiver comparison sweep, allocates bits for a single
dumped channel, writes seeded channel dumps and summarizes stored runs.

Usage:
    python sim.py train config.yaml
    python sim.py sweep config.yaml --table results/switching_table.txt
    python sim.py allocate config.yaml --channel channel.txt --budget 12.5
    python sim.py allocate config.yaml --channel channel.txt --budget 12.5 --json
    python sim.py report config.yaml
    python sim.py dump-channel config.yaml --block 3 --output channel.txt

Architecture Overview:
    sim.py (entry point)
        └── src/
            ├── config.py        # SystemConfig and scenario YAML
            ├── channel.py       # beamspace channel model
            ├── quantization.py  # AQNM and Lloyd-Max reference
            ├── power.py         # receiver power model
            ├── allocator.py     # bit allocation
            ├── switching.py     # switching-power training and look-up table
            ├── evaluator.py     # rates, energy efficiency, sweeps
            ├── parsers.py       # text formats (channel dump, table, CSV)
            ├── database.py      # SQLite result store
            └── reports.py       # JSON summaries

Exit Codes:
    0    success
    1    unexpected error (traceback in the log)
    2    simulation error; stderr holds one line: error code=<code> message="<text>"
    130  interrupted

Environment Variables (optional, .env honoured):
    BITALLOC_OUTPUT_DIR: directory for relative output paths when the
        scenario has no output.dir
"""

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from src.allocator import AllocationProblem, allocate_bits
from src.channel import realize_channel
from src.config import ScenarioFile, load_scenario, resolve_output
from src.database import ResultStore
from src.errors import (
    DimensionMismatchError,
    InvalidParameterError,
    MissingTableEntryError,
    OutputError,
    SimulationError,
)
from src.evaluator import run_comparison
from src.logging_config import setup_logging
from src.parsers import format_channel_dump, format_results_csv, parse_channel_dump
from src.power import BitAllocation, total_power
from src.reports import Reporter
from src.switching import LookupTable, predict_psw, train_switching_model
from src.utils.atomic_file import AtomicOutputFile

setup_logging(log_level="INFO", name="sim")

logger = logging.getLogger("sim")


def configure_logging(scenario: ScenarioFile) -> None:
    """Apply the scenario's logging section to the CLI and library loggers."""
    settings = scenario.logging
    log_file = str(resolve_output(scenario, settings.file)) if settings.file else None
    for name in ("sim", "src"):
        try:
            setup_logging(
                log_level=settings.level,
                name=name,
                log_file=log_file,
                max_bytes=settings.max_bytes,
                backup_count=settings.backup_count,
            )
        except OSError as e:
            raise OutputError(str(log_file), e.strerror or str(e)) from e


def open_store(scenario: ScenarioFile) -> Optional[ResultStore]:
    """Result store of the scenario, or None when output.database is unset."""
    if not scenario.output.database:
        return None
    return ResultStore(str(resolve_output(scenario, scenario.output.database)))


def cmd_train(args: argparse.Namespace) -> int:
    """
    Train T_p over the scenario's p grid, fit the LSP model and merge it into the table.

    The same scenario and seed always write the same table bytes.
    """
    scenario = load_scenario(args.scenario)
    configure_logging(scenario)
    cfg, training = scenario.system, scenario.training
    table_path = Path(args.table) if args.table else resolve_output(scenario, scenario.output.table)

    logger.info(f"Training switching power for scenario {cfg.scenario_key} over {training.p_num} budgets")
    model, points = train_switching_model(
        cfg,
        training.p_grid,
        np.random.default_rng(cfg.seed),
        n_train=training.n_train,
        n_candidates=training.n_candidates,
        refill=scenario.allocator.refill,
        progress=scenario.output.progress,
    )

    table = LookupTable.load(str(table_path))
    table.put(model)
    table.save(str(table_path))

    store = open_store(scenario)
    if store is not None:
        store.record_training_points(cfg.scenario_key, cfg.seed, points)

    logger.info(f"Fit residual {model.fit_residual:.3g} W over [{model.domain[0]:.4g}, {model.domain[1]:.4g}] W")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    """Run the four-receiver comparison and write the results CSV."""
    scenario = load_scenario(args.scenario)
    configure_logging(scenario)
    cfg = scenario.system
    table_path = Path(args.table) if args.table else resolve_output(scenario, scenario.output.table)
    csv_path = Path(args.output) if args.output else resolve_output(scenario, scenario.output.csv)

    model = LookupTable.load(str(table_path)).get(cfg.scenario_key)
    results = run_comparison(
        cfg,
        scenario.sweep.b_bar,
        model,
        scenario.sweep.n_realizations,
        np.random.default_rng(cfg.seed),
        refill=scenario.allocator.refill,
        progress=scenario.output.progress,
    )

    with AtomicOutputFile(csv_path) as f:
        f.write(format_results_csv(r.csv_row() for r in results))
    logger.info(f"Wrote {len(results)} result rows to {csv_path}")

    store = open_store(scenario)
    if store is not None:
        store.record_sweep_results(cfg.scenario_key, cfg.seed, results)
    return 0


def _allocation_report(scenario: ScenarioFile, args: argparse.Namespace) -> Dict[str, Any]:
    cfg = scenario.system
    channel_path = Path(args.channel)
    h_b, _ = parse_channel_dump(channel_path.read_text(encoding="utf-8"), path=str(channel_path))
    if h_b.shape[0] != cfg.n_rf:
        raise DimensionMismatchError("channel rows", cfg.n_rf, h_b.shape[0])

    if args.psw is not None:
        psw_bar = float(args.psw)
    else:
        table_path = args.table or str(resolve_output(scenario, scenario.output.table))
        try:
            psw_bar = predict_psw(LookupTable.load(table_path).get(cfg.scenario_key), args.budget)
        except MissingTableEntryError as e:
            logger.warning(f"{e}; using P_SW = 0")
            psw_bar = 0.0

    problem = AllocationProblem.from_channel(h_b, cfg.p_u, args.budget, psw_bar, cfg)
    result = allocate_bits(problem, refill=scenario.allocator.refill)

    # switching at its modeled value 2·N_RF·P̄_SW, as in the budget
    breakdown = dataclasses.replace(
        total_power(BitAllocation(bits=result.bits, prev_bits=result.bits, b_cap=cfg.b_cap), cfg),
        switching=2.0 * cfg.n_rf * psw_bar,
    )
    return {
        "budget_w": float(args.budget),
        "psw_bar_w": psw_bar,
        "m_opt": result.m_opt,
        "sigma2_x": [float(v) for v in problem.sigma2_x],
        "continuous_bits": [float(b) for b in result.continuous_bits],
        "bits": [int(b) for b in result.bits],
        "objective": result.objective,
        "power": breakdown.as_dict(),
    }


def cmd_allocate(args: argparse.Namespace) -> int:
    """Allocate bits for one dumped channel and print the allocation report."""
    scenario = load_scenario(args.scenario)
    configure_logging(scenario)
    report = _allocation_report(scenario, args)

    if args.json:
        print(json.dumps(report, indent=2))
        return 0

    lines: List[str] = [f"{'chain':>5}  {'sigma2_x':>14}  {'continuous':>10}  {'bits':>4}"]
    for i, (s, c, b) in enumerate(zip(report["sigma2_x"], report["continuous_bits"], report["bits"])):
        lines.append(f"{i:>5}  {s:>14.6g}  {c:>10.4f}  {b:>4d}")
    lines.append(f"M_opt = {report['m_opt']}, active chains = {report['power']['n_act']}")
    lines.append(f"P_SW estimate = {report['psw_bar_w']:.6g} W, relaxed MSQE = {report['objective']:.6g}")
    for name in ("lna", "ps", "rf_chain", "adc", "switching", "baseband", "total"):
        lines.append(f"{name:>9} = {report['power'][name]!r} W")
    print("\n".join(lines))
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    """Write the JSON summary of the scenario's stored runs."""
    scenario = load_scenario(args.scenario)
    configure_logging(scenario)
    store = open_store(scenario)
    if store is None:
        logger.error("output.database is not set; nothing to report")
        return 1

    output = args.output or str(resolve_output(scenario, scenario.output.report))
    Reporter(store, scenario.system.scenario_key, seed=scenario.system.seed).save_report(output)
    print(output)
    return 0


def cmd_dump_channel(args: argparse.Namespace) -> int:
    """
    Draw one coherence block from the scenario seed and write its effective channel.

    Block ``--block`` of the seeded stream is written, so the same scenario and
    block always give the same dump. The file is the input format of ``allocate``.
    """
    scenario = load_scenario(args.scenario)
    configure_logging(scenario)
    cfg = scenario.system
    if args.block < 0:
        raise InvalidParameterError(f"block index must be non-negative, got {args.block}")
    output = Path(args.output) if args.output else resolve_output(scenario, "results/channel.txt")

    rng = np.random.default_rng(cfg.seed)
    for _ in range(args.block + 1):
        channel = realize_channel(cfg, rng)

    with AtomicOutputFile(output) as f:
        f.write(format_channel_dump(channel.h_b, channel.gamma))
    logger.info(f"Wrote block {args.block} channel ({cfg.n_rf}x{cfg.n_u}) to {output}")
    print(output)
    return 0


def parse_command_line_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse command-line arguments.

    Returns:
        Namespace with ``handler`` set to the sub-command function.
    """
    parser = argparse.ArgumentParser(
        description="ADC bit allocation simulator for hybrid mmWave massive-MIMO receivers",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    python sim.py train config.yaml
    python sim.py sweep config.yaml --table results/switching_table.txt
    python sim.py allocate config.yaml --channel channel.txt --budget 12.5 --json
    python sim.py dump-channel config.yaml --block 3 --output channel.txt
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train the switching-power look-up table entry")
    train.add_argument("scenario", help="scenario YAML file")
    train.add_argument("--table", help="look-up table path (default: output.table)")
    train.set_defaults(handler=cmd_train)

    sweep = sub.add_parser("sweep", help="compare the four receivers over the b_bar grid")
    sweep.add_argument("scenario", help="scenario YAML file")
    sweep.add_argument("--table", help="look-up table path (default: output.table)")
    sweep.add_argument("--output", help="results CSV path (default: output.csv)")
    sweep.set_defaults(handler=cmd_sweep)

    allocate = sub.add_parser("allocate", help="allocate bits for one dumped channel")
    allocate.add_argument("scenario", help="scenario YAML file")
    allocate.add_argument("--channel", required=True, help="channel dump file")
    allocate.add_argument("--budget", required=True, type=float, help="total power budget in watts")
    allocate.add_argument("--table", help="look-up table path (default: output.table)")
    allocate.add_argument("--psw", type=float, help="P_SW estimate in watts (overrides the table)")
    allocate.add_argument("--json", action="store_true", help="print a machine-readable report")
    allocate.set_defaults(handler=cmd_allocate)

    report = sub.add_parser("report", help="summarize stored runs as JSON")
    report.add_argument("scenario", help="scenario YAML file")
    report.add_argument("--output", help="report path (default: output.report)")
    report.set_defaults(handler=cmd_report)

    dump = sub.add_parser("dump-channel", help="write one seeded channel realization for allocate")
    dump.add_argument("scenario", help="scenario YAML file")
    dump.add_argument("--block", type=int, default=0, help="coherence block index in the seeded stream")
    dump.add_argument("--output", help="dump path (default: results/channel.txt)")
    dump.set_defaults(handler=cmd_dump_channel)

    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one sub-command.

    Returns:
        Exit code of the sub-command.
    """
    args = parse_command_line_args(argv)
    return args.handler(args)


def safe_main(argv: Optional[List[str]] = None) -> int:
    """
    Wrapper around main() mapping failures to exit codes.

    Returns:
        0 on success, 2 for simulation errors, 130 when interrupted, 1 otherwise.
    """
    try:
        return main(argv)
    except SimulationError as e:
        message = str(e).replace('"', '\\"')
        print(f'error code={e.code} message="{message}"', file=sys.stderr)
        logger.debug("Simulation error", exc_info=True)
        return 2
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return 130
    except Exception as e:
        logger.exception(f"Failed with unexpected error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(safe_main())
