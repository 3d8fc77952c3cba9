"""
Summary reports built from the result store.

Report Contents:
    - Row counts and infeasible-realization totals
    - Best energy-efficiency point of each method
    - First b̄ at which each method's sum SE is within 5% of infinite resolution
    - Infeasible realizations per method
    - Trained budget range

Example:
    >>> from src.database import ResultStore
    >>> from src.reports import Reporter
    >>> reporter = Reporter(ResultStore("results/runs.db"), (4, 8))
    >>> report = reporter.generate_summary()
    >>> report["best_ee"]["proposed_ba"]["b_bar"]
    2

Command Line:
    python -m src.reports results/runs.db 4 8 results/summary.json
"""

import json
import logging
import sys
from collections import defaultdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from .database import ResultStore
from .evaluator import Method
from .utils.atomic_file import AtomicOutputFile

logger = logging.getLogger(__name__)

CONVERGENCE_TOLERANCE = 0.05


class Reporter:
    """
    Builds JSON summaries of one scenario's runs.

    Attributes:
        store: ResultStore to query.
        key: Scenario key (N_u, L).
        seed: Restrict to one seed, or None for every recorded seed.
    """

    def __init__(self, store: ResultStore, key: Tuple[int, int], seed: Optional[int] = None) -> None:
        self.store: ResultStore = store
        self.key: Tuple[int, int] = (int(key[0]), int(key[1]))
        self.seed: Optional[int] = seed

    def generate_summary(self) -> Dict[str, Any]:
        """
        Summarize sweep and training rows of the scenario.

        Returns:
            Dictionary containing:
            - 'scenario': {'n_u': int, 'n_paths': int, 'seed': int or None}
            - 'statistics': row counts from ResultStore.get_statistics
            - 'best_ee': {method: {'b_bar', 'ee', 'sum_se', 'seed'}}
            - 'converged_b_bar': {method: first b̄ within 5% of infinite resolution, or None}
            - 'infeasible': {method: realizations recorded at rate 0}
            - 'training': {'points': int, 'p_min': float or None, 'p_max': float or None}
        """
        logger.info(f"Generating summary for scenario {self.key}")

        sweep = self.store.get_sweep_results(self.key, self.seed)
        training = self.store.get_training_points(self.key, self.seed)

        by_method: Dict[str, List[Dict[str, Any]]] = defaultdict(list)
        for row in sweep:
            by_method[row["method"]].append(row)

        best_ee: Dict[str, Dict[str, Any]] = {}
        infeasible: Dict[str, int] = {}
        for method, rows in by_method.items():
            # ties go to the smaller b̄
            best = max(rows, key=lambda r: (r["ee"], -r["b_bar"]))
            best_ee[method] = {"b_bar": best["b_bar"], "ee": best["ee"], "sum_se": best["sum_se"], "seed": best["seed"]}
            infeasible[method] = sum(r["infeasible"] for r in rows)

        return {
            "scenario": {"n_u": self.key[0], "n_paths": self.key[1], "seed": self.seed},
            "statistics": self.store.get_statistics(self.key),
            "best_ee": best_ee,
            "converged_b_bar": self._converged_b_bar(by_method),
            "infeasible": infeasible,
            "training": {
                "points": len(training),
                "p_min": min((t["p"] for t in training), default=None),
                "p_max": max((t["p"] for t in training), default=None),
            },
        }

    @staticmethod
    def _converged_b_bar(by_method: Dict[str, List[Dict[str, Any]]]) -> Dict[str, Optional[int]]:
        reference = {(r["seed"], r["b_bar"]): r["sum_se"] for r in by_method.get(Method.INFINITE.value, [])}
        converged: Dict[str, Optional[int]] = {}
        for method, rows in by_method.items():
            if method == Method.INFINITE.value:
                continue
            hits = [
                r["b_bar"]
                for r in rows
                if (r["seed"], r["b_bar"]) in reference
                and r["sum_se"] >= (1.0 - CONVERGENCE_TOLERANCE) * reference[(r["seed"], r["b_bar"])]
            ]
            converged[method] = min(hits) if hits else None
        return converged

    def save_report(self, output_path: str = "results/summary.json") -> Path:
        """
        Generate the summary and write it as indented JSON.

        Args:
            output_path: Destination; parent directories are created.

        Returns:
            The written path.

        Raises:
            OutputError: If the report cannot be written.
        """
        report = self.generate_summary()

        output_file = Path(output_path)
        with AtomicOutputFile(output_file) as f:
            json.dump(report, f, indent=2, ensure_ascii=False)

        logger.info(f"Report saved to {output_path}")
        return output_file


if __name__ == "__main__":
    db_path: str = sys.argv[1] if len(sys.argv) > 1 else "results/runs.db"
    n_u: int = int(sys.argv[2]) if len(sys.argv) > 2 else 4
    n_paths: int = int(sys.argv[3]) if len(sys.argv) > 3 else 8
    output: str = sys.argv[4] if len(sys.argv) > 4 else "results/summary.json"

    reporter = Reporter(ResultStore(db_path), (n_u, n_paths))
    reporter.save_report(output)

    print(f"Report generated: {output}")
