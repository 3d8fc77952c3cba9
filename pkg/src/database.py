"""
SQLite store of training points and sweep results.

Every ``train`` and ``sweep`` run records its outcome keyed by scenario
(N_u, L) and seed, so that ``report`` can summarize runs without re-reading
the CSV files. Re-running a scenario with the same seed replaces its rows.

Database Schema:
    training_points:
        - id: Primary key
        - n_u, n_paths, seed: Scenario key and seed of the run
        - p: Power budget (W)
        - t_p: Trained estimate T_p (W)
        - p_act: Realized switching power at T_p (W)
        - n_feasible: Feasible candidates at p
        - recorded_at: Timestamp

    sweep_results:
        - id: Primary key
        - n_u, n_paths, seed: Scenario key and seed of the run
        - method, b_bar: Sweep point
        - sum_se, ee, mean_power, mean_m_opt, n, infeasible: SweepResult fields
        - recorded_at: Timestamp

Example:
    >>> from src.database import ResultStore
    >>> store = ResultStore("results/runs.db")
    >>> store.record_sweep_results((4, 8), 0, results)
    >>> store.get_statistics((4, 8))
    {'training_points': 0, 'sweep_rows': 48, 'infeasible_realizations': 3}
"""

import logging
import sqlite3
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple

from .errors import OutputError
from .evaluator import SweepResult
from .switching import TrainingPoint

logger = logging.getLogger(__name__)

ScenarioKey = Tuple[int, int]


class ResultStore:
    """
    SQLite wrapper for simulation results.

    Attributes:
        db_path: Path to the SQLite database file.

    Thread Safety:
        Each operation opens its own connection; create one store per thread.
    """

    def __init__(self, db_path: str) -> None:
        """
        Open (and create if needed) the result database.

        Args:
            db_path: Database file; parent directories are created.

        Raises:
            OutputError: If the database cannot be created or opened.
        """
        self.db_path: Path = Path(db_path)
        try:
            self.db_path.parent.mkdir(parents=True, exist_ok=True)
            self._init_schema()
        except (OSError, sqlite3.OperationalError) as e:
            raise OutputError(str(self.db_path), str(e)) from e
        logger.debug(f"Result store at {self.db_path}")

    @contextmanager
    def _get_connection(self) -> Iterator[sqlite3.Connection]:
        """Connection that commits on success and rolls back on error."""
        conn = sqlite3.connect(str(self.db_path))
        conn.row_factory = sqlite3.Row

        try:
            yield conn
            conn.commit()
        except Exception:
            conn.rollback()
            logger.exception("Result store error")
            raise
        finally:
            conn.close()

    def _init_schema(self) -> None:
        with self._get_connection() as conn:
            conn.executescript(
                """
                CREATE TABLE IF NOT EXISTS training_points (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    n_u INTEGER NOT NULL,
                    n_paths INTEGER NOT NULL,
                    seed INTEGER NOT NULL,
                    p REAL NOT NULL,
                    t_p REAL NOT NULL,
                    p_act REAL NOT NULL,
                    n_feasible INTEGER NOT NULL,
                    recorded_at DATETIME DEFAULT CURRENT_TIMESTAMP
                );

                CREATE TABLE IF NOT EXISTS sweep_results (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    n_u INTEGER NOT NULL,
                    n_paths INTEGER NOT NULL,
                    seed INTEGER NOT NULL,
                    method TEXT NOT NULL,
                    b_bar INTEGER NOT NULL,
                    sum_se REAL NOT NULL,
                    ee REAL NOT NULL,
                    mean_power REAL NOT NULL,
                    mean_m_opt REAL NOT NULL,
                    n INTEGER NOT NULL,
                    infeasible INTEGER NOT NULL,
                    recorded_at DATETIME DEFAULT CURRENT_TIMESTAMP
                );

                CREATE INDEX IF NOT EXISTS idx_training_key ON training_points(n_u, n_paths);
                CREATE INDEX IF NOT EXISTS idx_sweep_key ON sweep_results(n_u, n_paths);
                """
            )

    def record_training_points(self, key: ScenarioKey, seed: int, points: Iterable[TrainingPoint]) -> int:
        """
        Replace the training points of (key, seed).

        Returns:
            Number of rows written.
        """
        rows = [(key[0], key[1], seed, pt.p, pt.t_p, pt.p_act, pt.n_feasible) for pt in points]
        with self._get_connection() as conn:
            conn.execute(
                "DELETE FROM training_points WHERE n_u = ? AND n_paths = ? AND seed = ?",
                (key[0], key[1], seed),
            )
            conn.executemany(
                """
                INSERT INTO training_points (n_u, n_paths, seed, p, t_p, p_act, n_feasible)
                VALUES (?, ?, ?, ?, ?, ?, ?)
                """,
                rows,
            )

        logger.debug(f"Recorded {len(rows)} training points for {key}, seed {seed}")
        return len(rows)

    def record_sweep_results(self, key: ScenarioKey, seed: int, results: Iterable[SweepResult]) -> int:
        """
        Replace the sweep rows of (key, seed) for the (method, b̄) points given.

        Returns:
            Number of rows written.
        """
        rows = [
            (key[0], key[1], seed, r.method.value, r.b_bar, r.sum_se, r.ee, r.mean_power, r.mean_m_opt, r.n, r.infeasible)
            for r in results
        ]
        with self._get_connection() as conn:
            conn.executemany(
                """
                DELETE FROM sweep_results
                WHERE n_u = ? AND n_paths = ? AND seed = ? AND method = ? AND b_bar = ?
                """,
                [row[:5] for row in rows],
            )
            conn.executemany(
                """
                INSERT INTO sweep_results
                    (n_u, n_paths, seed, method, b_bar, sum_se, ee, mean_power, mean_m_opt, n, infeasible)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
                """,
                rows,
            )

        logger.debug(f"Recorded {len(rows)} sweep rows for {key}, seed {seed}")
        return len(rows)

    def get_sweep_results(self, key: ScenarioKey, seed: Optional[int] = None) -> List[Dict[str, Any]]:
        """Sweep rows of a scenario ordered by seed, b̄ and insertion."""
        query = "SELECT * FROM sweep_results WHERE n_u = ? AND n_paths = ?"
        params: Tuple = (key[0], key[1])
        if seed is not None:
            query += " AND seed = ?"
            params += (seed,)
        with self._get_connection() as conn:
            return [dict(row) for row in conn.execute(query + " ORDER BY seed, b_bar, id", params).fetchall()]

    def get_training_points(self, key: ScenarioKey, seed: Optional[int] = None) -> List[Dict[str, Any]]:
        """Training points of a scenario ordered by seed and p."""
        query = "SELECT * FROM training_points WHERE n_u = ? AND n_paths = ?"
        params: Tuple = (key[0], key[1])
        if seed is not None:
            query += " AND seed = ?"
            params += (seed,)
        with self._get_connection() as conn:
            return [dict(row) for row in conn.execute(query + " ORDER BY seed, p", params).fetchall()]

    def get_statistics(self, key: Optional[ScenarioKey] = None) -> Dict[str, int]:
        """
        Row counts, optionally for one scenario.

        Returns:
            Dictionary with training_points, sweep_rows and infeasible_realizations.
        """
        where, params = ("WHERE n_u = ? AND n_paths = ?", tuple(key)) if key else ("", ())
        with self._get_connection() as conn:
            training = conn.execute(f"SELECT COUNT(*) AS count FROM training_points {where}", params).fetchone()
            sweep = conn.execute(
                f"SELECT COUNT(*) AS count, COALESCE(SUM(infeasible), 0) AS infeasible FROM sweep_results {where}",
                params,
            ).fetchone()

        return {
            "training_points": training["count"],
            "sweep_rows": sweep["count"],
            "infeasible_realizations": sweep["infeasible"],
        }
