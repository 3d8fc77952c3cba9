"""
Tests for report generation module.
"""

import json

import pytest
from src.errors import OutputError
from src.evaluator import Method, SweepResult
from src.reports import Reporter
from src.switching import TrainingPoint


def record_sweep(store, key=(4, 8), seed=0):
    """Store a small sweep where proposed_ba converges at b̄=2 and peaks in EE at b̄=2."""
    se = {
        Method.INFINITE: {1: 20.0, 2: 20.0, 3: 20.0},
        Method.FIXED: {1: 12.0, 2: 19.1, 3: 19.5},
        Method.ADC_BA: {1: 14.0, 2: 19.3, 3: 19.8},
        Method.PROPOSED_BA: {1: 15.0, 2: 19.2, 3: 19.9},
    }
    power = {1: 8.0, 2: 8.5, 3: 10.0}
    results = [
        SweepResult(m, b, se[m][b], se[m][b] * 1e9 / power[b], power[b], 16.0, 10, 1 if m == Method.PROPOSED_BA else 0)
        for b in (1, 2, 3)
        for m in Method
    ]
    store.record_sweep_results(key, seed, results)


class TestReporter:
    """Tests for Reporter class."""

    def test_reporter_initialization(self, temp_store):
        """Test reporter keeps the store and normalizes the key."""
        reporter = Reporter(temp_store, [4, 8])

        assert reporter.store is temp_store
        assert reporter.key == (4, 8)
        assert reporter.seed is None

    def test_generate_summary_empty_store(self, temp_store):
        """Test an empty store gives empty sections."""
        summary = Reporter(temp_store, (4, 8)).generate_summary()

        assert summary["scenario"] == {"n_u": 4, "n_paths": 8, "seed": None}
        assert summary["statistics"]["sweep_rows"] == 0
        assert summary["best_ee"] == {}
        assert summary["converged_b_bar"] == {}
        assert summary["training"] == {"points": 0, "p_min": None, "p_max": None}

    def test_best_ee(self, temp_store):
        """Test the best energy-efficiency point per method."""
        record_sweep(temp_store)

        summary = Reporter(temp_store, (4, 8)).generate_summary()

        assert summary["best_ee"][Method.PROPOSED_BA.value]["b_bar"] == 2
        assert summary["best_ee"][Method.INFINITE.value]["b_bar"] == 1
        assert set(summary["best_ee"]) == {m.value for m in Method}

    def test_converged_b_bar(self, temp_store):
        """Test the first b̄ within 5% of infinite resolution."""
        record_sweep(temp_store)

        converged = Reporter(temp_store, (4, 8)).generate_summary()["converged_b_bar"]

        assert converged == {"fixed": 2, "adc_ba": 2, "proposed_ba": 2}

    def test_never_converged(self, temp_store):
        """Test methods that never reach the tolerance report None."""
        results = [
            SweepResult(Method.INFINITE, 1, 20.0, 1e9, 10.0, 8.0, 5),
            SweepResult(Method.FIXED, 1, 5.0, 1e8, 10.0, 8.0, 5),
        ]
        temp_store.record_sweep_results((4, 8), 0, results)

        converged = Reporter(temp_store, (4, 8)).generate_summary()["converged_b_bar"]

        assert converged == {"fixed": None}

    def test_infeasible_and_training(self, temp_store):
        """Test infeasible totals and the trained budget range."""
        record_sweep(temp_store)
        temp_store.record_training_points((4, 8), 0, [TrainingPoint(p, 1e-3, 1e-3, 5) for p in (3.0, 9.0, 25.0)])

        summary = Reporter(temp_store, (4, 8)).generate_summary()

        assert summary["infeasible"]["proposed_ba"] == 3
        assert summary["infeasible"]["fixed"] == 0
        assert summary["training"] == {"points": 3, "p_min": 3.0, "p_max": 25.0}

    def test_seed_filter(self, temp_store):
        """Test a reporter restricted to one seed ignores the others."""
        record_sweep(temp_store, seed=0)
        record_sweep(temp_store, seed=1)

        summary = Reporter(temp_store, (4, 8), seed=1).generate_summary()

        assert summary["scenario"]["seed"] == 1
        assert summary["best_ee"]["fixed"]["seed"] == 1
        assert summary["infeasible"]["proposed_ba"] == 3

    def test_save_report(self, temp_store, tmp_path):
        """Test saving the report as JSON."""
        record_sweep(temp_store)
        output_file = tmp_path / "reports" / "summary.json"

        written = Reporter(temp_store, (4, 8)).save_report(str(output_file))

        assert written == output_file
        with open(output_file, encoding="utf-8") as f:
            data = json.load(f)
        assert data["best_ee"]["proposed_ba"]["b_bar"] == 2
        assert data["statistics"]["sweep_rows"] == 12

    def test_save_report_is_atomic(self, temp_store, tmp_path):
        """Test rewriting a report leaves only the final file behind."""
        record_sweep(temp_store)
        output_file = tmp_path / "summary.json"
        output_file.write_text("old", encoding="utf-8")

        Reporter(temp_store, (4, 8)).save_report(str(output_file))

        assert json.loads(output_file.read_text(encoding="utf-8"))["scenario"]["n_u"] == 4
        assert [p.name for p in tmp_path.iterdir()] == ["summary.json"]

    def test_save_report_unwritable(self, temp_store, tmp_path):
        """Test a report path under a regular file raises OutputError."""
        blocker = tmp_path / "reports"
        blocker.write_text("not a directory", encoding="utf-8")

        with pytest.raises(OutputError):
            Reporter(temp_store, (4, 8)).save_report(str(blocker / "summary.json"))
