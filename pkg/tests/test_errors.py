"""
Tests for the exception hierarchy.
"""

import pytest
from src.errors import (
    ConvergenceError,
    DimensionMismatchError,
    EmptyChannelError,
    FitError,
    FormatError,
    InfeasibleBudgetError,
    InvalidConfigError,
    InvalidParameterError,
    MissingTableEntryError,
    OutputError,
    SimulationError,
    TrainingError,
)


class TestSimulationError:
    """Tests for the base error."""

    def test_default_message(self):
        """Test the base error has a generic message."""
        error = SimulationError()

        assert str(error) == "Simulation failed."
        assert error.code == "simulation_error"

    def test_custom_message(self):
        """Test a custom message is kept."""
        error = SimulationError("boom")

        assert error.message == "boom"
        assert str(error) == "boom"

    @pytest.mark.parametrize(
        "error, code",
        [
            (InvalidConfigError("x"), "invalid_config"),
            (InvalidParameterError("x"), "invalid_parameter"),
            (DimensionMismatchError("bits", 4, 3), "dimension_mismatch"),
            (InfeasibleBudgetError(1.0), "infeasible_budget"),
            (EmptyChannelError(), "empty_channel"),
            (ConvergenceError("design", 10), "no_convergence"),
            (FitError("x"), "rank_deficient_fit"),
            (TrainingError("x"), "training_failed"),
            (MissingTableEntryError((4, 8)), "missing_table_entry"),
            (FormatError("x"), "bad_format"),
            (OutputError("results/sweep.csv"), "unwritable_path"),
        ],
    )
    def test_codes_and_inheritance(self, error, code):
        """Test every error derives from SimulationError with its own code."""
        assert isinstance(error, SimulationError)
        assert error.code == code


class TestErrorDetails:
    """Tests for errors carrying extra attributes."""

    def test_dimension_mismatch_attributes(self):
        """Test expected and actual sizes are exposed and printed."""
        error = DimensionMismatchError("bits", 4, 3)

        assert error.expected == 4
        assert error.actual == 3
        assert "bits: expected 4, got 3" in str(error)

    def test_infeasible_budget_with_requirement(self):
        """Test the minimum budget is included when known."""
        error = InfeasibleBudgetError(1.5, required=2.25, detail="cannot power a single RF chain")

        assert error.budget == 1.5
        assert error.required == 2.25
        assert "1.5 W" in str(error)
        assert "2.25 W" in str(error)
        assert str(error).endswith("cannot power a single RF chain")

    def test_missing_table_entry_hints_train(self):
        """Test the missing key message tells the user to train."""
        error = MissingTableEntryError((4, 8), path="table.txt")

        assert error.key == (4, 8)
        assert "n_u=4, l=8" in str(error)
        assert "table.txt" in str(error)
        assert "train" in str(error)

    def test_format_error_location(self):
        """Test path and line prefix the message."""
        error = FormatError("bad number", path="dump.txt", line=3)

        assert error.line == 3
        assert str(error) == "dump.txt:3: bad number"

    def test_convergence_iterations(self):
        """Test the iteration count is kept."""
        error = ConvergenceError("Lloyd-Max design for b=3", 5)

        assert error.iterations == 5
        assert "after 5 iterations" in str(error)

    def test_output_error_path(self):
        """Test the failing path and reason are kept."""
        error = OutputError("results/table.txt", "Not a directory")

        assert error.path == "results/table.txt"
        assert str(error) == "cannot write results/table.txt: Not a directory"
