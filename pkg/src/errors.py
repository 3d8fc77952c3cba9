"""
Exception classes for the bit allocation simulator.

Every error raised by the library derives from SimulationError and carries a
short machine-readable ``code``. The command-line front-end prints that code
on failure so that batch scripts can react to specific conditions (for
example re-running ``train`` after a MissingTableEntryError).

Exception Hierarchy:
    Exception
    └── SimulationError
        ├── InvalidConfigError      - scenario or SystemConfig violates an invariant
        ├── InvalidParameterError   - argument outside the operation's domain
        ├── DimensionMismatchError  - vector/matrix sizes disagree
        ├── InfeasibleBudgetError   - power budget cannot power a single chain
        ├── EmptyChannelError       - no RF chain carries signal energy
        ├── ConvergenceError        - iterative design did not converge
        ├── FitError                - least-squares design is rank deficient
        ├── TrainingError           - switching-power training has no usable data
        ├── MissingTableEntryError  - look-up table lacks the scenario key
        ├── FormatError             - malformed dump/table/scenario text
        └── OutputError             - an output file or directory cannot be written

Example:
    >>> from src.errors import InfeasibleBudgetError
    >>> try:
    ...     allocate_bits(problem)
    ... except InfeasibleBudgetError as e:
    ...     print(e.code, e.budget)
    infeasible_budget 1.5
"""

from typing import Optional, Tuple


class SimulationError(Exception):
    """
    Base class of all simulator errors.

    Attributes:
        code: Stable snake_case identifier printed by the CLI.
        message: Human-readable description.
    """

    code: str = "simulation_error"

    def __init__(self, message: Optional[str] = None) -> None:
        self.message: str = message or "Simulation failed."
        super().__init__(self.message)

    def __str__(self) -> str:
        return self.message


class InvalidConfigError(SimulationError):
    """Raised when a SystemConfig or scenario file violates its invariants."""

    code = "invalid_config"


class InvalidParameterError(SimulationError):
    """Raised when an operation receives an argument outside its domain."""

    code = "invalid_parameter"


class DimensionMismatchError(SimulationError):
    """
    Raised when array sizes disagree.

    Attributes:
        what: Name of the offending argument.
        expected: Expected length or shape.
        actual: Received length or shape.
    """

    code = "dimension_mismatch"

    def __init__(self, what: str, expected: object, actual: object) -> None:
        self.what: str = what
        self.expected: object = expected
        self.actual: object = actual
        super().__init__(f"{what}: expected {expected}, got {actual}")


class InfeasibleBudgetError(SimulationError):
    """
    Raised when a power budget cannot activate even one RF chain.

    Attributes:
        budget: The offending budget in watts.
        required: Smallest budget that would have been feasible, if known.
    """

    code = "infeasible_budget"

    def __init__(self, budget: float, required: Optional[float] = None, detail: str = "") -> None:
        self.budget: float = budget
        self.required: Optional[float] = required
        text = f"power budget {budget:.6g} W is infeasible"
        if required is not None:
            text += f" (at least {required:.6g} W needed)"
        if detail:
            text += f": {detail}"
        super().__init__(text)


class EmptyChannelError(SimulationError):
    """Raised when every RF chain has zero desired-signal variance."""

    code = "empty_channel"

    def __init__(self, message: Optional[str] = None) -> None:
        super().__init__(message or "no RF chain carries signal energy")


class ConvergenceError(SimulationError):
    """
    Raised when an iterative procedure stops without converging.

    Attributes:
        iterations: Number of iterations performed.
    """

    code = "no_convergence"

    def __init__(self, what: str, iterations: int) -> None:
        self.iterations: int = iterations
        super().__init__(f"{what} did not converge after {iterations} iterations")


class FitError(SimulationError):
    """Raised when a polynomial fit is rank deficient or under-determined."""

    code = "rank_deficient_fit"


class TrainingError(SimulationError):
    """Raised when switching-power training has nothing to work with."""

    code = "training_failed"


class MissingTableEntryError(SimulationError):
    """
    Raised when the switching-power look-up table lacks a scenario.

    Attributes:
        key: The (N_u, L) scenario key that was requested.
    """

    code = "missing_table_entry"

    def __init__(self, key: Tuple[int, int], path: Optional[str] = None) -> None:
        self.key: Tuple[int, int] = key
        where = f" in {path}" if path else ""
        super().__init__(
            f"no switching-power model for n_u={key[0]}, l={key[1]}{where}; run 'train' for this scenario first"
        )


class FormatError(SimulationError):
    """
    Raised when a text file does not follow its documented format.

    Attributes:
        path: File being parsed (or '<string>').
        line: 1-based line number, if known.
    """

    code = "bad_format"

    def __init__(self, detail: str, path: str = "<string>", line: Optional[int] = None) -> None:
        self.path: str = path
        self.line: Optional[int] = line
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {detail}")


class OutputError(SimulationError):
    """
    Raised when an output file or its directory cannot be written.

    Attributes:
        path: The output path that failed.
    """

    code = "unwritable_path"

    def __init__(self, path: str, reason: str = "") -> None:
        self.path: str = path
        detail = f": {reason}" if reason else ""
        super().__init__(f"cannot write {path}{detail}")
