"""
Atomic output files.

Results (CSV tables, the switching-power look-up table) are first written to
a temporary file next to the target and moved over it only when the ``with``
block finishes without an exception, so an interrupted run never leaves a
truncated output behind.

Example:
    >>> from src.utils.atomic_file import AtomicOutputFile
    >>> with AtomicOutputFile("results/sweep.csv") as f:
    ...     f.write("method,b_bar\\n")
    >>> # results/sweep.csv now holds the complete text
"""

import logging
import os
import tempfile
from pathlib import Path
from types import TracebackType
from typing import IO, Optional, Type, Union

from ..errors import OutputError

logger = logging.getLogger(__name__)


class AtomicOutputFile:
    """
    Context manager yielding a text file that replaces ``path`` on success.

    The temporary file lives in the target's directory (created if needed)
    so the final ``os.replace`` stays on one filesystem. Newlines are written
    as ``\\n`` on every platform. Failures to create or move the file raise
    OutputError.

    Attributes:
        path: Final destination.
        temp_path: Temporary file path while the block runs.
    """

    def __init__(self, path: Union[str, Path], encoding: str = "utf-8") -> None:
        self.path: Path = Path(path)
        self.encoding: str = encoding
        self.temp_path: Optional[Path] = None
        self._handle: Optional[IO[str]] = None

    def __enter__(self) -> IO[str]:
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            fd, name = tempfile.mkstemp(prefix=f".{self.path.name}.", suffix=".tmp", dir=self.path.parent)
        except OSError as e:
            raise OutputError(str(self.path), e.strerror or str(e)) from e
        self.temp_path = Path(name)
        self._handle = os.fdopen(fd, "w", encoding=self.encoding, newline="\n")
        logger.debug(f"Writing {self.path} via {self.temp_path}")
        return self._handle

    def __exit__(
        self,
        exc_type: Optional[Type[BaseException]],
        exc_val: Optional[BaseException],
        exc_tb: Optional[TracebackType],
    ) -> None:
        if self._handle is not None:
            self._handle.close()

        if self.temp_path is not None:
            if exc_type is None:
                try:
                    os.replace(self.temp_path, self.path)
                except OSError as e:
                    self.temp_path.unlink(missing_ok=True)
                    raise OutputError(str(self.path), e.strerror or str(e)) from e
                logger.debug(f"Wrote {self.path}")
            else:
                self.temp_path.unlink(missing_ok=True)
                logger.debug(f"Discarded partial output for {self.path}")

        self.temp_path = None
        self._handle = None
