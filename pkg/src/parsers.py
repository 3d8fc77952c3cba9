"""
Text formats read and written by the simulator.

1. Channel dump: an effective channel H_b for the ``allocate`` command
2. Look-up table: fitted switching-power models keyed by (N_u, L)
3. Results CSV: one row per (method, b̄) of a sweep

All numbers are written with 17 significant digits (or ``repr`` for the
CSV), which round-trips IEEE doubles exactly and never depends on the
locale.

Channel Dump Format:
    # comment lines and blank lines are ignored
    rows 2
    cols 2
    1 0 0 0.5          <- one line per row: re im re im ...
    0 0 0.25 -1
    gamma 1 2.5        <- optional, one value per column

Look-up Table Format:
    [n_u=4,l=8]
    p_min = 3
    p_max = 25
    residual = 1.2e-05
    coeffs = c0 c1 c2 c3 c4 c5
    grid = 3:0.001 4.5:0.0012 ...

Example:
    >>> from src.parsers import format_channel_dump, parse_channel_dump
    >>> h_b, gamma = parse_channel_dump("rows 1\\ncols 1\\n1 0\\n")
    >>> h_b
    array([[1.+0.j]])
"""

import csv
import io
import logging
import re
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import FormatError

logger = logging.getLogger(__name__)

CSV_HEADER: Tuple[str, ...] = (
    "method",
    "b_bar",
    "sum_se_bps_hz",
    "ee_bits_per_joule",
    "mean_power_w",
    "mean_m_opt",
    "n",
)

LUT_KEYS = ("p_min", "p_max", "residual", "coeffs", "grid")
_SECTION = re.compile(r"^\[n_u=(\d+),\s*l=(\d+)\]$")


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _content_lines(text: str) -> List[Tuple[int, str]]:
    """Non-blank, non-comment lines with their 1-based numbers."""
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append((number, line))
    return lines


def _floats(tokens: Sequence[str], path: str, line: int) -> List[float]:
    try:
        return [float(t) for t in tokens]
    except ValueError as e:
        raise FormatError(f"not a number: {e}", path=path, line=line) from e


def format_channel_dump(h_b: np.ndarray, gamma: Optional[np.ndarray] = None) -> str:
    """
    Serialize an effective channel (and optionally the large-scale gains).

    Args:
        h_b: Complex N_RF×N_u matrix.
        gamma: Optional per-user gains (length N_u).

    Returns:
        Dump text ending with a newline.
    """
    h_b = np.atleast_2d(np.asarray(h_b, dtype=complex))
    rows, cols = h_b.shape
    lines = ["# effective channel H_b, one row per RF chain: re im pairs per user", f"rows {rows}", f"cols {cols}"]
    for row in h_b:
        lines.append(" ".join(f"{_g17(z.real)} {_g17(z.imag)}" for z in row))
    if gamma is not None:
        lines.append("gamma " + " ".join(_g17(g) for g in np.asarray(gamma, dtype=float)))
    return "\n".join(lines) + "\n"


def parse_channel_dump(text: str, path: str = "<string>") -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Parse a channel dump.

    Args:
        text: Dump text.
        path: Source name for error messages.

    Returns:
        (h_b, gamma) with gamma None when the dump has no gamma line.

    Raises:
        FormatError: On a missing header, wrong row/column counts or bad numbers.
    """
    lines = _content_lines(text)
    header: Dict[str, int] = {}
    for key in ("rows", "cols"):
        if not lines:
            raise FormatError(f"missing '{key}' header", path=path)
        number, line = lines.pop(0)
        parts = line.split()
        if len(parts) != 2 or parts[0] != key or not parts[1].isdigit() or int(parts[1]) < 1:
            raise FormatError(f"expected '{key} <positive integer>', got '{line}'", path=path, line=number)
        header[key] = int(parts[1])

    rows, cols = header["rows"], header["cols"]
    gamma: Optional[np.ndarray] = None
    if lines and lines[-1][1].startswith("gamma"):
        number, line = lines.pop()
        values = _floats(line.split()[1:], path, number)
        if len(values) != cols:
            raise FormatError(f"gamma needs {cols} values, got {len(values)}", path=path, line=number)
        gamma = np.array(values)

    if len(lines) != rows:
        raise FormatError(f"expected {rows} matrix rows, got {len(lines)}", path=path)

    h_b = np.empty((rows, cols), dtype=complex)
    for i, (number, line) in enumerate(lines):
        values = _floats(line.split(), path, number)
        if len(values) != 2 * cols:
            raise FormatError(f"row needs {2 * cols} numbers, got {len(values)}", path=path, line=number)
        pairs = np.array(values).reshape(cols, 2)
        h_b[i] = pairs[:, 0] + 1j * pairs[:, 1]

    logger.debug(f"Parsed {rows}x{cols} channel dump from {path}")
    return h_b, gamma


def format_lookup_table(records: Dict[Tuple[int, int], Dict[str, Any]]) -> str:
    """
    Serialize look-up table records (see module docstring), sorted by key.

    Each record holds p_min, p_max, residual, six coeffs and the grid pairs.
    """
    lines = ["# switching power look-up table: fifth-order LSP models of P_SW(p) per (n_u, l)"]
    for (n_u, n_paths) in sorted(records):
        rec = records[(n_u, n_paths)]
        lines.append(f"[n_u={n_u},l={n_paths}]")
        lines.append(f"p_min = {_g17(rec['p_min'])}")
        lines.append(f"p_max = {_g17(rec['p_max'])}")
        lines.append(f"residual = {_g17(rec['residual'])}")
        lines.append("coeffs = " + " ".join(_g17(c) for c in rec["coeffs"]))
        lines.append("grid = " + " ".join(f"{_g17(p)}:{_g17(t)}" for p, t in rec["grid"]))
    return "\n".join(lines) + "\n"


def parse_lookup_table(text: str, path: str = "<string>") -> Dict[Tuple[int, int], Dict[str, Any]]:
    """
    Parse look-up table text into records keyed by (N_u, L).

    Raises:
        FormatError: On a key outside a section, a duplicate section, unknown
            or missing keys, or malformed numbers.
    """
    records: Dict[Tuple[int, int], Dict[str, Any]] = {}
    current: Optional[Tuple[int, int]] = None
    section_line = 0

    def close_section() -> None:
        if current is None:
            return
        missing = [k for k in LUT_KEYS if k not in records[current]]
        if missing:
            raise FormatError(f"section {current} lacks {missing}", path=path, line=section_line)

    for number, line in _content_lines(text):
        match = _SECTION.match(line)
        if match:
            close_section()
            current = (int(match.group(1)), int(match.group(2)))
            if current in records:
                raise FormatError(f"duplicate section {current}", path=path, line=number)
            records[current] = {}
            section_line = number
            continue

        if current is None:
            raise FormatError("entry outside a [n_u=..,l=..] section", path=path, line=number)
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or key not in LUT_KEYS:
            raise FormatError(f"unknown entry '{line}'", path=path, line=number)

        if key == "coeffs":
            records[current][key] = _floats(value.split(), path, number)
        elif key == "grid":
            pairs = []
            for token in value.split():
                p, colon, t = token.partition(":")
                if not colon:
                    raise FormatError(f"grid point '{token}' is not p:t", path=path, line=number)
                pairs.append(tuple(_floats((p, t), path, number)))
            records[current][key] = pairs
        else:
            records[current][key] = _floats([value], path, number)[0]

    close_section()
    return records


def format_results_csv(rows: Iterable[Sequence[Any]]) -> str:
    """
    Sweep results as CSV text with the fixed header.

    Floats are written with ``repr`` (shortest round-trip form, decimal point,
    no locale), lines end with ``\\n``.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        if len(row) != len(CSV_HEADER):
            raise FormatError(f"result row needs {len(CSV_HEADER)} fields, got {len(row)}")
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue()


def parse_results_csv(text: str, path: str = "<string>") -> List[Dict[str, Any]]:
    """
    Read sweep results CSV back into dicts with typed values.

    Raises:
        FormatError: If the header differs from CSV_HEADER or a value is malformed.
    """
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise FormatError(f"unexpected CSV header {header}", path=path, line=1)

    rows = []
    for number, fields in enumerate(reader, start=2):
        if not fields:
            continue
        if len(fields) != len(CSV_HEADER):
            raise FormatError(f"expected {len(CSV_HEADER)} fields, got {len(fields)}", path=path, line=number)
        try:
            rows.append(
                {
                    "method": fields[0],
                    "b_bar": int(fields[1]),
                    "sum_se_bps_hz": float(fields[2]),
                    "ee_bits_per_joule": float(fields[3]),
                    "mean_power_w": float(fields[4]),
                    "mean_m_opt": float(fields[5]),
                    "n": int(fields[6]),
                }
            )
        except ValueError as e:
            raise FormatError(str(e), path=path, line=number) from e
    return rows
