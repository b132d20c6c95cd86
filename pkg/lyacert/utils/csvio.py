"""
Deterministic CSV output.

Floats are written with ``repr`` (shortest round-trip form), so the same
numbers always produce the same bytes and reading them back is exact.
"""

import csv
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union


def format_cell(value: Any) -> str:
    """Format one CSV cell; None becomes an empty cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(float(value))
    if hasattr(value, "item"):
        return format_cell(value.item())
    return str(value)


def write_csv(
    path: Union[str, Path],
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
) -> int:
    """
    Write a header-first CSV file with RFC-4180 quoting and CRLF line ends.

    Returns:
        int: Number of data rows written
    """
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
            count += 1
    return count


def read_csv(path: Union[str, Path], header: Optional[Sequence[str]] = None) -> list:
    """
    Read a CSV written by `write_csv` into a list of dict rows.

    Raises:
        ValueError: If `header` is given and does not match the file
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if header is not None and list(reader.fieldnames or []) != list(header):
            raise ValueError(f"{path}: expected header {list(header)}, got {reader.fieldnames}")
        return list(reader)
