# metrics/curves.py
from __future__ import annotations

import csv
import io
import logging
import os
from pathlib import Path
from typing import List, Sequence, Tuple

from core.errors import UsageError
from core.files import write_text_atomic

logger = logging.getLogger("metrics")


def read_curve_csv(path: str | os.PathLike) -> List[Tuple[float, float]]:
    """
    Two-column (rate, quality) CSV. Lines starting with '#' are skipped, as is
    a first row that does not parse as numbers (a header).
    """
    p = Path(path)
    if not p.exists():
        raise UsageError(f"File not found: {p}")
    pairs: List[Tuple[float, float]] = []
    with p.open(newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].lstrip().startswith("#")]
    for i, row in enumerate(rows):
        if len(row) < 2:
            raise UsageError(f"{p}: row {i + 1} needs two columns, got {row!r}.")
        try:
            pairs.append((float(row[0]), float(row[1])))
        except ValueError:
            if i == 0:
                continue
            raise UsageError(f"{p}: row {i + 1} is not numeric: {row!r}.")
    return pairs


def curve_csv_text(pairs: Sequence[Tuple[float, float]], header: Tuple[str, str] = ("rate", "quality"),
                   comment: str = "") -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for rate, quality in pairs:
        writer.writerow([repr(float(rate)), repr(float(quality))])
    return buf.getvalue()


def write_curve_csv(path: str | os.PathLike, pairs: Sequence[Tuple[float, float]],
                    header: Tuple[str, str] = ("rate", "quality"), comment: str = "") -> None:
    write_text_atomic(path, curve_csv_text(pairs, header, comment))
    logger.info("Wrote %d curve points to %s", len(pairs), path)
