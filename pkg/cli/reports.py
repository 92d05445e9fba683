# cli/reports.py
from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Dict, Iterable, Sequence

from core.conf import gfix_version


def _clean(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item") and callable(value.item):  # numpy scalars
        return _clean(value.item())
    return value


def to_json(payload: Dict[str, Any]) -> str:
    """Sorted, indented JSON with the tool version; non-finite floats become null."""
    doc = dict(_clean(payload))
    doc["gfix_version"] = gfix_version()
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    buf.write(f"# gfix {gfix_version()}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()
