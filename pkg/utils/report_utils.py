"""
Deterministic CSV and JSON emission.

Floats are written with 17 significant digits and '\n' line endings, so an
identical configuration always produces byte-identical files. Every file
starts with its parameter provenance and the package version; wall-clock
timings never enter the output.
"""

import json
import math
import sys
from typing import Any, Dict, Mapping, Optional, Sequence

import numpy as np

from utils.system_utils import atomic_write

VOLATILE_META = ("wall_time_s",)


def format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _plain(value: Any) -> Any:
    """JSON-safe scalar; non-finite floats become null."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


def provenance(command: str, params: Mapping[str, Any], version: str,
               extra: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    """Flat provenance record: command, version and every parameter."""
    record: Dict[str, Any] = {"command": command, "version": version}
    record.update({f"param_{key}": value for key, value in params.items()})
    for key, value in (extra or {}).items():
        if key not in VOLATILE_META:
            record[key] = value
    return record


def csv_text(columns: Mapping[str, Sequence], header: Mapping[str, Any]) -> str:
    """Header comment lines '# key = value', a column row, then the data rows."""
    names = list(columns)
    data = [np.asarray(columns[name]) for name in names]
    lengths = {len(column) for column in data}
    if len(lengths) > 1:
        raise ValueError(f"columns have different lengths: {sorted(lengths)}")
    lines = [f"# {key} = {format_value(value)}" for key, value in header.items()]
    lines.append(",".join(names))
    for row in zip(*data):
        lines.append(",".join(format_value(value) for value in row))
    return "\n".join(lines) + "\n"


def json_text(payload: Mapping[str, Any], header: Mapping[str, Any]) -> str:
    record = {"provenance": _plain(dict(header))}
    record.update(_plain(dict(payload)))
    return json.dumps(record, indent=2, sort_keys=True, allow_nan=False) + "\n"


def emit(text: str, output: str = ""):
    """Write to output atomically, or to stdout when output is empty or '-'."""
    if output in ("", "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        atomic_write(output, text)
