"""
catrepeater/tools/formatters.py
===============================

Shared output formatting.

Why a separate module?
----------------------
Every subcommand writes the same two things: a CSV table for machines and
a Markdown summary for people.  Keeping both here means the provenance
header and the float format are identical everywhere, which is what makes
repeated runs byte-identical.
"""

import io
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, TextIO, Union

import pandas as pd

Sink = Union[str, Path, TextIO]


def format_value(value: Any) -> str:
    """Shortest round-trip text for floats, ``str`` for everything else."""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(float(value))
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def format_as_table(data: List[Dict[str, Any]], max_rows: int = 100) -> str:
    """Format a list of row-dicts as a Markdown table.

    Parameters
    ----------
    data:
        List of row dictionaries.  All dicts must have the same keys.
    max_rows:
        Cap on rendered rows.

    Returns
    -------
    str
        Markdown table with a row-count footer, or ``"No data returned"``.

    Example
    -------
    >>> print(format_as_table([{"quantity": "m=3 rate", "ratio": 0.62}]))
    | quantity | ratio |
    |------|------|
    | m=3 rate | 0.62 |

    *1 rows*
    """
    if not data:
        return "No data returned"

    display_data = data[:max_rows]
    total_rows = len(data)
    columns = list(display_data[0].keys())

    header = "| " + " | ".join(str(col) for col in columns) + " |"
    separator = "|" + "|".join("------" for _ in columns) + "|"

    rows = []
    for row in display_data:
        values = []
        for col in columns:
            val = row.get(col, "")
            if isinstance(val, float):
                val_str = f"{val:.4g}"
            else:
                val_str = str(val) if val is not None else ""
            if len(val_str) > 50:
                val_str = val_str[:47] + "..."
            values.append(val_str)
        rows.append("| " + " | ".join(values) + " |")

    table = "\n".join([header, separator] + rows)

    if total_rows > max_rows:
        table += f"\n\n*Showing {max_rows} of {total_rows} rows*"
    else:
        table += f"\n\n*{total_rows} rows*"

    return table


def provenance_lines(command: str, provenance: Mapping[str, Any]) -> List[str]:
    """``# key=value`` lines naming the command and every effective parameter."""
    lines = [f"# catrepeater {command}"]
    lines.extend(f"# {key}={format_value(value)}" for key, value in provenance.items())
    return lines


def render_csv(frame: pd.DataFrame, command: str, provenance: Optional[Mapping[str, Any]] = None) -> str:
    """CSV text with the provenance header; floats use ``repr``."""
    buffer = io.StringIO()
    for line in provenance_lines(command, provenance or {}):
        buffer.write(line + "\n")
    body = frame.map(lambda v: format_value(v) if isinstance(v, float) else v)
    body.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def write_csv(
    frame: pd.DataFrame,
    sink: Sink,
    command: str,
    provenance: Optional[Mapping[str, Any]] = None,
) -> None:
    """Write ``frame`` as CSV to a path or an open text stream.

    Parent directories of a path sink are created.
    """
    text = render_csv(frame, command, provenance)
    if isinstance(sink, (str, Path)):
        path = Path(sink)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    else:
        sink.write(text)
