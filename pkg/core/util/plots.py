# Python module: plots.py

"""Plot-ready output. Nothing is drawn in-process; gnuplot reads the columns."""

# Import the required libraries
import json
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

from core.errors import DomainError
from core.util.utils import read_csv

logger = logging.getLogger(__name__)


def gnuplot_columns(
    header: Sequence[str],
    rows: Sequence[Sequence[Any]],
    columns: Optional[Sequence[str]] = None,
    metadata: Optional[Dict[str, Any]] = None,
) -> str:
    """Whitespace-separated columns with ``#`` comment lines for metadata and names.

    Example:
        ```python
        text = gnuplot_columns(["E", "k"], [["0.0", "0.5"]])
        # "# E k\\n0.0 0.5\\n"
        ```
    """
    names = list(columns) if columns else list(header)
    missing = [c for c in names if c not in header]
    if missing:
        raise DomainError(f"Columns {missing} not in {list(header)}")
    index = [list(header).index(c) for c in names]
    lines: List[str] = [f"# {key}: {json.dumps(metadata[key], sort_keys=True)}" for key in sorted(metadata or {})]
    lines.append("# " + " ".join(names))
    for row in rows:
        cells = [str(row[i]) if i < len(row) and str(row[i]) != "" else "NaN" for i in index]
        lines.append(" ".join(cells))
    return "\n".join(lines) + "\n"


def csv_to_gnuplot(csv_path: str, dat_path: str, columns: Optional[Sequence[str]] = None) -> str:
    """Convert a CSV artifact written by ``write_csv`` into a gnuplot data file."""
    if not os.path.exists(csv_path):
        raise DomainError(f"No CSV artifact at {csv_path}")
    metadata, header, rows = read_csv(csv_path)
    if not header:
        raise DomainError(f"{csv_path} has no header row")
    os.makedirs(os.path.dirname(dat_path) or ".", exist_ok=True)
    with open(dat_path, "w") as handle:
        handle.write(gnuplot_columns(header, rows, columns, metadata))
    logger.info("Wrote %d rows of %s to %s", len(rows), csv_path, dat_path)
    return dat_path
