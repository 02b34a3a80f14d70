"""
Writes result tables and documents.

- CSV: one header row, ',' separator, '.' decimal, `inf` for the infinite
  threshold, empty cell for missing values
- JSON: UTF-8, sorted keys, indent 2, "inf" string for infinite floats, null
  for NaN/None
- Destination is a path or standard output
"""

import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Optional, TextIO, Union

import numpy as np
import pandas as pd

from errors import DomainError

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")


# -------------------------
# ENCODING
# -------------------------
def _plain(value: Any) -> Any:
    """Recursively turn numpy scalars, inf and NaN into JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
    if value is pd.NA:
        return None
    return value


def frame_records(df: pd.DataFrame) -> list:
    return [_plain(row) for row in df.to_dict(orient="records")]


def to_json_text(doc: Any) -> str:
    if isinstance(doc, pd.DataFrame):
        doc = frame_records(doc)
    return json.dumps(_plain(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def to_csv_text(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, lineterminator="\n", na_rep="")


def render(result: Union[pd.DataFrame, dict, list], fmt: str) -> str:
    if fmt not in FORMATS:
        raise DomainError(f"Unknown output format '{fmt}' (expected one of {FORMATS})")
    if fmt == "json":
        return to_json_text(result)
    if not isinstance(result, pd.DataFrame):
        raise DomainError("CSV output needs a table; use --format json for documents")
    return to_csv_text(result)


# -------------------------
# WRITING
# -------------------------
def write_result(
    result: Union[pd.DataFrame, dict, list],
    fmt: str,
    path: Optional[Union[str, Path]] = None,
    stream: Optional[TextIO] = None,
) -> None:
    """Render `result` and write it to `path`, or to `stream` (default stdout)."""
    text = render(result, fmt)
    if path is None:
        out = stream if stream is not None else sys.stdout
        out.write(text)
        out.flush()
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # newline="" keeps "\n" line endings on every platform
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    rows = f"{len(result)} rows" if isinstance(result, pd.DataFrame) else "document"
    logger.info(f"✅ Wrote {rows} to {path}")
