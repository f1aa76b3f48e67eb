"""CSV and JSON rendering of command payloads."""

import json
import math
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from config import SCHEMA_VERSION, setup_logging
from model.params import ModelParams

logger = setup_logging("commands.output")


def _plain(value: Any) -> Any:
    """JSON-safe copy: enums to values, tuples to lists, NaN and infinities to None."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def params_payload(p: ModelParams) -> Dict[str, Any]:
    payload = p.as_dict()
    payload["sign_flips"] = list(p.sign_flips)
    return payload


def render_table(rows: Sequence[Mapping[str, Any]], columns: Sequence[str]) -> str:
    """
    CSV with a fixed header, 17 significant digits, empty cells for missing values and LF
    line endings.
    """
    records = [{k: _plain(row.get(k)) for k in columns} for row in rows]
    df = pd.DataFrame(records, columns=list(columns))
    return df.to_csv(index=False, float_format="%.17g", lineterminator="\n", na_rep="")


def render_json(p: ModelParams, results: Any) -> str:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "params": params_payload(p),
        "results": results,
    }
    return json.dumps(_plain(payload), ensure_ascii=False, indent=4) + "\n"


def render(
    output: str,
    p: ModelParams,
    rows: List[Dict[str, Any]],
    columns: Sequence[str],
    results: Optional[Any] = None,
) -> str:
    """Render rows as CSV, or the results object (rows by default) as JSON."""
    if output == "json":
        return render_json(p, rows if results is None else results)
    return render_table(rows, columns)


def write_output(text: str, path: Optional[Path] = None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info(f"Output saved to {path}")
