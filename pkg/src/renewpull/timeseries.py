"""Hourly time-series file ingestion and export.

Series files are two-column CSVs (hour_index, value) with hour_index
running 0..N-1 in order. Values are parsed as floats; semantic checks
(non-negativity, NaN rejection) are left to the consuming validator so
error messages can carry the right field path.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

HOURS_PER_YEAR = 8760


def read_hourly_csv(path: str | Path, expected_length: int | None = HOURS_PER_YEAR) -> np.ndarray:
    path = Path(path)
    frame = pd.read_csv(path, comment="#")
    for column in ("hour_index", "value"):
        if column not in frame.columns:
            raise ValueError(f"{path}: missing column {column!r}")
    idx = frame["hour_index"].to_numpy()
    if len(idx) == 0:
        raise ValueError(f"{path}: empty time series")
    if not np.array_equal(idx, np.arange(len(idx))):
        raise ValueError(f"{path}: hour_index must run 0..{len(idx) - 1} in order")
    if expected_length is not None and len(idx) != expected_length:
        raise ValueError(f"{path}: expected {expected_length} rows, found {len(idx)}")
    return frame["value"].to_numpy(dtype=float)


def write_hourly_csv(path: str | Path, values) -> None:
    values = np.asarray(values, dtype=float)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("hour_index,value\n")
        for i, v in enumerate(values):
            fh.write(f"{i},{format(float(v), '.12g')}\n")
