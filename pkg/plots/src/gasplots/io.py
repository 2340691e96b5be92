"""Readers for the versioned coulombgas CSV layouts.

Each file starts with ``# key=value`` metadata lines (the first one pinning
``layout_version``), then a header row, then data rows. Floats were written
with ``repr`` and parse back exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SUPPORTED_LAYOUT = 1


class CsvFormatError(ValueError):
    """Input file is missing, empty, or does not match the expected layout."""


@dataclass(eq=False)
class CsvTable:
    meta: dict[str, str]
    header: list[str]
    rows: np.ndarray  # float64, shape (n_rows, n_cols)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.rows[:, self.header.index(name)]
        except ValueError as exc:
            raise CsvFormatError(f"column {name!r} not present in {self.header}") from exc


def read_table(path: str | Path, expect_columns: tuple[str, ...] = ()) -> CsvTable:
    path = Path(path)
    if not path.is_file():
        raise CsvFormatError(f"no such CSV file: {path}")
    meta: dict[str, str] = {}
    header: list[str] | None = None
    data: list[list[float]] = []
    with open(path, encoding="utf-8", newline="") as handle:
        for record in csv.reader(handle):
            if not record:
                continue
            if record[0].startswith("#"):
                text = ",".join(record).lstrip("#").strip()
                key, _, value = text.partition("=")
                meta[key.strip()] = value.strip()
                continue
            if header is None:
                header = [cell.strip() for cell in record]
                continue
            try:
                data.append([float(cell) for cell in record])
            except ValueError as exc:
                raise CsvFormatError(f"garbled row in {path}: {record}") from exc
    if meta.get("layout_version") != str(SUPPORTED_LAYOUT):
        raise CsvFormatError(f"{path} does not declare layout_version={SUPPORTED_LAYOUT}")
    if header is None or not data:
        raise CsvFormatError(f"{path} holds no data rows")
    for name in expect_columns:
        if name not in header:
            raise CsvFormatError(f"{path} lacks required column {name!r}")
    return CsvTable(meta, header, np.asarray(data, dtype=float))


def load_positions(path: str | Path) -> tuple[CsvTable, np.ndarray]:
    """positions.csv as a table plus the (N, d) coordinate cloud."""
    table = read_table(path, expect_columns=("step", "particle", "coord0"))
    coords = [name for name in table.header if name.startswith("coord")]
    cloud = np.stack([table.column(name) for name in coords], axis=1)
    return table, cloud


def meta_float(meta: dict[str, str], key: str, default: float | None = None) -> float:
    if key not in meta:
        if default is None:
            raise CsvFormatError(f"metadata key {key!r} missing from CSV header")
        return default
    return float(meta[key])


def meta_vector(meta: dict[str, str], key: str) -> np.ndarray:
    if key not in meta:
        raise CsvFormatError(f"metadata key {key!r} missing from CSV header")
    return np.array([float(t) for t in meta[key].split(",") if t])
