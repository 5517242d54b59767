"""CSV schema of the simulator outputs, with strict validation.

The plotting side deliberately re-declares the column contract instead of
importing the simulator: the CSV files are the interface.
"""

from __future__ import annotations

import csv
import re

SWEEP_COLUMNS = ["run_id", "V", "lambda", "fronthaul_cap", "slots", "avg_queue_total",
                 "avg_power_mean", "avg_eta_ee", "avg_eta_ee_trad", "stability_slope",
                 "pct_slots_converged", "drift_pass_rate"]

_TRACE_PATTERNS = [re.compile(p) for p in
                   (r"slot", r"Q_\d+", r"H_\d+", r"R_\d+", r"P_\d+", r"eta_ee")]


class SchemaError(ValueError):
    """Raised when a CSV does not match the expected simulator output layout."""


class EmptyTableError(ValueError):
    """Raised when a CSV carries a valid header but no data rows."""


def _read_rows(path: str):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise SchemaError(f"{path}: file is empty, expected a header row")
    return rows[0], rows[1:]


def load_sweep(path: str) -> list[dict]:
    """Rows of the sweep/summary table as dicts with numeric fields parsed."""
    header, body = _read_rows(path)
    if header != SWEEP_COLUMNS:
        offending = next((c for c in header if c not in SWEEP_COLUMNS), None)
        missing = next((c for c in SWEEP_COLUMNS if c not in header), None)
        column = offending if offending is not None else missing
        raise SchemaError(f"{path}: unexpected sweep schema at column {column!r}")
    if not body:
        raise EmptyTableError(f"{path}: sweep table has a header but no rows")
    out = []
    for row in body:
        if len(row) != len(SWEEP_COLUMNS):
            raise SchemaError(f"{path}: row with {len(row)} cells, expected {len(SWEEP_COLUMNS)}")
        rec = dict(zip(SWEEP_COLUMNS, row))
        for key in SWEEP_COLUMNS[1:]:
            try:
                rec[key] = float(rec[key])
            except ValueError as exc:
                raise SchemaError(f"{path}: non-numeric value in column {key!r}") from exc
        out.append(rec)
    return out


def load_trace(path: str) -> dict[str, list[float]]:
    """Trace columns keyed by name (slot, Q_*, H_*, R_*, P_*, eta_ee)."""
    header, body = _read_rows(path)
    expected_order = iter(_TRACE_PATTERNS)
    pattern = next(expected_order)
    for col in header:
        while not pattern.fullmatch(col):
            pattern = next(expected_order, None)
            if pattern is None:
                raise SchemaError(f"{path}: unexpected trace schema at column {col!r}")
    if header[0] != "slot" or header[-1] != "eta_ee" or not any(c.startswith("Q_") for c in header):
        raise SchemaError(f"{path}: trace header must run slot, Q_*, H_*, R_*, P_*, eta_ee")
    if not body:
        raise EmptyTableError(f"{path}: trace has a header but no rows")
    columns: dict[str, list[float]] = {name: [] for name in header}
    for row in body:
        if len(row) != len(header):
            raise SchemaError(f"{path}: trace row with {len(row)} cells, expected {len(header)}")
        for name, cell in zip(header, row):
            try:
                columns[name].append(float(cell))
            except ValueError as exc:
                raise SchemaError(f"{path}: non-numeric value in column {name!r}") from exc
    return columns
