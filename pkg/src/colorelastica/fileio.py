"""Delimited-text output: iteration histories, energy reports, sweep tables.

CSV follows RFC 4180 with '.' as the decimal separator; floating-point
values carry 12 significant digits.
"""

from __future__ import annotations

import csv
import json
import math

from .energies import EnergyReport
from .solver import IterationHistory


def fmt(x) -> str:
    """12-significant-digit representation; integers pass through."""
    if isinstance(x, bool) or isinstance(x, int):
        return str(x)
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def write_history_csv(path, history: IterationHistory) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "energy", "rel_change"])
        for i, energy, rel in history.rows():
            writer.writerow([i, fmt(energy), fmt(rel)])


def write_energy_csv(path, report: EnergyReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "value"])
        for name, value in report.as_dict().items():
            writer.writerow([name, fmt(value)])


def write_energy_json(path, report: EnergyReport) -> None:
    with open(path, "w") as fh:
        json.dump(report.as_dict(), fh, indent=2, sort_keys=False)
        fh.write("\n")


def write_sweep_csv(path, rows) -> None:
    """rows: iterable of (sd, seed, regularizer, value, relative_value)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sd", "seed", "regularizer", "value", "relative_value"])
        for sd, seed, reg, value, relative in rows:
            writer.writerow([fmt(sd), seed, reg, fmt(value), fmt(relative)])
