"""
Data export module for sweep CSV and solve trace JSON output.
"""

import csv
import io
import json
import os

from .config import Config
from .scenario import scenario_to_document

SWEEP_FIELDS = ["axis", "value", "Rs", "m_star", "feasible", "Ps0", "Ps1", "PR0", "psi_norm2"]


def _number(x) -> str:
    return format(float(x), ".10g")


def sweep_row_values(row) -> list[str]:
    """One SweepRow as CSV cells."""
    return [
        row.axis.value,
        _number(row.value),
        _number(row.secrecy_rate),
        "" if row.m_star is None else str(row.m_star),
        "true" if row.feasible else "false",
        _number(row.Ps0),
        _number(row.Ps1),
        _number(row.PR0),
        _number(row.psi_norm2),
    ]


def sweep_csv(rows) -> str:
    """Render sweep rows as CSV text with a fixed header and '\\n' line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SWEEP_FIELDS)
    for row in rows:
        writer.writerow(sweep_row_values(row))
    return buffer.getvalue()


def save_sweep_csv(rows, filename=None) -> str:
    """Save sweep rows to a CSV file, returning the path written."""
    if filename is None:
        filename = os.path.join(Config.exports_folder, "sweep.csv")

    directory = os.path.dirname(filename)
    if directory:
        os.makedirs(directory, exist_ok=True)

    with open(filename, "w", newline="", encoding="utf-8") as csvfile:
        csvfile.write(sweep_csv(rows))
    return filename


def trace_document(sc, cfg, solution, slacks) -> dict:
    """Everything a solve produced: search trace, rates, slacks and allocation."""
    doc = solution.to_dict()
    doc["constraints"] = [record.to_dict() for record in slacks]
    doc["scenario"] = scenario_to_document(sc, cfg)
    return doc


def save_trace_json(document, filename) -> str:
    """Save a solve trace to a JSON file"""
    directory = os.path.dirname(filename)
    if directory:
        os.makedirs(directory, exist_ok=True)

    with open(filename, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, ensure_ascii=False, allow_nan=True)
        f.write("\n")
    return filename
