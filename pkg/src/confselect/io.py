"""CSV ingestion and report serialization.

Input files are UTF-8 CSV with a header row and decimal-point notation.
Numeric columns bound by the run must parse to finite floats; the first
offending cell fails ingestion with its column name and 0-based data row
index. Output files are written atomically (temp file + rename) so a crashed
run never leaves a truncated report behind.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import AsymptoticReport
from .errors import ContractError, IngestionError
from .pipeline import Dataset, SelectionReport
from .sim import McReport


def read_table(path) -> tuple[list[str], list[list[str]]]:
    """Read a CSV file into (header, rows); malformed files raise csv.Error."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: file is empty") from None
        rows = [row for row in reader if row]
    return [h.strip() for h in header], rows


def _column_index(header: list[str], column: str, path) -> int:
    try:
        return header.index(column)
    except ValueError:
        raise ContractError(
            f"{path}: column {column!r} not found (header: {', '.join(header)})"
        ) from None


def numeric_column(header, rows, column: str, path) -> np.ndarray:
    """Extract one finite float column, naming row and column on failure."""
    idx = _column_index(header, column, path)
    out = np.empty(len(rows))
    for i, row in enumerate(rows):
        if idx >= len(row):
            raise IngestionError(f"{path}: row {i} has no value in column {column!r}")
        try:
            out[i] = float(row[idx])
        except ValueError:
            raise IngestionError(
                f"{path}: non-finite value in column {column!r} at row {i}"
            ) from None
    if not np.all(np.isfinite(out)):
        i = int(np.flatnonzero(~np.isfinite(out))[0])
        raise IngestionError(f"{path}: non-finite value in column {column!r} at row {i}")
    return out


def string_column(header, rows, column: str, path) -> np.ndarray:
    idx = _column_index(header, column, path)
    return np.asarray([row[idx] if idx < len(row) else "" for row in rows], dtype=object)


def read_dataset(
    calib_path,
    test_path,
    pred_col: str,
    outcome_col: str | None = None,
    threshold_col: str | None = None,
    group_col: str | None = None,
) -> Dataset:
    """Assemble a :class:`~confselect.pipeline.Dataset` from two CSV files.

    The outcome column is required on calibration rows and read from test
    rows only when present there (evaluation mode). Threshold and group
    columns are read from each file only where present.
    """
    calib_header, calib_rows = read_table(calib_path)
    test_header, test_rows = read_table(test_path)
    if not calib_rows:
        raise ContractError(f"{calib_path}: calibration file has no data rows")
    if not test_rows:
        raise ContractError(f"{test_path}: test file has no data rows")

    def optional(header, rows, col, path):
        if col is None or col not in header:
            return None
        return numeric_column(header, rows, col, path)

    def optional_str(header, rows, col, path):
        if col is None or col not in header:
            return None
        return string_column(header, rows, col, path)

    if outcome_col is None:
        raise ContractError("an outcome column is required on calibration rows")
    return Dataset(
        calib_pred=numeric_column(calib_header, calib_rows, pred_col, calib_path),
        calib_outcome=numeric_column(calib_header, calib_rows, outcome_col, calib_path),
        calib_threshold=optional(calib_header, calib_rows, threshold_col, calib_path),
        calib_group=optional_str(calib_header, calib_rows, group_col, calib_path),
        test_pred=numeric_column(test_header, test_rows, pred_col, test_path),
        test_outcome=optional(test_header, test_rows, outcome_col, test_path),
        test_threshold=optional(test_header, test_rows, threshold_col, test_path),
        test_group=optional_str(test_header, test_rows, group_col, test_path),
    )


def read_grouped_outcomes(path, outcome_col: str, group_col: str) -> dict:
    """Read per-group outcome lists from a training CSV."""
    header, rows = read_table(path)
    outcomes = numeric_column(header, rows, outcome_col, path)
    groups = string_column(header, rows, group_col, path)
    grouped: dict[str, list[float]] = {}
    for g, y in zip(groups, outcomes):
        grouped.setdefault(str(g), []).append(float(y))
    return {g: np.asarray(v) for g, v in grouped.items()}


def write_json_atomic(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def write_csv_atomic(path, fieldnames: list[str], records: list[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        for rec in records:
            writer.writerow(rec)
    os.replace(tmp, path)


def selection_payload(report: SelectionReport, config: dict) -> dict:
    """JSON document for one selection run, embedding the effective config."""
    payload = {
        "meta": {
            "method": report.method,
            "q": report.q,
            "seed": report.seed,
            "score": report.score,
            "threshold": report.threshold,
            "m": report.n_test,
            "n": report.n_calib,
            "warnings": list(report.warnings),
            "tie_diagnostics": report.tie_diagnostics,
            "version": __version__,
            "config": config,
        },
        "k_star": report.result.k_star,
        "tau_hat": report.result.tau_hat,
        "selected": [int(j) for j in report.result.selected],
        "units": [
            {
                "id": int(j),
                "p": float(report.p[j]),
                "v_hat": float(report.v_hat[j]),
                "c": float(report.c[j]),
            }
            for j in range(report.n_test)
        ],
    }
    if report.eval_metrics is not None:
        payload["metrics"] = asdict(report.eval_metrics)
    return payload


def asymptotic_payload(report: AsymptoticReport, config: dict) -> dict:
    payload = asdict(report)
    payload["meta"] = {"version": __version__, "config": config}
    return payload


MC_CSV_COLUMNS = [
    "setting", "score", "q", "sigma", "n", "m", "N",
    "fdr_mean", "fdr_se", "power_mean", "power_se", "nsel_mean",
]


def mc_records(reports: list[McReport]) -> list[dict]:
    return [row.as_record() for rep in reports for row in rep.rows]


def mc_payload(reports: list[McReport], config: dict) -> dict:
    return {
        "meta": {
            "version": __version__,
            "config": config,
            "warnings": [w for rep in reports for w in rep.warnings],
        },
        "rows": mc_records(reports),
    }


def plot_data_records(reports: list[McReport]) -> list[dict]:
    """Long-format records (one metric per row) for external figure tooling."""
    out = []
    for rec in mc_records(reports):
        for metric in ("fdr", "power", "nsel"):
            out.append(
                {
                    "setting": rec["setting"],
                    "score": rec["score"],
                    "q": rec["q"],
                    "sigma": rec["sigma"],
                    "n": rec["n"],
                    "m": rec["m"],
                    "N": rec["N"],
                    "metric": metric,
                    "value": rec[f"{metric}_mean"],
                    "se": rec.get(f"{metric}_se", ""),
                }
            )
    return out


PLOT_DATA_COLUMNS = [
    "setting", "score", "q", "sigma", "n", "m", "N", "metric", "value", "se",
]
