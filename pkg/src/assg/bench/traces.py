"""Trace and summary CSV files (UTF-8, LF line endings, '.' decimal point)."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TRACE_COLUMNS = ("run_id", "solver", "replica", "stage", "cumulative_evaluations",
                 "objective", "gap", "wall_ms", "seed")
SUMMARY_COLUMNS = ("solver", "replicas", "median_final_gap", "gap_q25", "gap_q75",
                   "iqr_final_gap", "median_final_objective", "median_evaluations",
                   "total_evaluations")


@dataclass(frozen=True)
class TraceRow:
    run_id: str
    solver: str
    replica: int
    stage: int
    cumulative_evaluations: int
    objective: float
    gap: float | None
    wall_ms: float | None
    seed: int


def _num(x):
    return "" if x is None else repr(float(x))


def format_rows(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in rows:
        w.writerow([r.run_id, r.solver, r.replica, r.stage, r.cumulative_evaluations,
                    _num(r.objective), _num(r.gap), _num(r.wall_ms), r.seed])
    return buf.getvalue()


def write_trace(path, rows) -> None:
    Path(path).write_text(format_rows(rows), encoding="utf-8", newline="\n")


def _opt(s):
    return None if s == "" else float(s)


def parse_rows(text: str) -> list:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != TRACE_COLUMNS:
        raise ValueError(f"unexpected trace header {header}")
    return [TraceRow(r[0], r[1], int(r[2]), int(r[3]), int(r[4]), float(r[5]), _opt(r[6]),
                     _opt(r[7]), int(r[8])) for r in reader]


def read_trace(path) -> list:
    return parse_rows(Path(path).read_text(encoding="utf-8"))


def summarize(runs) -> list:
    """One summary row per solver from {solver: [list of TraceRow per run]}."""
    out = []
    for solver, traces in runs.items():
        finals = [t[-1] for t in traces if t]
        gaps = np.array([r.gap for r in finals if r.gap is not None], dtype=float)
        objs = np.array([r.objective for r in finals], dtype=float)
        evals = np.array([r.cumulative_evaluations for r in finals], dtype=float)
        row = {"solver": solver, "replicas": len(traces)}
        if len(gaps):
            q25, med, q75 = np.percentile(gaps, [25, 50, 75])
            row.update(median_final_gap=med, gap_q25=q25, gap_q75=q75, iqr_final_gap=q75 - q25)
        row["median_final_objective"] = float(np.median(objs)) if len(objs) else None
        row["median_evaluations"] = int(np.median(evals)) if len(evals) else 0
        row["total_evaluations"] = int(evals.sum())
        out.append(row)
    return out


def write_summary(path, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in rows:
        w.writerow([r["solver"], r["replicas"], _num(r.get("median_final_gap")),
                    _num(r.get("gap_q25")), _num(r.get("gap_q75")),
                    _num(r.get("iqr_final_gap")), _num(r.get("median_final_objective")),
                    r["median_evaluations"], r["total_evaluations"]])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="\n")
