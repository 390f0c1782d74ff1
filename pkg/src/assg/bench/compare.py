"""Paired comparison of two solvers' traces at matched evaluation budgets."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from .traces import read_trace

GAP_FLOOR = 1e-16


@dataclass
class CompareReport:
    solver_a: str
    solver_b: str
    budgets: list
    median_gap_a: list
    median_gap_b: list
    win_rate: float
    win_rate_by_budget: list
    slope_budget_a: float
    slope_budget_b: float
    slope_stage_a: float
    slope_stage_b: float
    pairs: int
    notes: list = field(default_factory=list)

    def to_dict(self):
        return dict(self.__dict__)


def gap_at(rows, budget):
    """Gap of the last row whose cumulative evaluations do not exceed `budget`."""
    best = None
    for r in rows:
        if r.cumulative_evaluations <= budget:
            best = r.gap
        else:
            break
    return best


def loglog_slope(x, y, floor=GAP_FLOOR):
    x = np.asarray(x, float)
    y = np.maximum(np.asarray(y, float), floor)
    if len(x) < 2:
        return math.nan
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def stage_slope(gaps, floor=GAP_FLOOR):
    """Least-squares slope of log gap against stage index."""
    y = np.log(np.maximum(np.asarray(gaps, float), floor))
    if len(y) < 2:
        return math.nan
    return float(np.polyfit(np.arange(1, len(y) + 1), y, 1)[0])


def _load(dir_):
    d = Path(dir_)
    man = d / "manifest.json"
    if not man.is_file():
        raise ConfigurationError(f"{d}: no manifest.json; not a trace directory")
    manifest = json.loads(man.read_text(encoding="utf-8"))
    runs = {}
    for entry in manifest.get("runs", []):
        path = d / entry["file"]
        if path.is_file():
            runs.setdefault(entry["solver"], {})[entry["seed"]] = read_trace(path)
    if not runs:
        raise ConfigurationError(f"{d}: no traces found")
    return manifest, runs


def compare(trace_dir, solver_a, solver_b, other_dir=None, n_budgets=10) -> CompareReport:
    man_a, runs_a = _load(trace_dir)
    man_b, runs_b = (man_a, runs_a) if other_dir is None else _load(other_dir)
    if man_a["problem_fingerprint"] != man_b["problem_fingerprint"]:
        raise ConfigurationError("the two trace sets were produced on different problems")
    if solver_a not in runs_a:
        raise ConfigurationError(f"no traces for solver {solver_a!r}")
    if solver_b not in runs_b:
        raise ConfigurationError(f"no traces for solver {solver_b!r}")
    A, B = runs_a[solver_a], runs_b[solver_b]
    seeds = sorted(set(A) & set(B))
    if not seeds:
        raise ConfigurationError("the two solvers share no seeds")
    for s in seeds:
        if not A[s] or not B[s] or A[s][-1].gap is None or B[s][-1].gap is None:
            raise ConfigurationError("traces lack a gap column; rerun with a reference optimum")

    lo = max(max(A[s][0].cumulative_evaluations, B[s][0].cumulative_evaluations) for s in seeds)
    hi = min(min(A[s][-1].cumulative_evaluations, B[s][-1].cumulative_evaluations) for s in seeds)
    if hi < lo:
        raise ConfigurationError("the solvers' evaluation ranges do not overlap")
    budgets = sorted({int(b) for b in np.geomspace(lo, hi, n_budgets)} | {hi})

    med_a, med_b, wins = [], [], []
    for b in budgets:
        ga = np.array([gap_at(A[s], b) for s in seeds], dtype=float)
        gb = np.array([gap_at(B[s], b) for s in seeds], dtype=float)
        med_a.append(float(np.median(ga)))
        med_b.append(float(np.median(gb)))
        wins.append(float(np.mean(np.where(ga < gb, 1.0, np.where(ga == gb, 0.5, 0.0)))))

    def stage_slopes(runs):
        return float(np.median([stage_slope([r.gap for r in runs[s]]) for s in seeds]))

    notes = []
    if len(budgets) < 3:
        notes.append("fewer than three shared budgets; slopes are rough")
    return CompareReport(
        solver_a, solver_b, budgets, med_a, med_b, wins[-1], wins,
        loglog_slope(budgets, med_a), loglog_slope(budgets, med_b),
        stage_slopes(A), stage_slopes(B), len(seeds), notes,
    )


def format_report(rep: CompareReport) -> str:
    lines = [f"{rep.solver_a} vs {rep.solver_b} over {rep.pairs} paired seeds",
             f"{'budget':>12} {'median gap A':>14} {'median gap B':>14} {'win rate A':>10}"]
    for b, a, c, w in zip(rep.budgets, rep.median_gap_a, rep.median_gap_b,
                          rep.win_rate_by_budget):
        lines.append(f"{b:>12d} {a:>14.6g} {c:>14.6g} {w:>10.3f}")
    lines.append(f"win rate of A at the largest shared budget: {rep.win_rate:.3f}")
    lines.append(f"log-gap vs log-budget slope: A {rep.slope_budget_a:.4f}, "
                 f"B {rep.slope_budget_b:.4f}")
    lines.append(f"log-gap vs stage slope (median over runs): A {rep.slope_stage_a:.4f}, "
                 f"B {rep.slope_stage_b:.4f}")
    lines.extend(rep.notes)
    return "\n".join(lines)
