"""Run every (solver, replica) pair of an experiment and write its artifacts.

Layout of the output directory::

    traces/<run_id>.csv   one trace per run
    summary.csv           per-solver final-gap statistics
    manifest.json         config echo, resolved schedules, problem fingerprint
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__
from ..errors import AssgError, ConfigurationError
from ..geometry import domain_from_dict
from ..oracle import reference_optimum
from ..problems import (RNG_ALGORITHM, Objective, generate_synthetic, load_libsvm)
from ..problems.synthetic import loss_from_spec, regularizer_from_spec
from ..solvers import SOLVERS, AssgConfig, resolve_schedule, ssg
from .config import ExperimentConfig, LibsvmProblem, SolverSpec
from .traces import TraceRow, summarize, write_summary, write_trace


def build_objective(cfg: ExperimentConfig) -> Objective:
    p = cfg.problem
    if isinstance(p, LibsvmProblem):
        data = load_libsvm(p.libsvm)
        reg = regularizer_from_spec(p.regularizer.model_dump() if p.regularizer else None)
        domain = domain_from_dict(p.domain.model_dump(exclude_none=True), data.dim) \
            if p.domain else None
        return Objective(data, loss_from_spec(p.loss, p.loss_param), reg, mode=p.mode,
                         domain=domain, G=p.G, operating_radius=p.operating_radius,
                         name=p.name or Path(p.libsvm).stem)
    spec = p.model_dump(exclude_none=True, exclude={"data_seed"})
    return generate_synthetic(spec, p.data_seed)


def fingerprint(obj: Objective) -> str:
    """Hash of the problem description and its data."""
    h = hashlib.sha256(json.dumps(obj.describe(), sort_keys=True, default=_jsonable).encode())
    if obj.finite:
        h.update(np.ascontiguousarray(obj.source.X).tobytes())
        h.update(np.ascontiguousarray(obj.source.y).tobytes())
    else:
        h.update(obj.source.cov.tobytes())
        h.update(obj.source.w_true.tobytes())
    return h.hexdigest()


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"cannot serialize {type(x)}")


@dataclass(frozen=True)
class Reference:
    f_star: float | None
    gap_bound: float | None
    method: str


def resolve_reference(cfg: ExperimentConfig, obj: Objective) -> Reference:
    ref = cfg.reference
    if ref is None:
        return Reference(None, None, "none")
    if ref.kind == "analytic":
        if ref.f_star is not None:
            return Reference(ref.f_star, 0.0, "analytic")
        known = obj.known_optimum()
        if known is None:
            raise ConfigurationError("no analytic optimum is known for this problem; give f_star")
        return Reference(known[0], 0.0, "analytic")
    if not obj.finite:
        raise ConfigurationError("oracle references need a finite dataset")
    r = reference_optimum(obj, budget=ref.budget, tol=ref.tol)
    return Reference(r.f_star, r.gap_bound, r.method)


def assg_config(spec: SolverSpec, cfg: ExperimentConfig, seed: int, f_star) -> AssgConfig:
    desk = spec.desk_scale_factor if spec.desk_scale_factor is not None else cfg.desk_scale_factor
    return AssgConfig(
        eps=spec.eps, eps0=spec.eps0, delta=spec.delta, G=spec.G, theta=spec.theta, c=spec.c,
        D1=spec.D1, beta1=spec.beta1, B=spec.B, t_override=spec.t_override,
        K_override=spec.K_override, restarts=spec.restarts, seed=seed, rho=spec.rho,
        c_hat=spec.c_hat, desk_scale_factor=desk, w0=spec.w0, f_star=f_star,
    )


def schedule_for(spec: SolverSpec, cfg: ExperimentConfig, obj: Objective) -> dict:
    if spec.name == "ssg":
        G = spec.G if spec.G is not None else obj.G + (obj.rho if obj.mode == "composite" else 0)
        eta = spec.eta if spec.eta is not None else spec.B / (G * math.sqrt(spec.T))
        return {"solver": "ssg", "T": spec.T, "eta": eta, "B": spec.B, "G": G}
    return resolve_schedule(spec.name, assg_config(spec, cfg, cfg.seed, None), obj)


def run_id(spec: SolverSpec, replica: int) -> str:
    return f"{spec.run_label}-r{replica:03d}"


def _run_one(args):
    """Worker body; returns (run_id, rows, error message or None)."""
    cfg, obj, k, replica, f_star = args
    spec = cfg.solvers[k]
    seed = cfg.seed + replica
    trace = []
    error = None
    try:
        if spec.name == "ssg":
            w0 = spec.w0 if spec.w0 is not None else np.zeros(obj.dim)
            G = spec.G if spec.G is not None else None
            ssg(obj, w0, spec.T, eta=spec.eta, B=spec.B, seed=seed, G=G, f_star=f_star,
                trace=trace)
        else:
            SOLVERS[spec.name](assg_config(spec, cfg, seed, f_star), obj, trace=trace)
    except AssgError as e:
        error = f"{type(e).__name__}: {e}"
    rid = run_id(spec, replica)
    rows = [TraceRow(rid, spec.run_label, replica, i + 1, r.cumulative_evaluations,
                     r.objective, r.gap, r.wall_ms if cfg.record_wall_time else None, seed)
            for i, r in enumerate(trace)]
    return rid, rows, error


@dataclass
class RunOutcome:
    out_dir: Path
    runs: dict
    errors: list
    manifest: dict


def run_experiment(cfg: ExperimentConfig, out_dir, workers=None, log=None) -> RunOutcome:
    out_dir = Path(out_dir)
    obj = build_objective(cfg)
    # resolve every schedule before running anything so misconfiguration fails fast
    schedules = {s.run_label: schedule_for(s, cfg, obj) for s in cfg.solvers}
    ref = resolve_reference(cfg, obj)
    (out_dir / "traces").mkdir(parents=True, exist_ok=True)

    tasks = [(cfg, obj, k, i, ref.f_star) for k in range(len(cfg.solvers))
             for i in range(cfg.replicas)]
    workers = workers or cfg.workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]

    runs, errors, listing = {}, [], []
    for (c, _, k, i, _), (rid, rows, err) in zip(tasks, results):
        spec = cfg.solvers[k]
        write_trace(out_dir / "traces" / f"{rid}.csv", rows)
        runs.setdefault(spec.run_label, []).append(rows)
        listing.append({"run_id": rid, "solver": spec.run_label, "replica": i,
                        "seed": cfg.seed + i, "file": f"traces/{rid}.csv",
                        "status": "ok" if err is None else "failed"})
        if err is not None:
            errors.append(f"{rid}: {err}")
            if log:
                log(f"run {rid} failed: {err}")

    write_summary(out_dir / "summary.csv", summarize(runs))
    manifest = {
        "schema_version": cfg.schema_version,
        "package_version": __version__,
        "rng_algorithm": RNG_ALGORITHM,
        "problem": obj.describe(),
        "problem_fingerprint": fingerprint(obj),
        "reference": {"f_star": ref.f_star, "gap_bound": ref.gap_bound, "method": ref.method},
        "config": cfg.model_dump(mode="json", exclude={"out", "workers"}),
        "schedules": schedules,
        "runs": listing,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n",
        encoding="utf-8", newline="\n")
    return RunOutcome(out_dir, runs, errors, manifest)
