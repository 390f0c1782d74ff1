"""Stage-wise drivers: each stage runs an inner loop from the previous stage's
average, then halves the step size and the region size."""

from __future__ import annotations

import math
import time

import numpy as np

from ..errors import ConfigurationError, InvalidInputError
from ..geometry import project
from ..problems.objective import RNG_ALGORITHM, make_rng
from . import schedules as S
from .config import AssgConfig, RunResult, StageRecord
from .inner import SampleStream, inner_ball_ssg, prox_inner, prox_ssgs, ssgs


def _w0(config, obj):
    if config.w0 is None:
        return project(obj.domain, np.zeros(obj.dim))
    w0 = np.asarray(config.w0, dtype=float)
    if w0.shape != (obj.dim,):
        raise InvalidInputError(f"w0 has {w0.size} entries, expected {obj.dim}")
    if not obj.domain.contains(w0, tol=1e-12):
        raise InvalidInputError("w0 lies outside the domain")
    return w0


def _G(config, obj, prox):
    if config.G is not None:
        return float(config.G)
    if obj.mode == "composite" and not prox:
        return obj.G + obj.rho
    return obj.G


def _rho(config, obj):
    if obj.mode != "composite":
        raise ConfigurationError("proximal solvers need a composite objective")
    rho = obj.rho if config.rho is None else config.rho
    if rho is None:
        raise ConfigurationError("proximal solvers need rho")
    return float(rho)


def _stages(config, eps0):
    if config.K_override is not None:
        return int(config.K_override)
    return S.compute_stage_count(eps0, config.eps)


def _resolve_D1(config, eps0):
    if config.D1 is not None:
        return float(config.D1)
    if config.c is None:
        raise ConfigurationError(
            "neither D1 nor the LEB constant c is given; use rassg, which restarts "
            "with a growing D1 when c is unknown"
        )
    return S.derive_D1(config.c, eps0, config.eps, config.theta)


def _resolve_beta1(config, eps0):
    if config.beta1 is not None:
        return float(config.beta1)
    if config.c is None:
        raise ConfigurationError(
            "neither beta1 nor the LEB constant c is given; use rassg, which restarts "
            "with a growing region when c is unknown"
        )
    return S.derive_beta1(config.c, eps0, config.eps, config.theta)


def _t(config, derived):
    if config.t_override is not None:
        return int(config.t_override)
    return S.desk_scale(derived, config.desk_scale_factor)


def resolve_schedule(solver, config: AssgConfig, obj) -> dict:
    """The resolved (K, t, eta1, D1 or beta1, ...) a solver would use."""
    prox = solver in ("prox_assg_c", "prox_assg_r")
    G = _G(config, obj, prox)
    eps0 = config.resolved_eps0(G)
    K = _stages(config, eps0)
    dt = config.delta / K
    out = {"solver": solver, "K": K, "eps0": eps0, "G": G, "delta_tilde": dt,
           "desk_scale_factor": config.desk_scale_factor}
    if solver == "assg_c":
        D1 = _resolve_D1(config, eps0)
        out.update(D1=D1, eta1=eps0 / (3 * G**2),
                   t_formula=S.compute_t_assg_c(G, D1, eps0, dt))
    elif solver == "prox_assg_c":
        rho = _rho(config, obj)
        D1 = _resolve_D1(config, eps0)
        out.update(D1=D1, rho=rho, eta1=eps0 / (4 * G**2),
                   t_formula=S.compute_t_prox_assg(G, D1, eps0, rho, dt))
    elif solver in ("assg_r", "prox_assg_r"):
        rho = _rho(config, obj) if solver == "prox_assg_r" else 0.0
        beta1 = _resolve_beta1(config, eps0)
        out.update(beta1=beta1, rho=rho,
                   t_formula=S.compute_t_assg_r(G, beta1, eps0, dt, rho))
    elif solver == "assg_c_global":
        if config.c_hat is None:
            raise ConfigurationError("assg_c_global needs c_hat")
        eps_k = [eps0 / 2**k for k in range(K + 1)]
        t_k = [S.compute_t_global(G, config.c_hat, dt, eps_k[k]) for k in range(1, K + 1)]
        out.update(c_hat=config.c_hat, eta1=eps0 / (3 * G**2),
                   D_k=[S.global_region(config.c_hat, eps_k[k - 1]) for k in range(1, K + 1)],
                   t_formula=t_k, t_k=[_t(config, t) for t in t_k])
        return out
    elif solver in ("rassg", "rassg_theta_zero"):
        theta = 0.0 if solver == "rassg_theta_zero" else config.theta
        dh = config.delta / (K * (K + 1))
        if config.D1 is None:
            raise ConfigurationError("rassg needs the initial region size D1")
        D1 = float(config.D1)
        tf, df = S.rassg_growth(theta)
        restarts = config.restarts or S.rassg_restarts(eps0, config.eps)
        t1 = _t(config, S.compute_t_assg_c(G, D1, eps0, dh))
        ts, Ds = [t1], [D1]
        for _ in range(restarts - 1):
            ts.append(math.ceil(ts[-1] * tf))
            Ds.append(Ds[-1] * df)
        out.update(delta_hat=dh, theta=theta, eta1=eps0 / (3 * G**2), restarts=restarts,
                   t_factor=tf, D_factor=df, t_s=ts, D1_s=Ds)
        return out
    else:
        raise ConfigurationError(f"unknown solver {solver!r}")
    out["t"] = _t(config, out["t_formula"])
    return out


class _Driver:
    def __init__(self, name, config, obj, schedule, trace=None):
        self.name = name
        self.config = config
        self.obj = obj
        self.schedule = schedule
        self.rng = make_rng(config.seed)
        self.stream = SampleStream(obj, self.rng)
        self.evals = 0
        # a caller-owned list keeps the completed stages if a later one fails
        self.trace = [] if trace is None else trace
        self.start = time.perf_counter()

    def record(self, k, eta, region, kind, w, inner, call=0):
        self.evals += inner.evaluations
        val, se = self.obj.estimate(w)
        fs = self.config.f_star
        self.trace.append(StageRecord(
            k=k, eta=eta, region=region, t=inner.t, w=w.copy(), objective=val,
            gap=None if fs is None else val - fs, cumulative_evaluations=self.evals,
            call=call, region_kind=kind, objective_se=se,
            max_grad_norm=inner.max_grad_norm, g_violations=inner.g_violations,
            max_dist=inner.max_dist, confinement_violations=inner.confinement_violations,
            wall_ms=1000.0 * (time.perf_counter() - self.start),
        ))

    def result(self, w):
        return RunResult(w=w, trace=self.trace, total_evaluations=self.evals,
                         solver=self.name, config=self.config.to_dict(),
                         seed=self.config.seed, rng_algorithm=RNG_ALGORITHM,
                         schedule=self.schedule)


def _ball_stages(drv, w, K, eta, D, t, inner, call=0):
    for k in range(1, K + 1):
        w, tr = inner(drv.obj, w, D, eta, t, stream=drv.stream)
        drv.record(k, eta, D, "D", w, tr, call)
        eta /= 2.0
        D /= 2.0
    return w


def _reg_stages(drv, w, K, beta, t, inner):
    for k in range(1, K + 1):
        w, tr = inner(drv.obj, w, beta, t, stream=drv.stream)
        drv.record(k, 2.0 * beta, beta, "beta", w, tr)
        beta /= 2.0
    return w


def assg_c(config: AssgConfig, obj, *, trace=None) -> RunResult:
    """Stages of ball-constrained SSG with eta and D halved after each stage."""
    sch = resolve_schedule("assg_c", config, obj)
    drv = _Driver("assg_c", config, obj, sch, trace)
    w = _ball_stages(drv, _w0(config, obj), sch["K"], sch["eta1"], sch["D1"], sch["t"],
                     inner_ball_ssg)
    return drv.result(w)


def assg_r(config: AssgConfig, obj, *, trace=None) -> RunResult:
    """Stages of SSGS with beta halved after each stage."""
    sch = resolve_schedule("assg_r", config, obj)
    drv = _Driver("assg_r", config, obj, sch, trace)
    w = _reg_stages(drv, _w0(config, obj), sch["K"], sch["beta1"], sch["t"], ssgs)
    return drv.result(w)


def prox_assg_c(config: AssgConfig, obj, *, trace=None) -> RunResult:
    sch = resolve_schedule("prox_assg_c", config, obj)
    drv = _Driver("prox_assg_c", config, obj, sch, trace)
    w = _ball_stages(drv, _w0(config, obj), sch["K"], sch["eta1"], sch["D1"], sch["t"],
                     prox_inner)
    return drv.result(w)


def prox_assg_r(config: AssgConfig, obj, *, trace=None) -> RunResult:
    sch = resolve_schedule("prox_assg_r", config, obj)
    drv = _Driver("prox_assg_r", config, obj, sch, trace)
    rho = sch["rho"]

    def inner(o, w, beta, t, stream):
        return prox_ssgs(o, w, beta, t, rho=rho, stream=stream)

    w = _reg_stages(drv, _w0(config, obj), sch["K"], sch["beta1"], sch["t"], inner)
    return drv.result(w)


def assg_c_global(config: AssgConfig, obj, *, trace=None) -> RunResult:
    """Ball-constrained stages with D_k and t_k set from the global bound c_hat."""
    sch = resolve_schedule("assg_c_global", config, obj)
    drv = _Driver("assg_c_global", config, obj, sch, trace)
    w = _w0(config, obj)
    eta = sch["eta1"]
    for k in range(1, sch["K"] + 1):
        D = sch["D_k"][k - 1]
        w, tr = inner_ball_ssg(obj, w, D, eta, sch["t_k"][k - 1], stream=drv.stream)
        drv.record(k, eta, D, "D", w, tr)
        eta /= 2.0
    return drv.result(w)


def rassg(config: AssgConfig, obj, mode="known_theta", *, trace=None) -> RunResult:
    """Restarted ASSG-c: each call warm-starts from the last, with t and D1 grown."""
    if mode not in ("known_theta", "theta_zero"):
        raise ConfigurationError(f"unknown rassg mode {mode!r}")
    name = "rassg" if mode == "known_theta" else "rassg_theta_zero"
    sch = resolve_schedule(name, config, obj)
    drv = _Driver(name, config, obj, sch, trace)
    w = _w0(config, obj)
    for s in range(sch["restarts"]):
        w = _ball_stages(drv, w, sch["K"], sch["eta1"], sch["D1_s"][s], sch["t_s"][s],
                         inner_ball_ssg, call=s + 1)
    return drv.result(w)


SOLVERS = {
    "assg_c": assg_c,
    "assg_r": assg_r,
    "rassg": rassg,
    "rassg_theta_zero": lambda config, obj, **kw: rassg(config, obj, "theta_zero", **kw),
    "prox_assg_c": prox_assg_c,
    "prox_assg_r": prox_assg_r,
    "assg_c_global": assg_c_global,
}
