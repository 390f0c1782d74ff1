"""Inner loops: plain SSG, ball-constrained SSG, SSGS and their proximal forms.

Every loop shares one compiled kernel; they differ only in the update rule.
Calling two loops with the same seed consumes the random stream identically,
which is what makes the degenerate cases (huge ball, no regularizer)
reproduce each other bit for bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels as K
from ..errors import ConfigurationError, InvalidInputError, NumericalFailure
from ..geometry import MAX_DYKSTRA_ITERS, TOL_PROJ, TOL_PROX, AllSpace
from ..problems.objective import RNG_ALGORITHM, Dataset, make_rng
from .config import RunResult, StageRecord

BLOCK = 65_536


class SampleStream:
    """Draws sample indices (finite data) or fresh samples (streaming).

    Streaming draws are buffered in fixed blocks so the sequence does not
    depend on how callers slice their requests.
    """

    def __init__(self, obj, rng):
        self.obj = obj
        self.rng = rng
        self.finite = isinstance(obj.source, Dataset)
        self._X = None
        self._y = None
        self._pos = 0

    def take(self, m):
        if self.finite:
            return self.obj.source.X, self.obj.source.y, self.obj.source.draw(self.rng, m)
        parts_X, parts_y = [], []
        need = m
        while need > 0:
            if self._X is None or self._pos == self._X.shape[0]:
                self._X, self._y = self.obj.source.draw(self.rng, BLOCK)
                self._pos = 0
            k = min(need, self._X.shape[0] - self._pos)
            parts_X.append(self._X[self._pos:self._pos + k])
            parts_y.append(self._y[self._pos:self._pos + k])
            self._pos += k
            need -= k
        X = np.ascontiguousarray(np.concatenate(parts_X))
        y = np.concatenate(parts_y)
        return X, y, np.arange(m, dtype=np.int64)


@dataclass
class InnerTrace:
    """Diagnostics of one inner run."""

    t: int
    evaluations: int
    max_grad_norm: float
    g_violations: int
    max_dist: float
    confinement_violations: int = 0
    confinement_bound: float | None = None
    max_dykstra_iters: int = 0
    path: np.ndarray | None = field(default=None, repr=False)


def _start_point(obj, w):
    w = np.array(w, dtype=float, ndmin=1)
    if w.shape != (obj.dim,):
        raise InvalidInputError(f"expected a point in R^{obj.dim}, got shape {w.shape}")
    if not obj.domain.contains(w, tol=1e-12):
        raise InvalidInputError("starting point lies outside the domain")
    return w


def _rng(seed, rng):
    if rng is not None:
        return rng
    return make_rng(0 if seed is None else seed)


def _check_bound(obj, composite_split):
    """G to assert against: the loss part alone or loss plus regularizer."""
    if obj.mode == "composite" and not composite_split:
        return obj.G + obj.rho
    return obj.G


class _Loop:
    """State of one inner run, advanced block by block."""

    def __init__(self, obj, w1, update, *, eta=0.0, beta=0.0, radius=0.0,
                 rho=0.0, rng, record_path=False, total=0, stream=None):
        self.obj = obj
        self.update = update
        self.eta = float(eta)
        self.beta = float(beta)
        self.radius = float(radius)
        self.rho = float(rho)
        self.stream = stream if stream is not None else SampleStream(obj, rng)
        self.prox = update in (K.UPD_PROX_BALL, K.UPD_PROX_SSGS)
        if self.prox:
            if obj.mode != "composite":
                raise ConfigurationError("proximal solvers need a composite objective")
            if not isinstance(obj.domain, AllSpace):
                raise ConfigurationError("proximal solvers work on unconstrained problems")
        self.G = _check_bound(obj, self.prox)
        self.anchor = w1.copy()
        self.w = w1.copy()
        self.wsum = np.zeros_like(w1)
        self.stats = np.zeros(K.ST_SIZE)
        self.done = 0
        self.path = np.empty((total, obj.dim)) if record_path else None

    def advance(self, m):
        obj = self.obj
        code, lo, hi, dc, dr = obj.domain._packed()
        rcode, lam, rp = obj.regularizer._packed()
        while m > 0:
            b = min(m, BLOCK)
            X, y, idx = self.stream.take(b)
            path = (self.path[self.done:self.done + b] if self.path is not None
                    else np.empty((0, obj.dim)))
            status = K.run_block(X, y, idx, obj.loss.code, obj.loss.param, rcode, lam, rp,
                                 not self.prox, code, lo, hi, dc, dr,
                                 self.update, self.anchor, self.radius, self.eta, self.beta,
                                 self.rho, self.done, self.w, self.wsum, self.stats, self.G,
                                 TOL_PROJ, MAX_DYKSTRA_ITERS, TOL_PROX, path)
            if status != K.STATUS_OK:
                raise NumericalFailure("projection onto domain ∩ ball did not converge",
                                       self.w.copy())
            self.done += b
            m -= b

    def average(self):
        return self.wsum / self.done

    def trace(self):
        s = self.stats
        bound = None
        if self.update in (K.UPD_SSGS, K.UPD_PROX_SSGS):
            bound = 2.0 * self.beta * (s[K.ST_MAX_G] + self.rho)
        return InnerTrace(
            t=self.done, evaluations=self.done, max_grad_norm=float(s[K.ST_MAX_G]),
            g_violations=int(s[K.ST_G_VIOLATIONS]), max_dist=float(s[K.ST_MAX_DIST]),
            confinement_violations=int(s[K.ST_CONFINE_VIOLATIONS]),
            confinement_bound=bound, max_dykstra_iters=int(s[K.ST_MAX_DYKSTRA]),
            path=self.path,
        )


def _positive_int(t, name="t"):
    if int(t) != t or t < 1:
        raise ConfigurationError(f"{name} must be a positive integer, got {t}")
    return int(t)


def _run(obj, w1, update, t, rng, record_path, stream=None, **kw):
    t = _positive_int(t)
    loop = _Loop(obj, w1, update, rng=rng, record_path=record_path, total=t,
                 stream=stream, **kw)
    loop.advance(t)
    return loop.average(), loop.trace()


def inner_ball_ssg(obj, w1, D, eta, t, seed=None, *, rng=None, record_path=False,
                   stream=None):
    """t projected steps onto domain ∩ Ball(w1, D); returns (average, trace)."""
    if not D > 0:
        raise ConfigurationError("D must be positive")
    if not eta > 0:
        raise ConfigurationError("eta must be positive")
    w1 = _start_point(obj, w1)
    return _run(obj, w1, K.UPD_BALL, t, _rng(seed, rng), record_path, stream,
                eta=eta, radius=D)


def ssgs(obj, w1, beta, T, seed=None, *, rng=None, record_path=False, stream=None):
    """SSG on F(w) + ‖w − w1‖²/(2β) with step 2β/t; returns (average, trace)."""
    if not beta > 0:
        raise ConfigurationError("beta must be positive")
    w1 = _start_point(obj, w1)
    return _run(obj, w1, K.UPD_SSGS, T, _rng(seed, rng), record_path, stream, beta=beta)


def prox_inner(obj, w1, D, eta, t, seed=None, *, rng=None, record_path=False,
               stream=None):
    """t steps of the ball-constrained proximal update; returns (average, trace)."""
    if not D > 0:
        raise ConfigurationError("D must be positive")
    if not eta > 0:
        raise ConfigurationError("eta must be positive")
    w1 = _start_point(obj, w1)
    return _run(obj, w1, K.UPD_PROX_BALL, t, _rng(seed, rng), record_path, stream,
                eta=eta, radius=D, rho=obj.rho)


def prox_ssgs(obj, w1, beta, T, seed=None, *, rho=None, rng=None, record_path=False,
              stream=None):
    """Proximal SSGS: the SSGS drift followed by the prox of (2β/t)·R."""
    if not beta > 0:
        raise ConfigurationError("beta must be positive")
    w1 = _start_point(obj, w1)
    rho = obj.rho if rho is None else float(rho)
    return _run(obj, w1, K.UPD_PROX_SSGS, T, _rng(seed, rng), record_path, stream,
                beta=beta, rho=rho)


def checkpoints(T, count=20):
    """Log-spaced iteration counts ending at T."""
    pts = np.unique(np.round(np.geomspace(1, T, count)).astype(np.int64))
    return [int(p) for p in pts if 1 <= p <= T]


def ssg(obj, w0, T, eta=None, B=None, seed=0, *, G=None, f_star=None, n_checkpoints=20,
        record_path=False, trace=None):
    """Projected SSG with a constant step and uniform averaging.

    The step is `eta` if given, otherwise B/(G·sqrt(T)).  The trace holds the
    running average at log-spaced checkpoints.
    """
    T = _positive_int(T, "T")
    if eta is None:
        if B is None:
            raise ConfigurationError("give a step size eta or a distance bound B")
        if not B > 0:
            raise ConfigurationError("B must be positive")
        G = obj.G if G is None else G
        eta = B / (G * math.sqrt(T))
    if not (eta > 0 and math.isfinite(eta)):
        raise ConfigurationError(f"invalid step size {eta}")
    w0 = _start_point(obj, w0)
    rng = make_rng(seed)
    loop = _Loop(obj, w0, K.UPD_PLAIN, eta=eta, rng=rng, record_path=record_path, total=T)
    trace = [] if trace is None else trace
    start = time.perf_counter()
    last_viol = 0
    for i, cp in enumerate(checkpoints(T, n_checkpoints)):
        loop.advance(cp - loop.done)
        avg = loop.average()
        val, se = obj.estimate(avg)
        viol = int(loop.stats[K.ST_G_VIOLATIONS])
        trace.append(StageRecord(
            k=i + 1, eta=eta, region=B, t=cp, w=avg, objective=val,
            gap=None if f_star is None else val - f_star, cumulative_evaluations=cp,
            region_kind="B", objective_se=se,
            max_grad_norm=float(loop.stats[K.ST_MAX_G]), g_violations=viol - last_viol,
            max_dist=float(loop.stats[K.ST_MAX_DIST]),
            wall_ms=1000.0 * (time.perf_counter() - start),
        ))
        last_viol = viol
    config = {"T": T, "eta": eta, "seed": seed}
    if B is not None:
        config["B"] = B
    result = RunResult(w=loop.average(), trace=trace, total_evaluations=T, solver="ssg",
                       config=config, seed=seed, rng_algorithm=RNG_ALGORITHM,
                       schedule={"T": T, "eta": eta})
    if record_path:
        result.path = loop.path
    return result
