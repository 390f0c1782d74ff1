"""Feasible sets, Euclidean projections and ball-constrained proximal maps.

All functions are pure: they never modify their inputs and return new arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import ConfigurationError, InvalidInputError, NumericalFailure

TOL_PROJ = 1e-10
MAX_DYKSTRA_ITERS = 10_000
TOL_PROX = 1e-10


def _vec(x, name="point"):
    a = np.array(x, dtype=float, ndmin=1)
    if a.ndim != 1:
        raise InvalidInputError(f"{name} must be a vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class Ball:
    """Euclidean ball B(center, radius)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius >= 0:
            raise InvalidInputError(f"ball radius must be >= 0, got {self.radius}")

    @property
    def dim(self):
        return self.center.shape[0]

    def contains(self, point, tol=0.0):
        return float(np.linalg.norm(_vec(point) - self.center)) <= self.radius + tol


class Domain:
    """A nonempty closed convex feasible set in R^d."""

    dim: int

    def _packed(self):
        """(code, lower, upper, center, radius) for the compiled kernels."""
        raise NotImplementedError

    def contains(self, point, tol=0.0):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class AllSpace(Domain):
    dim: int

    def __post_init__(self):
        if int(self.dim) < 1:
            raise InvalidInputError("dimension must be positive")
        object.__setattr__(self, "dim", int(self.dim))

    def _packed(self):
        z = np.zeros(self.dim)
        return K.DOM_ALL, z, z, z, 0.0

    def contains(self, point, tol=0.0):
        return True

    def to_dict(self):
        return {"kind": "all_space", "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Box(Domain):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = _vec(self.lower, "lower")
        hi = _vec(self.upper, "upper")
        if lo.shape != hi.shape:
            raise InvalidInputError("box bounds differ in dimension")
        if np.any(lo > hi):
            raise InvalidInputError("box requires lower <= upper elementwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.shape[0]

    def _packed(self):
        return K.DOM_BOX, self.lower, self.upper, np.zeros(self.dim), 0.0

    def contains(self, point, tol=0.0):
        p = _vec(point)
        return bool(np.all(p >= self.lower - tol) and np.all(p <= self.upper + tol))

    def to_dict(self):
        return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True, eq=False)
class BallSet(Domain):
    ball: Ball

    @property
    def dim(self):
        return self.ball.dim

    def _packed(self):
        z = np.zeros(self.dim)
        return K.DOM_BALL, z, z, self.ball.center, self.ball.radius

    def contains(self, point, tol=0.0):
        return self.ball.contains(point, tol)

    def to_dict(self):
        return {"kind": "ball", "center": self.ball.center.tolist(), "radius": self.ball.radius}


def _check_dim(domain_dim, p):
    if p.shape[0] != domain_dim:
        raise InvalidInputError(
            f"dimension mismatch: point has {p.shape[0]} entries, set lives in R^{domain_dim}"
        )


def project(domain: Domain, point) -> np.ndarray:
    """Euclidean projection of `point` onto `domain`."""
    p = _vec(point)
    _check_dim(domain.dim, p)
    code, lo, hi, c, r = domain._packed()
    out = np.empty_like(p)
    K.project_domain(code, lo, hi, c, r, p, out)
    return out


def project_intersection(base: Domain, ball: Ball, point, tol=TOL_PROJ,
                         max_iter=MAX_DYKSTRA_ITERS) -> np.ndarray:
    """Project onto ``base ∩ ball``.

    Closed form when ``base`` is all of space or a ball concentric with
    ``ball``; Dykstra's alternating projections otherwise, stopped once the
    iterate moves less than `tol`.  The ball center is assumed to lie in
    ``base``; the solvers guarantee this by centering on a feasible iterate.
    """
    p = _vec(point)
    _check_dim(base.dim, p)
    _check_dim(ball.dim, p)
    code, lo, hi, c, r = base._packed()
    out = np.empty_like(p)
    used = K.project_intersection(code, lo, hi, c, r, ball.center, ball.radius, p,
                                  out, tol, max_iter)
    if used < 0:
        raise NumericalFailure(
            f"Dykstra projection did not converge in {max_iter} iterations", out
        )
    return out


def soft_threshold(v, tau) -> np.ndarray:
    """Elementwise sign(v) * max(|v| - tau, 0)."""
    if tau < 0:
        raise InvalidInputError("threshold must be nonnegative")
    x = _vec(v, "v")
    out = np.empty_like(x)
    K.soft_threshold(x, float(tau), out)
    return out


def project_l1_ball(v, radius) -> np.ndarray:
    x = _vec(v, "v")
    out = np.empty_like(x)
    K.project_l1_ball(x, float(radius), out)
    return out


def prox_reg_ball(reg, eta, ball: Ball, point, tol=TOL_PROX) -> np.ndarray:
    """argmin over u in `ball` of ½‖u − point‖² + eta·R(u).

    `reg` is a :class:`assg.problems.Regularizer`.  Solved through the KKT
    conditions of the ball constraint by bisection on its multiplier.
    """
    if eta <= 0:
        raise InvalidInputError("eta must be positive")
    if not getattr(reg, "prox_capable", False):
        raise ConfigurationError(f"regularizer {reg!r} has no proximal map")
    p = _vec(point)
    _check_dim(ball.dim, p)
    code, lam, param = reg._packed()
    out = np.empty_like(p)
    K.prox_reg_ball(code, lam, param, float(eta), ball.center, ball.radius, p, out, tol)
    return out


def prox_reg(reg, eta, point) -> np.ndarray:
    """Unconstrained proximal map of eta·R."""
    if eta <= 0:
        raise InvalidInputError("eta must be positive")
    if not getattr(reg, "prox_capable", False):
        raise ConfigurationError(f"regularizer {reg!r} has no proximal map")
    p = _vec(point)
    code, lam, param = reg._packed()
    out = np.empty_like(p)
    K.prox_reg(code, lam, param, float(eta), p, out)
    return out


def domain_from_dict(spec: dict, dim: int) -> Domain:
    kind = spec.get("kind", "all_space")
    if kind == "all_space":
        return AllSpace(dim)
    if kind == "box":
        lo = np.broadcast_to(np.asarray(spec["lower"], dtype=float), (dim,))
        hi = np.broadcast_to(np.asarray(spec["upper"], dtype=float), (dim,))
        return Box(lo, hi)
    if kind == "ball":
        return BallSet(Ball(spec.get("center", np.zeros(dim)), spec["radius"]))
    raise ConfigurationError(f"unknown domain kind {kind!r}")
