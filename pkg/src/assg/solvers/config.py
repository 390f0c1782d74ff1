"""Solver inputs and outputs."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ConfigurationError


@dataclass(frozen=True)
class AssgConfig:
    """Schedule inputs shared by the stage-wise solvers.

    Give either the LEB constant `c` (D1 and beta1 are then derived) or the
    region sizes `D1` / `beta1` directly.  `eps0` may be omitted when an
    initial-distance bound `B` is known, in which case eps0 = G·B.
    `desk_scale_factor` multiplies every derived inner iteration count;
    `t_override` is used verbatim.
    """

    eps: float
    eps0: float | None = None
    delta: float = 0.1
    G: float | None = None
    theta: float = 1.0
    c: float | None = None
    D1: float | None = None
    beta1: float | None = None
    B: float | None = None
    t_override: int | None = None
    K_override: int | None = None
    restarts: int | None = None
    seed: int = 0
    rho: float | None = None
    c_hat: float | None = None
    desk_scale_factor: float = 1.0
    w0: tuple | None = None
    f_star: float | None = None

    def __post_init__(self):
        if self.eps0 is None and self.B is None:
            raise ConfigurationError("eps0 is required unless an initial-distance bound B is given")
        if not self.eps > 0:
            raise ConfigurationError("eps must be positive")
        if self.eps0 is not None:
            if not self.eps0 > 0:
                raise ConfigurationError("eps0 must be positive")
            if self.eps > self.eps0:
                raise ConfigurationError(f"eps={self.eps} exceeds eps0={self.eps0}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigurationError("delta must lie in (0, 1)")
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigurationError("theta must lie in [0, 1]")
        for name in ("G", "c", "D1", "beta1", "B", "c_hat"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.rho is not None and self.rho < 0:
            raise ConfigurationError("rho must be nonnegative")
        for name in ("t_override", "K_override", "restarts"):
            v = getattr(self, name)
            if v is not None and (int(v) != v or v < 1):
                raise ConfigurationError(f"{name} must be a positive integer")
        if not self.desk_scale_factor > 0:
            raise ConfigurationError("desk_scale_factor must be positive")
        if self.w0 is not None:
            object.__setattr__(self, "w0", tuple(float(x) for x in np.ravel(self.w0)))

    def resolved_eps0(self, G):
        if self.eps0 is not None:
            return float(self.eps0)
        eps0 = G * self.B
        if self.eps > eps0:
            raise ConfigurationError(f"eps={self.eps} exceeds eps0=G*B={eps0}")
        return eps0

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass
class StageRecord:
    """One completed stage (or checkpoint, for plain SSG)."""

    k: int
    eta: float
    region: float | None
    t: int
    w: np.ndarray
    objective: float
    gap: float | None
    cumulative_evaluations: int
    call: int = 0
    region_kind: str = "D"
    objective_se: float = 0.0
    max_grad_norm: float = 0.0
    g_violations: int = 0
    max_dist: float = 0.0
    confinement_violations: int = 0
    wall_ms: float = 0.0


@dataclass
class RunResult:
    w: np.ndarray
    trace: list
    total_evaluations: int
    solver: str
    config: dict
    seed: int
    rng_algorithm: str
    schedule: dict = field(default_factory=dict)

    @property
    def g_violations(self):
        return sum(r.g_violations for r in self.trace)

    @property
    def confinement_violations(self):
        return sum(r.confinement_violations for r in self.trace)
