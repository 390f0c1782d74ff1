"""Known local-error-bound parameters for the catalogued problem classes."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ConfigurationError
from ..geometry import AllSpace, Box
from .losses import PIECEWISE_LINEAR, PIECEWISE_QUADRATIC
from .objective import Objective, StreamingGaussian


@dataclass(frozen=True)
class LebSpec:
    """dist(w, K*) <= c (F(w) - F*)^theta on the stated scope.

    ``c is None`` means the exponent is known but the constant is not; supply
    it yourself or estimate it with :func:`assg.oracle.measure_leb`.
    """

    theta: float
    c: float | None = None
    scope: str = "global"
    source: str = ""

    def __post_init__(self):
        if not 0.0 < self.theta <= 1.0:
            raise ConfigurationError(f"theta must lie in (0, 1], got {self.theta}")
        if self.c is not None and not self.c > 0:
            raise ConfigurationError(f"c must be positive, got {self.c}")

    @property
    def known(self):
        return True

    def with_c(self, c):
        return LebSpec(self.theta, float(c), self.scope, self.source)


@dataclass(frozen=True)
class UnknownLeb:
    """No catalogued LEB for this objective; the reason says why."""

    reason: str
    theta: None = None
    c: None = None

    @property
    def known(self):
        return False


def leb_catalog(obj: Objective) -> LebSpec | UnknownLeb:
    loss = obj.loss.kind
    reg = obj.regularizer.kind
    polyhedral_domain = isinstance(obj.domain, (AllSpace, Box))

    if (loss == "square" and reg == "none" and isinstance(obj.source, StreamingGaussian)
            and isinstance(obj.domain, AllSpace)):
        c = 1.0 / math.sqrt(obj.source.min_eigenvalue())
        return LebSpec(0.5, c, "global", "strongly convex expected square error")
    if not polyhedral_domain:
        return UnknownLeb(f"domain {obj.domain.to_dict()['kind']} is not polyhedral")
    if loss in PIECEWISE_LINEAR:
        if reg in ("none", "l1", "linf"):
            return LebSpec(1.0, None, "global", "polyhedral objective")
        if reg == "huber_norm":
            return LebSpec(0.5, None, "global", "piecewise convex quadratic objective")
    if loss in PIECEWISE_QUADRATIC and reg in ("none", "l1", "linf", "huber_norm"):
        return LebSpec(0.5, None, "global", "piecewise convex quadratic objective")
    return UnknownLeb(f"no catalogue entry for loss={loss}, regularizer={reg}")
