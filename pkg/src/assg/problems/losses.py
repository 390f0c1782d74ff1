"""Scalar losses l(z, y) and norm-type regularizers R(w)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import _kernels as K
from ..errors import ConfigurationError

_LOSS_CODES = {
    "hinge": K.HINGE,
    "absolute": K.ABSOLUTE,
    "eps_insensitive": K.EPS_INSENSITIVE,
    "huber": K.HUBER,
    "squared_hinge": K.SQUARED_HINGE,
    "square": K.SQUARE,
}
# generalized hinge has the same polyhedral structure as hinge
_LOSS_ALIASES = {"generalized_hinge": "hinge"}

PIECEWISE_LINEAR = frozenset({"hinge", "absolute", "eps_insensitive"})
PIECEWISE_QUADRATIC = frozenset({"huber", "squared_hinge", "square"})


@dataclass(frozen=True)
class Loss:
    """A loss l(z, y) of the prediction z = w·x and the label y.

    `param` is the insensitivity width for ``eps_insensitive`` and the
    threshold δ for ``huber``; other kinds ignore it.
    """

    kind: str
    param: float = 0.0

    def __post_init__(self):
        kind = _LOSS_ALIASES.get(self.kind, self.kind)
        if kind not in _LOSS_CODES:
            raise ConfigurationError(f"unknown loss {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        param = float(self.param)
        if kind in ("eps_insensitive", "huber") and not param > 0:
            raise ConfigurationError(f"{kind} loss needs a positive parameter")
        object.__setattr__(self, "param", param)

    @classmethod
    def hinge(cls):
        return cls("hinge")

    @classmethod
    def absolute(cls):
        return cls("absolute")

    @classmethod
    def eps_insensitive(cls, width):
        return cls("eps_insensitive", width)

    @classmethod
    def huber(cls, delta):
        return cls("huber", delta)

    @classmethod
    def squared_hinge(cls):
        return cls("squared_hinge")

    @classmethod
    def square(cls):
        return cls("square")

    @property
    def code(self):
        return _LOSS_CODES[self.kind]

    def slope_bound(self, zmax=None, ymax=None):
        """Upper bound on |dl/dz|; needs |z| and |y| bounds for unbounded slopes."""
        if self.kind in ("hinge",):
            return 1.0 if ymax is None else max(1.0, float(ymax))
        if self.kind in ("absolute", "eps_insensitive"):
            return 1.0
        if self.kind == "huber":
            return self.param
        if zmax is None or ymax is None:
            return math.inf
        if self.kind == "squared_hinge":
            return 2.0 * ymax * (1.0 + ymax * zmax)
        return 2.0 * (zmax + ymax)

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind in ("eps_insensitive", "huber"):
            d["param"] = self.param
        return d


def loss_value(loss: Loss, z, y):
    """l(z, y), elementwise over arrays."""
    if np.ndim(z) == 0 and np.ndim(y) == 0:
        return K.loss_value(loss.code, loss.param, float(z), float(y))
    z, y = np.broadcast_arrays(np.asarray(z, float), np.asarray(y, float))
    out = np.empty(z.size)
    K.loss_value_array(loss.code, loss.param, z.ravel().copy(), y.ravel().copy(), out)
    return out.reshape(z.shape)


def loss_subgrad(loss: Loss, z, y):
    """A subgradient of z -> l(z, y); the flat branch is taken at kinks."""
    if np.ndim(z) == 0 and np.ndim(y) == 0:
        return K.loss_slope(loss.code, loss.param, float(z), float(y))
    z, y = np.broadcast_arrays(np.asarray(z, float), np.asarray(y, float))
    out = np.empty(z.size)
    K.loss_slope_array(loss.code, loss.param, z.ravel().copy(), y.ravel().copy(), out)
    return out.reshape(z.shape)


_REG_CODES = {"none": K.REG_NONE, "l1": K.REG_L1, "linf": K.REG_LINF,
              "huber_norm": K.REG_HUBER}


@dataclass(frozen=True)
class Regularizer:
    """R(w) = lam·‖w‖₁, lam·‖w‖∞, lam·Σ huber_δ(w_i), or zero."""

    kind: str = "none"
    lam: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in _REG_CODES:
            raise ConfigurationError(f"unknown regularizer {self.kind!r}")
        lam = float(self.lam)
        if lam < 0:
            raise ConfigurationError("regularization weight must be >= 0")
        object.__setattr__(self, "lam", lam)
        delta = float(self.delta)
        if self.kind == "huber_norm" and not delta > 0:
            raise ConfigurationError("huber_norm regularizer needs delta > 0")
        object.__setattr__(self, "delta", delta)

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def l1(cls, lam):
        return cls("l1", lam)

    @classmethod
    def linf(cls, lam):
        return cls("linf", lam)

    @classmethod
    def huber_norm(cls, lam, delta):
        return cls("huber_norm", lam, delta)

    @property
    def prox_capable(self):
        return True

    def _packed(self):
        return _REG_CODES[self.kind], self.lam, self.delta

    def value(self, w):
        code, lam, p = self._packed()
        return K.reg_value(code, lam, p, np.asarray(w, dtype=float))

    def subgrad(self, w):
        w = np.asarray(w, dtype=float)
        g = np.zeros_like(w)
        code, lam, p = self._packed()
        K.reg_subgrad_add(code, lam, p, w, g)
        return g

    def subgrad_bound(self, dim):
        """Bound on ‖∂R(w)‖ valid for every w in R^dim."""
        if self.kind == "none":
            return 0.0
        if self.kind == "l1":
            return self.lam * math.sqrt(dim)
        if self.kind == "linf":
            return self.lam
        return self.lam * self.delta * math.sqrt(dim)

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind != "none":
            d["lam"] = self.lam
        if self.kind == "huber_norm":
            d["delta"] = self.delta
        return d
