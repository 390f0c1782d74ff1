"""Stochastic objectives F(w) = E[f(w; ξ)] (+ R(w)) and their sampling oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels as K
from ..errors import ConfigurationError, InvalidInputError
from ..geometry import AllSpace, BallSet, Box, Domain
from .losses import Loss, Regularizer, loss_value

RNG_ALGORITHM = "numpy.PCG64"
DEFAULT_MC_SAMPLES = 100_000


def make_rng(seed):
    """The package's seeded generator: numpy's PCG64 bit generator."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class Sample:
    features: np.ndarray
    label: float


class Dataset:
    """An immutable finite sample {(x_i, y_i)} with a common dimension."""

    def __init__(self, features, labels):
        X = np.array(features, dtype=float, ndmin=2)
        y = np.array(labels, dtype=float, ndmin=1)
        if X.shape[0] == 0:
            raise ConfigurationError("dataset is empty")
        if X.shape[0] != y.shape[0]:
            raise InvalidInputError("features and labels differ in length")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InvalidInputError("dataset has non-finite entries")
        X = np.ascontiguousarray(X)
        X.setflags(write=False)
        y.setflags(write=False)
        self.X = X
        self.y = y

    @classmethod
    def from_samples(cls, samples):
        samples = list(samples)
        if not samples:
            raise ConfigurationError("dataset is empty")
        dims = {np.size(s.features) for s in samples}
        if len(dims) != 1:
            raise InvalidInputError(f"samples disagree on dimension: {sorted(dims)}")
        return cls([s.features for s in samples], [s.label for s in samples])

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def dim(self):
        return self.X.shape[1]

    @property
    def samples(self):
        return [Sample(self.X[i].copy(), float(self.y[i])) for i in range(self.n)]

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.X, other.X) and np.array_equal(self.y, other.y)

    def __repr__(self):
        return f"Dataset(n={self.n}, dim={self.dim})"

    def draw(self, rng, size):
        """Sample indices uniformly; one uniform double is consumed per index."""
        idx = (rng.random(size) * self.n).astype(np.int64)
        np.minimum(idx, self.n - 1, out=idx)
        return idx


@dataclass(frozen=True, eq=False)
class StreamingGaussian:
    """x ~ N(0, cov), y = w_true·x + noise·N(0, 1), generated on demand."""

    cov: np.ndarray
    w_true: np.ndarray
    noise: float = 0.0
    _chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float, ndmin=2)
        w = np.array(self.w_true, dtype=float, ndmin=1)
        if cov.shape != (w.size, w.size):
            raise InvalidInputError("covariance shape does not match w_true")
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "w_true", w)
        object.__setattr__(self, "_chol", np.linalg.cholesky(cov))

    @property
    def dim(self):
        return self.w_true.size

    def draw(self, rng, size):
        Z = rng.standard_normal((size, self.dim))
        X = Z @ self._chol.T
        y = X @ self.w_true
        if self.noise > 0:
            y = y + self.noise * rng.standard_normal(size)
        return np.ascontiguousarray(X), y

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.cov)[0])

    def square_loss_value(self, w):
        r = np.asarray(w, float) - self.w_true
        return float(r @ self.cov @ r + self.noise ** 2)


@dataclass(frozen=True, eq=False)
class Objective:
    """F(w) = E_ξ[ℓ(w·x, y)] + R(w) restricted to `domain`.

    In ``plain`` mode the regularizer is part of every sampled subgradient and
    `G` bounds the whole thing; in ``composite`` mode samples cover the loss
    only, `G` bounds the loss part and `rho` bounds ‖∂R‖.
    """

    source: Dataset | StreamingGaussian
    loss: Loss
    regularizer: Regularizer = field(default_factory=Regularizer)
    mode: str = "plain"
    domain: Domain | None = None
    G: float | None = None
    rho: float | None = None
    operating_radius: float | None = None
    mc_samples: int = DEFAULT_MC_SAMPLES
    eval_seed: int = 0
    name: str = ""

    def __post_init__(self):
        if self.mode not in ("plain", "composite"):
            raise ConfigurationError(f"unknown objective mode {self.mode!r}")
        if isinstance(self.source, Dataset) and self.source.n == 0:
            raise ConfigurationError("dataset is empty")
        if self.domain is None:
            object.__setattr__(self, "domain", AllSpace(self.dim))
        if self.domain.dim != self.dim:
            raise InvalidInputError("domain dimension differs from data dimension")
        rho = self.regularizer.subgrad_bound(self.dim) if self.rho is None else float(self.rho)
        object.__setattr__(self, "rho", rho)
        if self.G is None:
            g = self._default_loss_G()
            if self.mode == "plain":
                g += rho
            object.__setattr__(self, "G", g)
        if not (math.isfinite(self.G) and self.G > 0):
            raise ConfigurationError(f"G must be positive and finite, got {self.G}")

    @property
    def dim(self):
        return self.source.dim

    @property
    def finite(self):
        return isinstance(self.source, Dataset)

    def _radius(self):
        if self.operating_radius is not None:
            return float(self.operating_radius)
        if isinstance(self.domain, BallSet):
            return float(np.linalg.norm(self.domain.ball.center) + self.domain.ball.radius)
        if isinstance(self.domain, Box):
            return float(np.linalg.norm(np.maximum(abs(self.domain.lower), abs(self.domain.upper))))
        return None

    def _default_loss_G(self):
        # max feature norm times the loss slope bound on the operating region
        if self.finite:
            xmax = float(np.max(np.linalg.norm(self.source.X, axis=1)))
            ymax = float(np.max(np.abs(self.source.y)))
        else:
            pilot_X, pilot_y = self.source.draw(make_rng(self.eval_seed + 1), 10_000)
            xmax = float(np.quantile(np.linalg.norm(pilot_X, axis=1), 0.999))
            ymax = float(np.quantile(np.abs(pilot_y), 0.999))
        r = self._radius()
        zmax = None if r is None else xmax * r
        slope = self.loss.slope_bound(zmax, ymax)
        if not math.isfinite(slope):
            raise ConfigurationError(
                f"{self.loss.kind} loss has unbounded slope: give G or an operating radius"
            )
        return xmax * slope

    def replace(self, **changes):
        kw = dict(source=self.source, loss=self.loss, regularizer=self.regularizer,
                  mode=self.mode, domain=self.domain, G=None, rho=None,
                  operating_radius=self.operating_radius, mc_samples=self.mc_samples,
                  eval_seed=self.eval_seed, name=self.name)
        kw.update(changes)
        return Objective(**kw)

    # -- deterministic evaluations --------------------------------------

    def values(self, W):
        """F at each row of W (finite sources only)."""
        if not self.finite:
            raise ConfigurationError("batch evaluation needs a finite dataset")
        W = np.ascontiguousarray(np.atleast_2d(np.asarray(W, dtype=float)))
        out = np.empty(W.shape[0])
        code, lam, p = self.regularizer._packed()
        K.batch_values(self.source.X, self.source.y, self.loss.code, self.loss.param,
                       code, lam, p, W, out)
        return out

    def subgrads(self, W):
        """A full subgradient of F at each row of W (finite sources only)."""
        if not self.finite:
            raise ConfigurationError("batch evaluation needs a finite dataset")
        W = np.ascontiguousarray(np.atleast_2d(np.asarray(W, dtype=float)))
        out = np.empty_like(W)
        code, lam, p = self.regularizer._packed()
        K.batch_subgrads(self.source.X, self.source.y, self.loss.code, self.loss.param,
                         code, lam, p, W, out)
        return out

    def estimate(self, w):
        """(value, standard error); exact with zero error for finite sources."""
        w = _check_point(self, w)
        if self.finite:
            return float(self.values(w[None, :])[0]), 0.0
        rng = make_rng(self.eval_seed)
        total = 0.0
        total_sq = 0.0
        left = self.mc_samples
        while left > 0:
            m = min(left, 20_000)
            X, y = self.source.draw(rng, m)
            v = loss_value(self.loss, X @ w, y)
            total += float(v.sum())
            total_sq += float((v * v).sum())
            left -= m
        n = self.mc_samples
        mean = total / n
        var = max(total_sq / n - mean * mean, 0.0)
        return mean + self.regularizer.value(w), math.sqrt(var / n)

    def known_optimum(self):
        """(F*, w*) when the construction determines them, else None."""
        if (isinstance(self.source, StreamingGaussian) and self.loss.kind == "square"
                and self.regularizer.kind == "none"
                and self.domain.contains(self.source.w_true)):
            return self.source.noise ** 2, self.source.w_true.copy()
        return None

    def describe(self):
        src = ({"kind": "finite", "n": self.source.n, "dim": self.dim} if self.finite
               else {"kind": "streaming_gaussian", "dim": self.dim,
                     "noise": self.source.noise, "mc_samples": self.mc_samples})
        return {"name": self.name, "source": src, "loss": self.loss.to_dict(),
                "regularizer": self.regularizer.to_dict(), "mode": self.mode,
                "domain": self.domain.to_dict(), "G": self.G, "rho": self.rho}


def _check_point(obj, w):
    w = np.array(w, dtype=float, ndmin=1)
    if w.shape != (obj.dim,):
        raise InvalidInputError(f"expected a point in R^{obj.dim}, got shape {w.shape}")
    return w


def stochastic_subgrad(obj: Objective, w, rng):
    """(∂f(w; ξ), rng) for one fresh draw ξ.

    `rng` is a numpy Generator; it is advanced in place and handed back so a
    caller can thread the state explicitly.  Plain-mode objectives include a
    subgradient of the regularizer.
    """
    w = _check_point(obj, w)
    if obj.finite:
        j = int(obj.source.draw(rng, 1)[0])
        x, y = obj.source.X[j], obj.source.y[j]
    else:
        X, Y = obj.source.draw(rng, 1)
        x, y = X[0], Y[0]
    g = K.loss_slope(obj.loss.code, obj.loss.param, float(x @ w), float(y)) * x
    if obj.mode == "plain":
        g = g + obj.regularizer.subgrad(w)
    return g, rng


def full_objective(obj: Objective, w) -> float:
    """F(w): exact for finite data, a fixed-seed Monte-Carlo mean for streams."""
    return obj.estimate(w)[0]


def full_subgrad(obj: Objective, w) -> np.ndarray:
    w = _check_point(obj, w)
    return obj.subgrads(w[None, :])[0]
