"""Seeded synthetic problem families for desk-scale experiments.

Every family is a deterministic function of (spec, seed).  The returned
objective carries a G computed as max feature norm times the loss slope bound
over the operating region, plus the regularizer bound in plain mode.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError
from ..geometry import domain_from_dict
from .losses import Loss, Regularizer
from .objective import Dataset, Objective, StreamingGaussian, make_rng

FAMILIES = (
    "separable_classification",
    "robust_regression",
    "least_squares",
    "streaming_gaussian_regression",
    "one_dim",
)

_COMMON = {"family", "loss", "loss_param", "regularizer", "mode", "domain", "G",
           "operating_radius", "mc_samples", "name"}
_PARAMS = {
    "separable_classification": {"n", "d", "margin"},
    "robust_regression": {"n", "d", "noise", "outlier_fraction"},
    "least_squares": {"n", "d", "noise"},
    "streaming_gaussian_regression": {"d", "cov", "noise"},
    "one_dim": {"kind", "delta"},
}
_DEFAULT_LOSS = {
    "separable_classification": "hinge",
    "robust_regression": "absolute",
    "least_squares": "square",
    "streaming_gaussian_regression": "square",
}


def regularizer_from_spec(spec) -> Regularizer:
    if spec is None:
        return Regularizer.none()
    if isinstance(spec, Regularizer):
        return spec
    return Regularizer(spec.get("kind", "none"), spec.get("lam", 0.0), spec.get("delta", 0.0))


def loss_from_spec(kind, param=None) -> Loss:
    if isinstance(kind, Loss):
        return kind
    if param is None:
        param = 1.0 if kind in ("huber", "eps_insensitive") else 0.0
    return Loss(kind, param)


def _planted(rng, d):
    w = rng.standard_normal(d)
    return w / np.linalg.norm(w)


def generate_synthetic(spec: dict, seed: int) -> Objective:
    """Build the objective described by ``spec`` (a dict with a ``family`` key)."""
    spec = dict(spec)
    family = spec.get("family")
    if family not in FAMILIES:
        raise ConfigurationError(f"unknown synthetic family {family!r}; expected one of {FAMILIES}")
    unknown = set(spec) - _COMMON - _PARAMS[family]
    if unknown:
        raise ConfigurationError(f"unknown keys for family {family}: {sorted(unknown)}")
    rng = make_rng(seed)

    if family == "one_dim":
        return _one_dim(spec)

    loss = loss_from_spec(spec.get("loss", _DEFAULT_LOSS[family]), spec.get("loss_param"))
    reg = regularizer_from_spec(spec.get("regularizer"))
    d = int(spec.get("d", 0))
    if d < 1:
        raise ConfigurationError("synthetic problems need d >= 1")

    if family == "streaming_gaussian_regression":
        cov = spec.get("cov", "identity")
        if isinstance(cov, str):
            if cov != "identity":
                raise ConfigurationError(f"unknown covariance {cov!r}")
            cov = np.eye(d)
        else:
            cov = np.asarray(cov, dtype=float)
            if cov.ndim == 1:
                cov = np.diag(cov)
        source = StreamingGaussian(cov, _planted(rng, d), float(spec.get("noise", 0.1)))
        radius = spec.get("operating_radius", 2.0)
    else:
        n = int(spec.get("n", 0))
        if n < 1:
            raise ConfigurationError("synthetic problems need n >= 1")
        w_bar = _planted(rng, d)
        X = rng.standard_normal((n, d))
        if family == "separable_classification":
            margin = float(spec.get("margin", 0.5))
            if margin < 0:
                raise ConfigurationError("margin must be nonnegative")
            s = X @ w_bar
            side = np.where(s >= 0, 1.0, -1.0)
            short = np.abs(s) < margin
            X[short] += ((side * margin - s)[short])[:, None] * w_bar[None, :]
            y = side
        elif family == "robust_regression":
            noise = float(spec.get("noise", 0.1))
            y = X @ w_bar + noise * rng.laplace(size=n)
            frac = float(spec.get("outlier_fraction", 0.0))
            k = int(round(frac * n))
            if k:
                which = rng.choice(n, size=k, replace=False)
                y[which] += 10.0 * rng.standard_normal(k)
        else:
            noise = float(spec.get("noise", 0.0))
            y = X @ w_bar + noise * rng.standard_normal(n)
        source = Dataset(X, y)
        radius = spec.get("operating_radius")
        if radius is None and loss.kind in ("square", "squared_hinge"):
            radius = 2.0 * float(np.linalg.norm(w_bar)) + 1.0

    domain = domain_from_dict(spec["domain"], d) if "domain" in spec else None
    return Objective(source, loss, reg, mode=spec.get("mode", "plain"), domain=domain,
                     G=spec.get("G"), operating_radius=radius,
                     mc_samples=int(spec.get("mc_samples", 100_000)),
                     eval_seed=int(seed), name=spec.get("name", family))


def _one_dim(spec):
    """Scalar test functions.

    ``abs``: F(w) = |w| from samples x in {0.5, 1.5} under the absolute loss,
    so the sampled slopes are noisy while the mean is exactly |w|.
    ``square``: F(w) = w².  ``huber``: F(w) = huber_δ(w).
    """
    kind = spec.get("kind", "abs")
    reg = regularizer_from_spec(spec.get("regularizer"))
    if kind == "abs":
        source = Dataset([[0.5], [1.5]], [0.0, 0.0])
        loss = Loss.absolute()
    elif kind == "square":
        source = Dataset([[1.0]], [0.0])
        loss = Loss.square()
    elif kind == "huber":
        source = Dataset([[1.0]], [0.0])
        loss = Loss.huber(float(spec.get("delta", 1.0)))
    else:
        raise ConfigurationError(f"unknown one_dim kind {kind!r}")
    domain = domain_from_dict(spec["domain"], 1) if "domain" in spec else None
    return Objective(source, loss, reg, mode=spec.get("mode", "plain"), domain=domain,
                     G=spec.get("G"), operating_radius=spec.get("operating_radius", 2.0),
                     name=spec.get("name", f"one_dim_{kind}"))
