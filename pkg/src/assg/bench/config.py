"""Experiment config files: versioned JSON, unknown keys rejected.

Schema errors carry the line of the offending key so they can be fixed
without hunting through the file.
"""

from __future__ import annotations

import json
from json.decoder import scanstring
from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import ConfigurationError, ParseError

SCHEMA_VERSION = 1
SOLVER_NAMES = ("ssg", "assg_c", "assg_r", "rassg", "rassg_theta_zero", "prox_assg_c",
                "prox_assg_r", "assg_c_global")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class RegularizerSpec(_Strict):
    kind: Literal["none", "l1", "linf", "huber_norm"] = "none"
    lam: float = 0.0
    delta: float = 0.0


class DomainSpec(_Strict):
    kind: Literal["all_space", "box", "ball"] = "all_space"
    lower: Union[float, list[float], None] = None
    upper: Union[float, list[float], None] = None
    center: Union[list[float], None] = None
    radius: Union[float, None] = None


class SyntheticProblem(_Strict):
    family: Literal["separable_classification", "robust_regression", "least_squares",
                    "streaming_gaussian_regression", "one_dim"]
    n: int | None = None
    d: int | None = None
    margin: float | None = None
    noise: float | None = None
    outlier_fraction: float | None = None
    cov: Union[str, list[float], list[list[float]], None] = None
    kind: str | None = None
    delta: float | None = None
    loss: str | None = None
    loss_param: float | None = None
    regularizer: RegularizerSpec | None = None
    mode: Literal["plain", "composite"] | None = None
    domain: DomainSpec | None = None
    G: float | None = None
    operating_radius: float | None = None
    mc_samples: int | None = None
    name: str | None = None
    data_seed: int = 0


class LibsvmProblem(_Strict):
    libsvm: str
    loss: str = "hinge"
    loss_param: float | None = None
    regularizer: RegularizerSpec | None = None
    mode: Literal["plain", "composite"] = "plain"
    domain: DomainSpec | None = None
    G: float | None = None
    operating_radius: float | None = None
    name: str | None = None


class SolverSpec(_Strict):
    name: Literal[SOLVER_NAMES]
    label: str | None = None
    eps0: float | None = None
    eps: float | None = None
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
    rho: float | None = None
    c_hat: float | None = None
    desk_scale_factor: float | None = None
    w0: list[float] | None = None
    T: int | None = None
    eta: float | None = None

    @model_validator(mode="after")
    def _needs(self):
        if self.name == "ssg":
            if self.T is None:
                raise ValueError("ssg needs T")
            if self.eta is None and self.B is None:
                raise ValueError("ssg needs eta or B")
        elif self.eps is None:
            raise ValueError(f"{self.name} needs eps")
        return self

    @property
    def run_label(self):
        return self.label or self.name


class ReferenceSpec(_Strict):
    kind: Literal["oracle", "analytic"] = "oracle"
    budget: int = Field(2_000_000, ge=1)
    tol: float = Field(1e-9, gt=0)
    f_star: float | None = None


class ExperimentConfig(_Strict):
    schema_version: Literal[1]
    problem: Union[SyntheticProblem, LibsvmProblem]
    solvers: list[SolverSpec] = Field(min_length=1)
    replicas: int = Field(1, ge=1)
    seed: int = 0
    out: str | None = None
    desk_scale_factor: float = Field(1.0, gt=0)
    workers: int = Field(1, ge=1)
    reference: ReferenceSpec | None = None
    record_wall_time: bool = False

    @model_validator(mode="after")
    def _unique_labels(self):
        labels = [s.run_label for s in self.solvers]
        dup = {x for x in labels if labels.count(x) > 1}
        if dup:
            raise ValueError(f"duplicate solver labels {sorted(dup)}; set 'label'")
        return self


# -- line lookup -------------------------------------------------------------


def _line_of(text, pos):
    return text.count("\n", 0, pos) + 1


def _skip_ws(text, i):
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def _index(text, i, path, table):
    """Record the line where each JSON path starts; returns the end offset."""
    i = _skip_ws(text, i)
    table[path] = _line_of(text, i)
    ch = text[i]
    if ch == "{":
        i = _skip_ws(text, i + 1)
        if text[i] == "}":
            return i + 1
        while True:
            i = _skip_ws(text, i)
            key_line = _line_of(text, i)
            key, i = scanstring(text, i + 1)
            i = _skip_ws(text, i) + 1  # colon
            i = _index(text, i, path + (key,), table)
            table[path + (key,)] = key_line
            i = _skip_ws(text, i)
            if text[i] == "}":
                return i + 1
            i += 1
    if ch == "[":
        i = _skip_ws(text, i + 1)
        if text[i] == "]":
            return i + 1
        k = 0
        while True:
            i = _index(text, i, path + (k,), table)
            i = _skip_ws(text, i)
            k += 1
            if text[i] == "]":
                return i + 1
            i += 1
    if ch == '"':
        return scanstring(text, i + 1)[1]
    _, end = json.JSONDecoder().raw_decode(text, i)
    return end


def _locate(table, loc):
    """Deepest recorded path that prefixes `loc`."""
    path = ()
    for part in loc:
        if path + (part,) in table:
            path = path + (part,)
        elif isinstance(part, str) and part in ("SyntheticProblem", "LibsvmProblem"):
            continue
        else:
            break
    return table.get(path, 1)


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text; raises ParseError with the offending line."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", e.lineno) from None
    if not isinstance(raw, dict):
        raise ParseError("config must be a JSON object", 1)
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        table = {}
        _index(text, 0, (), table)
        err = e.errors()[0]
        loc = tuple(err["loc"])
        where = ".".join(str(p) for p in loc if p not in ("SyntheticProblem", "LibsvmProblem"))
        raise ParseError(f"{where or 'config'}: {err['msg']}", _locate(table, loc)) from None


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e.strerror}") from None
    return parse_config(text)
