"""Run configuration: one JSON document, validated with field paths."""
from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path
from typing import List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .discrimination import (
    DetectorGram,
    equal_probs,
    gram_from_json,
    random_gram,
    uniform_gram,
    validate_gram,
)
from .errors import ConfigError, GhostsimError
from .gaussian_core import Geometry, SourceParams
from .oracle import GridSpec

SHIPPED = ("strong", "weak")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SourceModel(_Strict):
    sigma: float = Field(gt=0)
    omega: float = Field(gt=0)


class GeometryModel(_Strict):
    n: int = Field(ge=2)
    slit_spacing: float = Field(gt=0)
    slit_width: float = Field(gt=0)
    L1: float = Field(ge=0)
    L2: float = Field(ge=0)
    wavelength: float = Field(gt=0)
    z1_detect: float = 0.0
    slit_offset: float = 0.0


class UniformDetector(_Strict):
    n: int = Field(ge=2)
    s: float = Field(ge=0, le=1)


class RandomDetector(_Strict):
    n: int = Field(ge=2)
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    dim: Optional[int] = Field(default=None, ge=1)


class DetectorModel(_Strict):
    uniform: Optional[UniformDetector] = None
    gram: Optional[List[List[List[float]]]] = None
    random: Optional[RandomDetector] = None
    probs: Optional[List[float]] = None

    @model_validator(mode="after")
    def _one_form(self):
        given = [k for k in ("uniform", "gram", "random") if getattr(self, k) is not None]
        if len(given) != 1:
            raise ValueError("give exactly one of 'uniform', 'gram' or 'random'")
        return self


class ZGridModel(_Strict):
    points: int = Field(default=4001, ge=3)
    periods: Optional[float] = Field(default=10.0, gt=0)
    start: Optional[float] = None
    stop: Optional[float] = None

    @model_validator(mode="after")
    def _range(self):
        if (self.start is None) != (self.stop is None):
            raise ValueError("give both 'start' and 'stop' or neither")
        if self.start is not None and self.stop <= self.start:
            raise ValueError("'stop' must exceed 'start'")
        return self


class OracleModel(_Strict):
    extent: float = Field(gt=0)
    points: int = 2048
    padding: float = Field(default=0.15, ge=0, le=0.25)


class SweepParameter(_Strict):
    path: str
    start: float
    stop: float
    steps: int = Field(ge=1)


class SweepModel(_Strict):
    parameters: List[SweepParameter] = Field(min_length=1, max_length=2)
    envelopes: Literal["pipeline", "equal"] = "pipeline"


class RunConfig(_Strict):
    schema_: int = Field(default=1, alias="schema")
    source: SourceModel
    geometry: GeometryModel
    detector: DetectorModel
    phases: Optional[Union[List[float], Literal["aligned"]]] = None
    grid: ZGridModel = ZGridModel()
    oracle: Optional[OracleModel] = None
    sweep: Optional[SweepModel] = None
    outputs: List[Literal["csv", "json", "svg"]] = ["csv", "json"]

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    def snapshot(self) -> dict:
        return self.model_dump(mode="json", by_alias=True, exclude_none=True)


def _problems(err: ValidationError):
    out = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        out.append(f"{loc}: {e['msg']}")
    return out


def parse_config(obj: dict) -> RunConfig:
    try:
        cfg = RunConfig.model_validate(obj)
    except ValidationError as err:
        problems = _problems(err)
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(problems), problems) from None
    build(cfg)  # domain invariants, reported with field paths
    return cfg


def load_config(path) -> RunConfig:
    """Load a config file; the bare names 'strong' and 'weak' pick the shipped references."""
    p = Path(path)
    try:
        if not p.exists() and str(path) in SHIPPED:
            text = resources.files("ghostsim.configs").joinpath(f"{path}.json").read_text()
        else:
            text = p.read_text()
        obj = json.loads(text)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read config {path}: {err}", [str(err)]) from None
    return parse_config(obj)


def build_detector(d: DetectorModel, seed=None) -> DetectorGram:
    if d.uniform is not None:
        det = uniform_gram(d.uniform.n, d.uniform.s)
    elif d.random is not None:
        s = d.random.seed if seed is None else seed
        det = random_gram(d.random.n, np.random.default_rng(s), dim=d.random.dim)
    else:
        det = gram_from_json({"gram": d.gram})
    if d.probs is not None:
        det = det.with_probs(d.probs)
    return det


class Built:
    """Domain objects assembled from a validated :class:`RunConfig`."""

    def __init__(self, src, geo, det, phases, oracle):
        self.src = src
        self.geo = geo
        self.det = det
        self.phases = phases
        self.oracle = oracle


def build(cfg: RunConfig, seed=None) -> Built:
    problems = []

    def guard(path, fn):
        try:
            return fn()
        except (GhostsimError, ValueError) as err:
            problems.append(f"{path}: {err}")
            return None

    src = guard("source", lambda: SourceParams(cfg.source.sigma, cfg.source.omega))
    geo = guard("geometry", lambda: Geometry(**cfg.geometry.model_dump()))
    det = guard("detector", lambda: build_detector(cfg.detector, seed))
    if det is not None:
        report = validate_gram(det)
        if not report.ok:
            problems.extend(f"detector: {f}" for f in report.failures)
        if geo is not None and det.n != geo.n:
            problems.append(f"detector: {det.n} detector states for {geo.n} slits")
    phases = cfg.phases
    if isinstance(phases, list) and geo is not None and len(phases) != geo.n:
        problems.append(f"phases: need {geo.n} values, got {len(phases)}")
    oracle = None
    if cfg.oracle is not None:
        oracle = guard("oracle", lambda: GridSpec(**cfg.oracle.model_dump()))
    if problems:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(problems), problems)
    if phases is None:
        phases = np.zeros(geo.n)
    elif phases == "aligned":
        from .pattern import aligning_phases
        phases = aligning_phases(src, geo)
    else:
        phases = np.asarray(phases, dtype=float)
    return Built(src, geo, det, phases, oracle)


def with_value(cfg: RunConfig, path: str, value) -> RunConfig:
    """Copy of ``cfg`` with the dotted ``path`` set to ``value``."""
    obj = copy.deepcopy(cfg.snapshot())
    obj.pop("sweep", None)
    node = obj
    keys = path.split(".")
    for key in keys[:-1]:
        if key not in node:
            raise ConfigError(f"sweep path '{path}' does not exist", [f"sweep.parameters: {path}"])
        node = node[key]
    if keys[-1] not in node:
        raise ConfigError(f"sweep path '{path}' does not exist", [f"sweep.parameters: {path}"])
    node[keys[-1]] = value
    return parse_config(obj)
