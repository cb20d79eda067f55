"""Run configuration schema and loader.

Configs are JSON.  Each section may be given nested (``{"grid": {...}}``) or
as flat top-level keys; flat keys are folded into their section before
validation, so ``{"s": 0.5, "family": "pure_power", "ell": 1, "c2": 1}`` is a
complete config.  Defaults: ``L = 40`` (1D) or ``20`` (2D), ``M = 512`` (1D)
or ``128`` (2D), ``s = 0.5``, ``el_tol = 1e-6``, ``seed = 0``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field as PField, ValidationError, model_validator

from .errors import ConfigError, GridError
from .flow import FlowConfig
from .grid import Grid
from .nonlinearity import Envelope, NonlinearitySpec, PeriodicCoefficient, Tabulation

DEFAULT_BOX = {1: 40.0, 2: 20.0}
DEFAULT_POINTS = {1: 512, 2: 128}


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridModel(_Model):
    dim: Literal[1, 2] = 1
    box_length: Optional[float] = None
    points_per_dim: Optional[int] = None
    s: float = 0.5

    def build(self) -> Grid:
        L = DEFAULT_BOX[self.dim] if self.box_length is None else self.box_length
        M = DEFAULT_POINTS[self.dim] if self.points_per_dim is None else self.points_per_dim
        return Grid(self.dim, L, M, self.s)


class CoefficientModel(_Model):
    base: float = 1.0
    amplitude: float = 0.0


class EnvelopeModel(_Model):
    kind: Literal["gaussian", "sech", "constant"] = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0


class TableModel(_Model):
    t_nodes: list[float]
    values: list[list[float]]
    r_nodes: list[float] = []


class NonlinearityModel(_Model):
    family: Literal["pure_power", "weighted_power", "periodic_power", "perturbed_periodic",
                    "user_tabulated"]
    ell: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    gamma: Optional[float] = None
    sigma: Optional[float] = None
    A: Optional[float] = None
    A_prime: Optional[float] = None
    B: Optional[float] = None
    B_prime: Optional[float] = None
    delta_F1: Optional[float] = None
    p_F1: float = 0.0
    R_F1: float = 1.0
    S_F1: float = 1.0
    periodic_coefficient: CoefficientModel = CoefficientModel()
    perturbation_envelope: EnvelopeModel = EnvelopeModel()
    table: Optional[TableModel] = None
    comparison: Optional["NonlinearityModel"] = None

    def build(self) -> NonlinearitySpec:
        kw = self.model_dump(exclude={"periodic_coefficient", "perturbation_envelope", "table",
                                      "comparison"})
        table = None
        if self.table is not None:
            table = Tabulation(tuple(self.table.t_nodes), tuple(map(tuple, self.table.values)),
                               tuple(self.table.r_nodes))
        return NonlinearitySpec(
            **kw,
            coefficient=PeriodicCoefficient(**self.periodic_coefficient.model_dump()),
            envelope=Envelope(**self.perturbation_envelope.model_dump()),
            table=table,
            comparison_spec=None if self.comparison is None else self.comparison.build(),
        )


class FlowModel(_Model):
    c2: Optional[float] = None
    step_init: float = 1.0
    backtrack_factor: float = 0.5
    step_growth: float = 1.5
    max_iters: int = 50_000
    el_tol: float = 1e-6
    restarts: int = 1
    seed: int = 0
    init_strategy: Literal["gaussian_dilation_scan", "random_bump", "warm_start"] = \
        "gaussian_dilation_scan"
    warm_start: Optional[str] = None
    energy_floor: float = -1e8
    workers: int = 1

    def build(self, c2: float | None = None, warm=None) -> FlowConfig:
        kw = self.model_dump(exclude={"warm_start"})
        if c2 is not None:
            kw["c2"] = c2
        if kw["c2"] is None:
            raise ConfigError("flow.c2 is required for this command", rule="c2 required",
                              path="flow.c2")
        return FlowConfig(**kw, warm_start=warm)


class HypothesesModel(_Model):
    hypotheses: list[Literal["F0", "F1", "F2", "F3", "F4", "F5", "F6"]] = \
        ["F0", "F1", "F2", "F3", "F4", "F5", "F6"]
    radii: Optional[list[float]] = None
    t_values: Optional[list[float]] = None
    thetas: Optional[list[float]] = None


class ScanModel(_Model):
    c_values: list[float] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    comparison: bool = False


class DilationModel(_Model):
    profile: Literal["gaussian", "sech2", "rational"] = "gaussian"
    width: float = 1.0
    lambda_ladder: list[float] = [2.0 ** -k for k in range(9)]
    c2: Optional[float] = None
    skip_overflow: bool = False


class SubaddModel(_Model):
    c_values: list[float] = [2.0]
    a_values: list[float] = [0.5, 1.0, 1.5]
    mode: Literal["plain", "cross"] = "plain"
    split: Literal["squared", "linear"] = "squared"
    tol: float = 1e-6
    margin: Optional[float] = None
    interpolate: bool = True


class ThetaModel(_Model):
    c: float = 1.0
    thetas: list[float] = [1.5, 2.0]
    tol: float = 1e-6
    vector_check: bool = True


class CCModel(_Model):
    source: Literal["spreading", "translates", "separating", "flow", "fields"] = "spreading"
    fields: list[str] = []
    count: int = 8
    eps_ladder: Optional[list[float]] = None
    radii: Optional[list[float]] = None
    options: dict = {}


class ValidateModel(_Model):
    s_values: list[float] = [0.25, 0.5, 0.75]
    profiles: list[Literal["gaussian", "sech2", "rational"]] = ["gaussian", "sech2"]
    points: list[int] = [512, 1024]
    tol: float = 1e-3


_SECTIONS = {
    "grid": GridModel,
    "nonlinearity": NonlinearityModel,
    "flow": FlowModel,
    "hypotheses": HypothesesModel,
    "scan": ScanModel,
    "dilation": DilationModel,
    "subadd": SubaddModel,
    "theta": ThetaModel,
    "cc": CCModel,
    "validate": ValidateModel,
}
_FLAT = {name: sec for sec in ("grid", "nonlinearity", "flow")
         for name in _SECTIONS[sec].model_fields}


class ConfigModel(_Model):
    grid: GridModel = GridModel()
    nonlinearity: Optional[NonlinearityModel] = None
    flow: FlowModel = FlowModel()
    hypotheses: HypothesesModel = HypothesesModel()
    scan: ScanModel = ScanModel()
    dilation: DilationModel = DilationModel()
    subadd: SubaddModel = SubaddModel()
    theta: ThetaModel = ThetaModel()
    cc: CCModel = CCModel()
    validate_: ValidateModel = PField(default=ValidateModel(), alias="validate")

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    @model_validator(mode="before")
    @classmethod
    def _fold_flat(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        for key in list(data):
            if key in _SECTIONS:
                continue
            sec = _FLAT.get(key)
            if sec is None:
                continue
            section = dict(data.get(sec) or {})
            if key in section:
                raise ValueError(f"{key!r} given both flat and inside {sec!r}")
            section[key] = data.pop(key)
            data[sec] = section
        return data


@dataclass
class Bundle:
    model: ConfigModel
    grid: Grid
    spec: NonlinearitySpec | None
    raw: dict

    def flow(self, c2: float | None = None, warm=None) -> FlowConfig:
        return self.model.flow.build(c2, warm)

    def to_dict(self) -> dict:
        return self.model.model_dump(by_alias=True, exclude_none=True)


def _rule_from_pydantic(err: dict) -> str:
    return err.get("type", "schema")


def validate_config(raw: dict) -> Bundle:
    """Validate a parsed config; every failure is a :class:`ConfigError`."""
    try:
        model = ConfigModel.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = ".".join(str(p) for p in first["loc"])
        raise ConfigError(f"schema violation at {path or '<root>'}: {first['msg']}",
                          rule=_rule_from_pydantic(first), path=path) from None
    try:
        grid = model.grid.build()
    except GridError as exc:
        raise ConfigError(str(exc), rule="grid invariants", path="grid") from None
    spec = None
    if model.nonlinearity is not None:
        spec = model.nonlinearity.build()
        spec.bind(grid)
    if model.flow.c2 is not None:
        model.flow.build()
    return Bundle(model, grid, spec, raw)


def load_config(path) -> Bundle:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})", rule="json", path=str(path)) from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object", rule="object root", path="<root>")
    return validate_config(raw)
