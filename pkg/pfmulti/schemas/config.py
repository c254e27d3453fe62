"""
Run configuration: a TOML document with sections run, mesh, scenario,
materials, schedule and output.
"""

import hashlib
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Annotated, Any, ClassVar, Dict, List, Literal, Optional, Tuple, Union

import tomli_w
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from pfmulti.core.errors import ConfigError
from pfmulti.schemas.materials import (UNIT_SYSTEMS, CorrosionParams, ElasticProps, FluidParams,
                                       FractureParams, HeatParams, HydrogenParams, PlasticProps)

MATERIAL_SECTIONS = {
    "elastic": ElasticProps,
    "plastic": PlasticProps,
    "fracture": FractureParams,
    "corrosion": CorrosionParams,
    "fluid": FluidParams,
    "hydrogen": HydrogenParams,
    "heat": HeatParams,
}

SCHEME_NAMES = Literal["staggered", "staggered-multi", "monolithic-pair"]


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RunSection(Section):
    name: str = "run"
    unit_system: Literal["SI", "mm-N-s"] = "SI"


class AxisSpec(Section):
    breakpoints: List[float]
    divisions: List[int]
    ratios: Optional[List[float]] = None


class MeshSpec(Section):
    """A mesh file, a uniform box or a graded tensor grid"""

    file: Optional[str] = None
    kind: Literal["tri3", "quad4", "quad8", "hex8"] = "quad4"
    bounds: Optional[List[List[float]]] = None
    divisions: Optional[List[int]] = None
    x_coords: Optional[AxisSpec] = None
    y_coords: Optional[AxisSpec] = None
    z_coords: Optional[AxisSpec] = None
    reduced_integration: bool = False

    @model_validator(mode="after")
    def _one_source(self):
        sources = [self.file is not None, self.bounds is not None,
                   self.x_coords is not None or self.y_coords is not None]
        if sum(sources) != 1:
            raise ValueError("give exactly one of file, bounds/divisions or x_coords/y_coords")
        if self.bounds is not None and self.divisions is None:
            raise ValueError("bounds need divisions")
        if sources[2] and (self.x_coords is None or self.y_coords is None):
            raise ValueError("graded meshes need x_coords and y_coords")
        return self


class SetValue(Section):
    set: str
    value: float


class HotSpot(Section):
    center: List[float]
    radius: float = Field(gt=0)
    value: float


class ScenarioBase(Section):
    requires: ClassVar[Tuple[str, ...]] = ()


class DiffusionScenario(ScenarioBase):
    """Heat conduction on the configured mesh"""

    kind: Literal["diffusion"]
    initial: float = 0.0
    dirichlet: List[SetValue] = Field(default_factory=list)
    hot_spot: Optional[HotSpot] = None
    source: float = 0.0
    source_set: Optional[str] = None
    source_until: Optional[float] = None

    requires: ClassVar[Tuple[str, ...]] = ("heat",)


class QuenchingScenario(ScenarioBase):
    kind: Literal["quenching"]
    T_initial: float = 300.0
    T_ambient: float = 20.0
    band_depth: float = Field(default=2e-4, gt=0)
    crack_threshold: float = Field(default=0.95, gt=0, le=1)
    split: Literal["none", "no_tension"] = "none"

    requires: ClassVar[Tuple[str, ...]] = ("elastic", "fracture", "heat")


class PressurizedCrackScenario(ScenarioBase):
    kind: Literal["pressurized_crack"]
    a0: float = Field(default=0.1, gt=0)
    p_max: float = Field(default=1e8, gt=0)
    t_ramp: float = Field(default=2000.0, gt=0)
    split: Literal["none", "no_tension"] = "no_tension"
    crack_threshold: float = Field(default=0.95, gt=0, le=1)

    requires: ClassVar[Tuple[str, ...]] = ("elastic", "fracture", "fluid")


class InjectionScenario(ScenarioBase):
    kind: Literal["injection"]
    q_m: float = Field(default=4000.0, ge=0)
    t_inject: float = Field(default=300.0, gt=0)
    crack_length: float = Field(default=0.05, gt=0)
    center: List[float] = Field(default_factory=lambda: [0.25, 0.25])
    inclined_center: List[float] = Field(default_factory=lambda: [0.32, 0.31])
    inclined_angle: float = 45.0
    split: Literal["none", "no_tension"] = "no_tension"
    dim: Literal[2, 3] = 2

    requires: ClassVar[Tuple[str, ...]] = ("elastic", "fracture", "fluid")


class HydrogenPlateScenario(ScenarioBase):
    kind: Literal["hydrogen_plate"]
    c_env: float = Field(default=0.5, ge=0)
    u_max: float = Field(default=0.006, gt=0)
    t_load: float = Field(default=6e6, gt=0)
    crack_length: float = Field(default=0.5, gt=0)
    transport: Literal["transient", "uniform", "steady"] = "transient"
    split: Literal["none", "no_tension"] = "none"

    requires: ClassVar[Tuple[str, ...]] = ("elastic", "fracture", "hydrogen")


class PitFreeScenario(ScenarioBase):
    kind: Literal["pit_free"]
    pit_radius: float = Field(default=0.005, gt=0)
    core_fraction: float = Field(default=0.5, ge=0, lt=1)
    insulated: bool = False
    form: Literal["rate", "gradient"] = "rate"

    requires: ClassVar[Tuple[str, ...]] = ("corrosion",)


class PitSccScenario(ScenarioBase):
    kind: Literal["pit_scc"]
    pit_half_width: float = Field(default=0.0075, gt=0)
    pit_depth: float = Field(default=0.005, gt=0)
    core_fraction: float = Field(default=0.5, ge=0, lt=1)
    u_max: float = 0.0002
    t_load: float = Field(default=1.0, gt=0)
    probe_offset: float = Field(default=0.02, gt=0)
    k_res: float = Field(default=1e-7, ge=0, lt=1)
    mechanics: bool = True

    requires: ClassVar[Tuple[str, ...]] = ("elastic", "plastic", "corrosion")


ScenarioSpec = Annotated[Union[DiffusionScenario, QuenchingScenario, PressurizedCrackScenario,
                               InjectionScenario, HydrogenPlateScenario, PitFreeScenario,
                               PitSccScenario],
                         Field(discriminator="kind")]

SCENARIO_KINDS = ("diffusion", "quenching", "pressurized_crack", "injection", "hydrogen_plate",
                  "pit_free", "pit_scc")


class Materials(Section):
    elastic: Optional[ElasticProps] = None
    plastic: Optional[PlasticProps] = None
    fracture: Optional[FractureParams] = None
    corrosion: Optional[CorrosionParams] = None
    fluid: Optional[FluidParams] = None
    hydrogen: Optional[HydrogenParams] = None
    heat: Optional[HeatParams] = None


class ScheduleSpec(Section):
    dt: Union[float, List[float]]
    t_end: float = Field(gt=0)
    scheme: SCHEME_NAMES = "staggered"
    passes: int = Field(default=1, ge=1)
    pass_tol: float = Field(default=1e-4, gt=0)
    tol_rel: float = Field(default=1e-6, gt=0)
    tol_abs: float = Field(default=1e-10, gt=0)
    max_iter: int = Field(default=25, ge=1)
    min_dt_factor: float = Field(default=1.0 / 64.0, gt=0, le=1)
    max_increments: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _positive_steps(self):
        steps = self.dt if isinstance(self.dt, list) else [self.dt]
        if not steps or any(not d > 0 for d in steps):
            raise ValueError("dt must be positive")
        return self


class ProbeSpec(Section):
    name: str
    kind: Literal["node", "point", "reaction", "max", "min"]
    field: str
    at: Optional[List[float]] = None
    set: Optional[str] = None
    component: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _location(self):
        if self.kind in ("node", "point") and self.at is None:
            raise ValueError(f"{self.kind} probes need 'at'")
        if self.kind == "reaction" and self.set is None:
            raise ValueError("reaction probes need 'set'")
        return self


class OutputSpec(Section):
    fields: Optional[List[str]] = None
    probes: List[ProbeSpec] = Field(default_factory=list)
    cadence: int = Field(default=10, ge=0)
    vtk: bool = True
    csv: bool = True


class Config(Section):
    run: RunSection = Field(default_factory=RunSection)
    mesh: MeshSpec
    scenario: ScenarioSpec
    materials: Materials = Field(default_factory=Materials)
    schedule: ScheduleSpec
    output: OutputSpec = Field(default_factory=OutputSpec)

    @model_validator(mode="after")
    def _required_materials(self):
        for section in type(self.scenario).requires:
            if getattr(self.materials, section) is None:
                record = MATERIAL_SECTIONS[section]
                needed = [name for name, f in record.model_fields.items() if f.is_required()]
                raise ValueError(f"scenario '{self.scenario.kind}' needs [materials.{section}] "
                                 f"with {', '.join(needed)}")
        return self


def _expected_unit(loc: Tuple[Any, ...], unit_system: str) -> Optional[str]:
    if len(loc) >= 3 and loc[0] == "materials" and loc[1] in MATERIAL_SECTIONS:
        record = MATERIAL_SECTIONS[loc[1]]
        if loc[2] in record.model_fields:
            return record.expected_unit(loc[2], unit_system)
    return None


def _config_error(error: ValidationError, unit_system: str) -> ConfigError:
    first = error.errors()[0]
    loc = tuple(first["loc"])
    path = ".".join(str(part) for part in loc)
    message = first["msg"]
    if first["type"] == "union_tag_invalid":
        message = f"unknown scenario '{first['input'].get('kind')}'; expected one of {', '.join(SCENARIO_KINDS)}"
    elif first["type"] == "missing":
        message = f"missing key '{loc[-1]}'"
    unit = _expected_unit(loc, unit_system)
    if unit:
        message = f"{message} (expected unit: {unit})"
    return ConfigError(f"{path}: {message}" if path else message, path=path or None)


def validate_config(data: Dict[str, Any]) -> Config:
    """Validate a configuration mapping; parameter strings are read in the declared unit system"""
    unit_system = (data.get("run") or {}).get("unit_system", "SI")
    if unit_system not in UNIT_SYSTEMS:
        raise ConfigError(f"run.unit_system: unknown unit system '{unit_system}'; "
                          f"expected one of {', '.join(UNIT_SYSTEMS)}", path="run.unit_system")
    try:
        return Config.model_validate(data, context={"unit_system": unit_system})
    except ValidationError as e:
        raise _config_error(e, unit_system) from None


def parse_config(path: Union[str, Path]) -> Config:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}")
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}")
    return validate_config(data)


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items() if v is not None}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def dump_config(config: Config) -> str:
    """TOML text that parses back to an equal Config"""
    return tomli_w.dumps(_plain(config.model_dump(mode="python")))


def config_hash(path: Union[str, Path]) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


