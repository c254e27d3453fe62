"""
Material parameter records.

Every physical field declares its unit in each supported unit system through
``json_schema_extra``. Values are plain numbers in the run's unit system, or
strings ``"<number> <unit>"`` whose unit must equal the expected one; the
unit system is read from the validation context (``{"unit_system": ...}``)
and defaults to SI. Nothing is converted between systems.
"""

import math
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, model_validator

UNIT_SYSTEMS = ("SI", "mm-N-s")


def units(si: str, mm: Optional[str] = None) -> Dict[str, Any]:
    return {"units": {"SI": si, "mm-N-s": si if mm is None else mm}}


def parse_quantity(text: str, expected: str) -> float:
    """Parse ``"<number> [unit]"``; the unit must match ``expected`` exactly"""
    parts = text.strip().split(None, 1)
    if not parts:
        raise ValueError("empty quantity")
    try:
        value = float(parts[0])
    except ValueError:
        raise ValueError(f"'{text}' is not a number with a unit")
    unit = parts[1].strip() if len(parts) > 1 else ""
    if unit != expected:
        shown = expected or "no unit"
        raise ValueError(f"unit mismatch: expected {shown}, got '{unit or 'no unit'}'")
    return value


class ParameterRecord(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    @classmethod
    def expected_unit(cls, name: str, unit_system: str = "SI") -> Optional[str]:
        extra = cls.model_fields[name].json_schema_extra
        if not isinstance(extra, dict) or "units" not in extra:
            return None
        return extra["units"][unit_system]

    @model_validator(mode="before")
    @classmethod
    def _parse_quantities(cls, data: Any, info: ValidationInfo) -> Any:
        if not isinstance(data, dict):
            return data
        unit_system = (info.context or {}).get("unit_system", "SI")
        parsed = dict(data)
        for key, value in data.items():
            if isinstance(value, str) and key in cls.model_fields:
                expected = cls.expected_unit(key, unit_system)
                if expected is not None:
                    parsed[key] = parse_quantity(value, expected)
        return parsed


class ElasticProps(ParameterRecord):
    E: float = Field(gt=0, json_schema_extra=units("Pa", "MPa"))
    nu: float = Field(gt=-1.0, lt=0.5, json_schema_extra=units(""))
    alpha_T: float = Field(default=0.0, ge=0, json_schema_extra=units("1/K"))
    T0: float = Field(default=0.0, json_schema_extra=units("K"))

    @property
    def lame(self):
        lam = self.E * self.nu / ((1 + self.nu) * (1 - 2 * self.nu))
        mu = self.E / (2 * (1 + self.nu))
        return lam, mu

    @property
    def shear_modulus(self) -> float:
        return self.lame[1]

    @property
    def bulk_modulus(self) -> float:
        return self.E / (3 * (1 - 2 * self.nu))

    @property
    def plane_strain_modulus(self) -> float:
        return self.E / (1 - self.nu ** 2)


class PlasticProps(ParameterRecord):
    sigma_y: float = Field(gt=0, json_schema_extra=units("Pa", "MPa"))
    N_hard: float = Field(ge=0, le=1, json_schema_extra=units(""))


class FractureParams(ParameterRecord):
    G_c: float = Field(gt=0, json_schema_extra=units("J/m^2", "N/mm"))
    ell: float = Field(gt=0, json_schema_extra=units("m", "mm"))
    # residual stiffness kept by fully damaged material
    k_res: float = Field(default=1e-7, ge=0, lt=1, json_schema_extra=units(""))


class CorrosionParams(ParameterRecord):
    A_curv: float = Field(gt=0, json_schema_extra=units("Pa", "MPa"))
    omega: float = Field(gt=0, json_schema_extra=units("J/m^3", "MPa"))
    kappa: float = Field(gt=0, json_schema_extra=units("J/m", "N"))
    c_Se: float = Field(default=1.0, json_schema_extra=units(""))
    c_Le: float = Field(gt=0, lt=1, json_schema_extra=units(""))
    D_m: float = Field(gt=0, json_schema_extra=units("m^2/s", "mm^2/s"))
    L0: float = Field(gt=0, json_schema_extra=units("m^2/(N s)", "mm^2/(N s)"))
    V_m: float = Field(default=0.0, ge=0, json_schema_extra=units("m^3/mol", "mm^3/mol"))
    k_film: float = Field(default=0.0, ge=0, json_schema_extra=units("1/s"))
    t0_film: float = Field(default=0.0, ge=0, json_schema_extra=units("s"))
    eps_f: float = Field(default=math.inf, gt=0, json_schema_extra=units(""))
    R_gas: float = Field(default=8.314, gt=0, json_schema_extra=units("J/(mol K)", "mJ/(mol K)"))
    T_k: float = Field(default=300.0, gt=0, json_schema_extra=units("K"))

    @property
    def interface_energy(self) -> float:
        return math.sqrt(self.kappa * self.omega / 18.0)

    @property
    def interface_thickness(self) -> float:
        return math.sqrt(8.0 * self.kappa / self.omega)


class FluidParams(ParameterRecord):
    rho_fl: float = Field(gt=0, json_schema_extra=units("kg/m^3", "t/mm^3"))
    mu_fl: float = Field(gt=0, json_schema_extra=units("Pa s", "MPa s"))
    C_fl: float = Field(gt=0, json_schema_extra=units("1/Pa", "1/MPa"))
    alpha_r: float = Field(gt=0, le=1, json_schema_extra=units(""))
    n_pr: float = Field(gt=0, le=1, json_schema_extra=units(""))
    K_r: float = Field(gt=0, json_schema_extra=units("m^2", "mm^2"))
    K_f: float = Field(gt=0, json_schema_extra=units("m^2", "mm^2"))
    c1: float = Field(default=0.4, ge=0, json_schema_extra=units(""))
    c2: float = Field(default=1.0, le=1, json_schema_extra=units(""))
    b_exp: float = Field(default=1.0, gt=0, json_schema_extra=units(""))
    K_bulk: float = Field(gt=0, json_schema_extra=units("Pa", "MPa"))

    @model_validator(mode="after")
    def _check_indicator_constants(self):
        if not self.c1 < self.c2:
            raise ValueError(f"indicator constants need c1 < c2, got c1={self.c1}, c2={self.c2}")
        return self


class HydrogenParams(ParameterRecord):
    D_H: float = Field(gt=0, json_schema_extra=units("m^2/s", "mm^2/s"))
    V_H: float = Field(gt=0, json_schema_extra=units("m^3/mol", "mm^3/mol"))
    R_gas: float = Field(default=8.314, gt=0, json_schema_extra=units("J/(mol K)", "mJ/(mol K)"))
    T_k: float = Field(default=300.0, gt=0, json_schema_extra=units("K"))
    dg_b0: float = Field(gt=0, json_schema_extra=units("J/mol", "mJ/mol"))
    chi_H: float = Field(ge=0, le=1, json_schema_extra=units(""))


class HeatParams(ParameterRecord):
    rho: float = Field(gt=0, json_schema_extra=units("kg/m^3", "t/mm^3"))
    c_T: float = Field(gt=0, json_schema_extra=units("J/(kg K)", "mJ/(t K)"))
    k0: float = Field(gt=0, json_schema_extra=units("W/(m K)", "mW/(mm K)"))
    degrade_conductivity: bool = False
