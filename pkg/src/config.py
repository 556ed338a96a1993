"""
Run configuration: one JSON (or YAML) document validated by pydantic.
Command-line flags are merged over the file keys; unknown keys are rejected.
"""
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.errors import ConfigError
from src.measurement.linear_model import CATALOG, LinearModel, from_catalog, make_model
from src.measurement.packets import PacketSpec
from src.oracle.grid import ORACLE_N_MAX, GridSpec
from src.verification.plan import SweepPlan

logger = logging.getLogger(__name__)

OUT_DIR_ENV = "LINMEASURE_OUT_DIR"
DEFAULT_OUT_DIR = "results"


class PacketConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["gaussian", "tabulated", "two_peak"] = "gaussian"
    mean_x: float = 0.0
    mean_p: float = 0.0
    sigma_x: float = Field(1.0, gt=0)
    path: Optional[str] = None
    separation: float = 3.0

    @model_validator(mode="after")
    def _tabulated_needs_path(self):
        if self.kind == "tabulated" and not self.path:
            raise ValueError("tabulated packets need a 'path'")
        return self

    def build(self, hbar: float) -> PacketSpec:
        if self.kind == "gaussian":
            return PacketSpec.gaussian(self.mean_x, self.sigma_x, self.mean_p, hbar=hbar)
        if self.kind == "two_peak":
            return PacketSpec.two_peak(separation=self.separation, sigma_x=self.sigma_x, hbar=hbar)
        return PacketSpec.from_file(self.path, hbar=hbar)


class GridConfig(BaseModel):
    """half_width None means a grid covering both packets and their images."""
    model_config = ConfigDict(extra="forbid")

    n_obj: int = 512
    n_probe: Optional[int] = None
    half_width: Optional[float] = Field(None, gt=0)


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal["catalog", "explicit", "conserving", "general", "mixed"] = "catalog"
    g0_values: List[float] = [-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0]
    coefficients: List[Tuple[float, float, float, float]] = []
    n_random: int = 0
    sigma_x0: List[float] = [1.0]
    sigma_X0: List[float] = [0.5]
    random_states: bool = False
    oracle: bool = False
    oracle_subsample: int = 8
    oracle_n: int = 512
    oracle_n_max: int = ORACLE_N_MAX
    seed: int = 0
    seeds: List[int] = []


class PovmConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    bins: int = Field(16, ge=1)
    n_obj: int = 128
    # the readout axis stretches by up to |β| and needs the finer sampling
    n_probe: int = 512
    lo: Optional[float] = None
    hi: Optional[float] = None


class RunConfig(BaseModel):
    """Model selector (catalog + g0, or explicit coefficients), states, ħ, grid, sweep and output."""
    model_config = ConfigDict(extra="forbid")

    catalog: Optional[str] = None
    g0: float = 1.0
    coeffs: Optional[Tuple[float, float, float, float]] = None
    hbar: float = Field(1.0, gt=0)
    object: PacketConfig = PacketConfig(sigma_x=1.0)
    probe: PacketConfig = PacketConfig(sigma_x=0.5)
    grid: GridConfig = GridConfig()
    sweep: SweepConfig = SweepConfig()
    povm: PovmConfig = PovmConfig()
    out_dir: Optional[str] = None
    format: Literal["json", "csv", "table"] = "table"

    @model_validator(mode="after")
    def _one_selector(self):
        if self.catalog is not None and self.coeffs is not None:
            raise ValueError("give either 'catalog' or 'coeffs', not both")
        if self.catalog is not None and self.catalog not in CATALOG:
            raise ValueError(f"unknown catalog model '{self.catalog}', choose from {sorted(CATALOG)}")
        return self

    # -- builders -----------------------------------------------------------
    def build_model(self) -> LinearModel:
        if self.coeffs is not None:
            return make_model(*self.coeffs, hbar=self.hbar, name="custom")
        return from_catalog(self.catalog or "momentum_conserving", g0=self.g0, hbar=self.hbar)

    def object_packet(self) -> PacketSpec:
        return self.object.build(self.hbar)

    def probe_packet(self) -> PacketSpec:
        return self.probe.build(self.hbar)

    def grid_spec(self, model: LinearModel, obj: PacketSpec, probe: PacketSpec) -> GridSpec:
        g = self.grid
        if g.half_width is None:
            return GridSpec.covering(model, obj, probe, n_obj=g.n_obj, n_probe=g.n_probe)
        return GridSpec.symmetric(g.half_width, g.n_obj, g.n_probe)

    def sweep_plan(self, seed: Optional[int] = None) -> SweepPlan:
        s = self.sweep
        obj, probe = self.object, self.probe
        return SweepPlan(
            family=s.family,
            catalog=self.catalog or "momentum_conserving",
            g0_values=tuple(s.g0_values),
            coefficients=tuple(s.coefficients),
            n_random=s.n_random,
            seed=s.seed if seed is None else seed,
            sigma_x0=tuple(s.sigma_x0),
            sigma_X0=tuple(s.sigma_X0),
            random_states=s.random_states,
            mean_x0=obj.mean_x, mean_X0=probe.mean_x,
            mean_p0=obj.mean_p, mean_P0=probe.mean_p,
            hbar=self.hbar,
            oracle=s.oracle,
            oracle_subsample=s.oracle_subsample,
            oracle_n=s.oracle_n,
            oracle_n_max=s.oracle_n_max,
        )

    def output_dir(self) -> Path:
        """--out / out_dir, then $LINMEASURE_OUT_DIR, then ./results."""
        return Path(self.out_dir or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)


def _deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"Cannot read config {path}: {exc}") from exc
    try:
        if path.suffix in (".yaml", ".yml"):
            data = yaml.safe_load(text) or {}
        else:
            data = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"Cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must be a mapping at the top level")
    return data


def load_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """File keys first, then overrides (already nested like the file); ValidationError becomes ConfigError."""
    data = read_config_file(path) if path else {}
    data = _deep_merge(data, overrides or {})
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"Invalid configuration: {exc}") from exc
    logger.debug("Loaded config: %s", cfg.model_dump(exclude_defaults=True))
    return cfg
