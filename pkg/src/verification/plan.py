"""
Sweep plans: which models and which initial states a verification run covers.

Random models come in two families:
  - conserving: β₂ = 1 − β₁, α₁ = β₁ + s, α₂ = 1 − α₁ (total momentum conserved)
  - general:    β₂, α₁ free, α₂ = (α₁β₂ − s)/β₁
with s = ±1 the sign of the determinant and |β₁| ∈ [0.1, 3].
"""
import logging
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ConfigError
from src.measurement.linear_model import CATALOG, LinearModel, from_catalog, make_model
from src.measurement.packets import MomentSummary
from src.oracle.grid import ORACLE_N_MAX

logger = logging.getLogger(__name__)

BETA1_RANGE = (0.1, 3.0)
FREE_RANGE = (-3.0, 3.0)
SIGMA_RANGE = (0.2, 2.0)
FAMILIES = ("catalog", "explicit", "conserving", "general", "mixed")


def random_models(family: str, n: int, rng: np.random.Generator, hbar: float = 1.0,
                  beta1_range: Tuple[float, float] = BETA1_RANGE) -> List[LinearModel]:
    """n valid, measurable models from the 'conserving', 'general' or 'mixed' family."""
    if family not in ("conserving", "general", "mixed"):
        raise ConfigError(f"Unknown random family '{family}'")
    models = []
    for k in range(n):
        fam = family if family != "mixed" else ("conserving" if k % 2 == 0 else "general")
        b1 = rng.choice((-1.0, 1.0)) * rng.uniform(*beta1_range)
        s = rng.choice((-1.0, 1.0))
        if fam == "conserving":
            b2 = 1.0 - b1
            a1 = b1 + s
            a2 = 1.0 - a1
        else:
            b2 = rng.uniform(*FREE_RANGE)
            a1 = rng.uniform(*FREE_RANGE)
            a2 = (a1 * b2 - s) / b1
        models.append(make_model(a1, a2, b1, b2, hbar=hbar, name=f"{fam}_{k}"))
    return models


@dataclass(frozen=True)
class Configuration:
    """One (model, object, probe) row of a sweep, keyed by config_id."""
    config_id: int
    model: LinearModel
    obj: MomentSummary
    probe: MomentSummary
    family: str
    g0: float = float("nan")


@dataclass
class SweepPlan:
    """
    Models: a catalog name with g0_values, explicit coefficient tuples, or a
    random family of n_random models. States: minimal Gaussians over the
    product of sigma_x0 × sigma_X0, or drawn per configuration when
    random_states is set.
    """
    family: str = "catalog"
    catalog: str = "momentum_conserving"
    g0_values: Sequence[float] = (1.0,)
    coefficients: Sequence[Tuple[float, float, float, float]] = ()
    n_random: int = 0
    seed: int = 0
    sigma_x0: Sequence[float] = (1.0,)
    sigma_X0: Sequence[float] = (0.5,)
    random_states: bool = False
    mean_x0: float = 0.0
    mean_X0: float = 0.0
    mean_p0: float = 0.0
    mean_P0: float = 0.0
    hbar: float = 1.0
    oracle: bool = False
    oracle_subsample: int = 32
    oracle_n: int = 512
    oracle_n_max: int = ORACLE_N_MAX
    saturation_tol: float = 1e-9
    allow_unmeasurable: bool = False
    _models: Optional[List[Tuple[LinearModel, float]]] = field(default=None, init=False, repr=False)

    def validate(self) -> Tuple[bool, str]:
        if self.family not in FAMILIES:
            return False, f"Unknown family '{self.family}', choose from {FAMILIES}"
        if self.family == "catalog":
            if self.catalog not in CATALOG:
                return False, f"Unknown catalog model '{self.catalog}'"
            if len(self.g0_values) == 0:
                return False, "Empty g0 range"
        if self.family == "explicit" and len(self.coefficients) == 0:
            return False, "No explicit coefficients"
        if self.family in ("conserving", "general", "mixed") and self.n_random < 1:
            return False, "Random sweep needs n_random ≥ 1"
        if not self.random_states and (len(self.sigma_x0) == 0 or len(self.sigma_X0) == 0):
            return False, "Empty state range"
        if any(s <= 0 for s in list(self.sigma_x0) + list(self.sigma_X0)):
            return False, "State widths must be positive"
        if not self.hbar > 0:
            return False, f"hbar must be positive, got {self.hbar}"
        return True, "OK"

    def models(self) -> List[Tuple[LinearModel, float]]:
        """(model, g0) pairs; g0 is NaN outside the catalog family."""
        if self._models is not None:
            return self._models
        ok, message = self.validate()
        if not ok:
            raise ConfigError(message)
        if self.family == "catalog":
            out = [(from_catalog(self.catalog, g0=g, hbar=self.hbar), float(g)) for g in self.g0_values]
        elif self.family == "explicit":
            out = [(make_model(*c, hbar=self.hbar, name=f"explicit_{k}"), float("nan"))
                   for k, c in enumerate(self.coefficients)]
        else:
            rng = np.random.default_rng(self.seed)
            out = [(m, float("nan")) for m in random_models(self.family, self.n_random, rng, self.hbar)]
        if not self.allow_unmeasurable:
            bad = [m for m, _ in out if not m.measurable]
            if bad:
                raise ConfigError(f"{bad[0]} is unmeasurable (β₁ = 0); set allow_unmeasurable to audit it")
        self._models = out
        return out

    def configurations(self) -> Iterator[Configuration]:
        rng = np.random.default_rng(self.seed + 1)
        cid = 0
        for model, g0 in self.models():
            if self.random_states:
                widths = [tuple(np.exp(rng.uniform(*np.log(SIGMA_RANGE), size=2)))]
            else:
                widths = [(a, b) for a in self.sigma_x0 for b in self.sigma_X0]
            for sx, sX in widths:
                yield Configuration(
                    config_id=cid,
                    model=model,
                    obj=MomentSummary.minimal(self.mean_x0, float(sx), self.mean_p0, hbar=self.hbar),
                    probe=MomentSummary.minimal(self.mean_X0, float(sX), self.mean_P0, hbar=self.hbar),
                    family=self.family,
                    g0=g0,
                )
                cid += 1

    def size(self) -> int:
        per_model = 1 if self.random_states else len(self.sigma_x0) * len(self.sigma_X0)
        return len(self.models()) * per_model
