"""
Linear measurement model for an object position x̂₀ coupled to a probe X̂₀.
After the interaction window the positions are

    x̂_t = α₁x̂₀ + α₂X̂₀,    X̂_t = β₁x̂₀ + β₂X̂₀,

with Γ = 1/(α₁β₂ − α₂β₁) and |Γ| = 1 for a unitary evolution.
Includes the catalog of named interactions (von Neumann, Ozawa,
momentum-conserving family).
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from src.errors import DegenerateModel, ModelError, UnitarityViolation

logger = logging.getLogger(__name__)

UNITARITY_TOL = 1e-9        # ||Γ| - 1| allowed for user floats
MEASURABLE_TOL = 1e-12      # |β₁| below this → unmeasurable
CONSERVATION_TOL = 1e-9     # α₁+α₂ = 1, β₁+β₂ = 1 check
DEGENERATE_TOL = 1e-15      # |det| below this → degenerate


@dataclass(frozen=True)
class ModelDiagnostics:
    """Derived flags of a linear model."""
    gamma: float
    conserves_momentum: bool
    measurable: bool


@dataclass(frozen=True)
class MomentumMap:
    """p̂_t = a1·p̂₀ + a2·P̂₀,  P̂_t = b1·p̂₀ + b2·P̂₀."""
    a1: float
    a2: float
    b1: float
    b2: float

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.a1, self.a2], [self.b1, self.b2]], dtype=float)

    def conserves_total(self, tol: float = CONSERVATION_TOL) -> bool:
        """a1+b1 = 1 and a2+b2 = 1, i.e. p̂_t+P̂_t = p̂₀+P̂₀."""
        return abs(self.a1 + self.b1 - 1.0) <= tol and abs(self.a2 + self.b2 - 1.0) <= tol


@dataclass(frozen=True)
class LinearModel:
    """Coefficients of the position maps of the object/probe interaction."""
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    hbar: float = 1.0
    name: str = "custom"
    # exact rational coefficients for catalog members, used by exact identity checks
    exact: Optional[Tuple[Fraction, Fraction, Fraction, Fraction]] = field(default=None, compare=False)

    @property
    def det(self) -> float:
        return self.alpha1 * self.beta2 - self.alpha2 * self.beta1

    @property
    def gamma(self) -> float:
        return 1.0 / self.det

    @property
    def measurable(self) -> bool:
        return abs(self.beta1) >= MEASURABLE_TOL

    @property
    def conserves_momentum(self) -> bool:
        return (abs(self.alpha1 + self.alpha2 - 1.0) <= CONSERVATION_TOL
                and abs(self.beta1 + self.beta2 - 1.0) <= CONSERVATION_TOL)

    @property
    def diagnostics(self) -> ModelDiagnostics:
        return ModelDiagnostics(
            gamma=self.gamma,
            conserves_momentum=self.conserves_momentum,
            measurable=self.measurable,
        )

    @property
    def coefficients(self) -> Tuple[float, float, float, float]:
        return (self.alpha1, self.alpha2, self.beta1, self.beta2)

    def position_matrix(self) -> np.ndarray:
        """[[α₁, α₂], [β₁, β₂]] acting on (x₀, X₀)."""
        return np.array([[self.alpha1, self.alpha2], [self.beta1, self.beta2]], dtype=float)

    def validate(self) -> Tuple[bool, str]:
        """Check unitarity and measurability without raising."""
        if not all(math.isfinite(c) for c in self.coefficients):
            return False, f"Non-finite coefficients {self.coefficients}"
        if not (math.isfinite(self.hbar) and self.hbar > 0):
            return False, f"hbar must be positive, got {self.hbar}"
        if abs(self.det) < DEGENERATE_TOL:
            return False, "Position map is degenerate (det = 0)"
        if abs(abs(self.gamma) - 1.0) > UNITARITY_TOL:
            return False, f"|Γ| = {abs(self.gamma):.12g} violates unitarity (|Γ| = 1)"
        if not self.measurable:
            return True, "Valid but unmeasurable (β₁ = 0)"
        return True, "OK"

    def inverse(self) -> "LinearModel":
        """Model of the inverse evolution: position map M⁻¹ = Γ·[[β₂, −α₂], [−β₁, α₁]]."""
        g = self.gamma
        exact = None
        if self.exact is not None:
            a1, a2, b1, b2 = self.exact
            ge = 1 / (a1 * b2 - a2 * b1)
            exact = (ge * b2, -ge * a2, -ge * b1, ge * a1)
        return LinearModel(
            alpha1=g * self.beta2,
            alpha2=-g * self.alpha2,
            beta1=-g * self.beta1,
            beta2=g * self.alpha1,
            hbar=self.hbar,
            name=f"inverse({self.name})",
            exact=exact,
        )

    def __str__(self) -> str:
        return (f"{self.name}(α₁={self.alpha1:g}, α₂={self.alpha2:g}, "
                f"β₁={self.beta1:g}, β₂={self.beta2:g}, ħ={self.hbar:g})")


def make_model(alpha1: float, alpha2: float, beta1: float, beta2: float,
               hbar: float = 1.0, name: str = "custom",
               exact: Optional[Tuple[Fraction, Fraction, Fraction, Fraction]] = None) -> LinearModel:
    """Build a validated model. Raises DegenerateModel or UnitarityViolation."""
    coeffs = (alpha1, alpha2, beta1, beta2)
    if not all(math.isfinite(float(c)) for c in coeffs):
        raise ModelError(f"Coefficients must be finite, got {coeffs}")
    if not (math.isfinite(hbar) and hbar > 0):
        raise ModelError(f"hbar must be a positive finite number, got {hbar}")
    model = LinearModel(float(alpha1), float(alpha2), float(beta1), float(beta2),
                        hbar=float(hbar), name=name, exact=exact)
    if abs(model.det) < DEGENERATE_TOL:
        raise DegenerateModel(f"Position map of {model} has zero determinant")
    if abs(abs(model.gamma) - 1.0) > UNITARITY_TOL:
        raise UnitarityViolation(
            f"|Γ| = {abs(model.gamma):.12g} for {model}; a unitary evolution requires |Γ| = 1")
    if not model.measurable:
        logger.warning("%s has β₁ = 0 and cannot measure the object position", model)
    logger.debug("Built %s, Γ=%g, conserves_momentum=%s", model, model.gamma, model.conserves_momentum)
    return model


def _from_exact(a1: Fraction, a2: Fraction, b1: Fraction, b2: Fraction,
                hbar: float, name: str) -> LinearModel:
    return make_model(float(a1), float(a2), float(b1), float(b2), hbar=hbar, name=name,
                      exact=(a1, a2, b1, b2))


def von_neumann(hbar: float = 1.0) -> LinearModel:
    """Ĥ = Kx̂₀P̂₀ with g₀ = 1:  x̂_t = x̂₀,  X̂_t = x̂₀ + X̂₀."""
    return _from_exact(Fraction(1), Fraction(0), Fraction(1), Fraction(1), hbar, "von_neumann")


def ozawa(hbar: float = 1.0) -> LinearModel:
    """Ozawa's interaction with g₀ = 1:  x̂_t = x̂₀ − X̂₀,  X̂_t = x̂₀."""
    return _from_exact(Fraction(1), Fraction(-1), Fraction(1), Fraction(0), hbar, "ozawa")


def momentum_conserving(g0: float, hbar: float = 1.0) -> LinearModel:
    """Ĥ = K(p̂₀+P̂₀)(X̂₀−x̂₀):  (α₁, α₂, β₁, β₂) = (1−g₀, g₀, −g₀, 1+g₀), Γ = 1 for every g₀."""
    g = Fraction(float(g0))
    return _from_exact(1 - g, g, -g, 1 + g, hbar, f"momentum_conserving(g0={float(g0):g})")


def momentum_map(model: LinearModel) -> MomentumMap:
    """a1 = Γβ₂, a2 = −Γβ₁, b1 = −Γα₂, b2 = Γα₁."""
    g = model.gamma
    return MomentumMap(
        a1=g * model.beta2,
        a2=-g * model.beta1,
        b1=-g * model.alpha2,
        b2=g * model.alpha1,
    )


CATALOG: Dict[str, Callable[..., LinearModel]] = {
    "von_neumann": lambda g0=1.0, hbar=1.0: von_neumann(hbar),
    "ozawa": lambda g0=1.0, hbar=1.0: ozawa(hbar),
    "momentum_conserving": lambda g0=1.0, hbar=1.0: momentum_conserving(g0, hbar),
}


def from_catalog(name: str, g0: float = 1.0, hbar: float = 1.0) -> LinearModel:
    """Look up a named interaction. g0 only affects the momentum-conserving family."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise ModelError(f"Unknown catalog model '{name}', choose from {sorted(CATALOG)}") from None
    return factory(g0=g0, hbar=hbar)


if __name__ == "__main__":
    for m in (von_neumann(), ozawa(), momentum_conserving(1.0), momentum_conserving(0.5)):
        d = m.diagnostics
        print(f"{m}")
        print(f"  Γ = {d.gamma:g}, conserves_momentum = {d.conserves_momentum}, measurable = {d.measurable}")
        print(f"  momentum map: {momentum_map(m)}")
