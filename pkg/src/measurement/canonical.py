"""
Linear combinations of the canonical operators x̂₀, X̂₀, p̂₀, P̂₀ and Î.

Commutators of such combinations are c-numbers, so every operator identity
the linear model needs ([x̂, p̂] = iħ, result-operator commutators,
Heisenberg maps) reduces to arithmetic on five coefficients. Coefficients
may be floats or Fractions; Fractions stay exact through +, −, scaling and
commutators.
"""
from dataclasses import dataclass, fields
from fractions import Fraction
from numbers import Real
from typing import Tuple, Union

from src.errors import Unmeasurable
from src.measurement.linear_model import LinearModel, momentum_map

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class CanonicalExpr:
    """cx0·x̂₀ + cX0·X̂₀ + cp0·p̂₀ + cP0·P̂₀ + cI·Î."""
    cx0: Number = 0
    cX0: Number = 0
    cp0: Number = 0
    cP0: Number = 0
    cI: Number = 0

    def coefficients(self) -> Tuple[Number, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))

    def __add__(self, other: "CanonicalExpr") -> "CanonicalExpr":
        if not isinstance(other, CanonicalExpr):
            return NotImplemented
        return CanonicalExpr(*(a + b for a, b in zip(self.coefficients(), other.coefficients())))

    def __sub__(self, other: "CanonicalExpr") -> "CanonicalExpr":
        if not isinstance(other, CanonicalExpr):
            return NotImplemented
        return CanonicalExpr(*(a - b for a, b in zip(self.coefficients(), other.coefficients())))

    def __neg__(self) -> "CanonicalExpr":
        return CanonicalExpr(*(-a for a in self.coefficients()))

    def __mul__(self, scalar) -> "CanonicalExpr":
        if not isinstance(scalar, Real):
            return NotImplemented
        return CanonicalExpr(*(scalar * a for a in self.coefficients()))

    __rmul__ = __mul__

    def isclose(self, other: "CanonicalExpr", tol: float = 1e-12) -> bool:
        return all(abs(a - b) <= tol for a, b in zip(self.coefficients(), other.coefficients()))

    def __str__(self) -> str:
        names = ("x̂₀", "X̂₀", "p̂₀", "P̂₀", "Î")
        terms = [f"{float(c):+g}·{n}" for c, n in zip(self.coefficients(), names) if c != 0]
        return " ".join(terms) if terms else "0"


X0 = CanonicalExpr(cx0=1)     # object position x̂₀
XP0 = CanonicalExpr(cX0=1)    # probe position X̂₀
P0 = CanonicalExpr(cp0=1)     # object momentum p̂₀
PP0 = CanonicalExpr(cP0=1)    # probe momentum P̂₀
IDENTITY = CanonicalExpr(cI=1)


def commutator_coefficient(a: CanonicalExpr, b: CanonicalExpr) -> Number:
    """Real c with [a, b] = c·iħ."""
    return a.cx0 * b.cp0 - a.cp0 * b.cx0 + a.cX0 * b.cP0 - a.cP0 * b.cX0


def commutator(a: CanonicalExpr, b: CanonicalExpr, hbar: float = 1.0) -> complex:
    """[a, b] as a complex multiple of Î."""
    return 1j * hbar * float(commutator_coefficient(a, b))


def _coeffs(model: LinearModel, exact: bool):
    if exact and model.exact is not None:
        return model.exact
    return model.coefficients


def heisenberg_positions(model: LinearModel, exact: bool = False) -> Tuple[CanonicalExpr, CanonicalExpr]:
    """(x̂_t, X̂_t) = (α₁x̂₀ + α₂X̂₀, β₁x̂₀ + β₂X̂₀)."""
    a1, a2, b1, b2 = _coeffs(model, exact)
    return CanonicalExpr(cx0=a1, cX0=a2), CanonicalExpr(cx0=b1, cX0=b2)


def heisenberg_momenta(model: LinearModel, exact: bool = False) -> Tuple[CanonicalExpr, CanonicalExpr]:
    """(p̂_t, P̂_t) with the momentum-map coefficients a = Γ(β₂, −β₁), b = Γ(−α₂, α₁)."""
    if exact and model.exact is not None:
        a1, a2, b1, b2 = model.exact
        g = 1 / (a1 * b2 - a2 * b1)
        return (CanonicalExpr(cp0=g * b2, cP0=-g * b1),
                CanonicalExpr(cp0=-g * a2, cP0=g * a1))
    m = momentum_map(model)
    return CanonicalExpr(cp0=m.a1, cP0=m.a2), CanonicalExpr(cp0=m.b1, cP0=m.b2)


def result_operators(model: LinearModel, probe_mean_X0: float = 0.0,
                     exact: bool = False) -> Tuple[CanonicalExpr, CanonicalExpr]:
    """
    Measurement-result operators built from the probe readout:

        (x̂₀)_exp = x̂₀ + (β₂/β₁)(X̂₀ − ⟨X̂₀⟩Î)
        (x̂_t)_exp = x̂_t + (1/(β₁Γ))(X̂₀ − ⟨X̂₀⟩Î)
    """
    if not model.measurable:
        raise Unmeasurable(f"{model} has β₁ = 0; no result operator exists")
    a1, a2, b1, b2 = _coeffs(model, exact)
    gamma = 1 / (a1 * b2 - a2 * b1)
    if exact and model.exact is not None:
        probe_mean_X0 = Fraction(probe_mean_X0)
    shift = XP0 - probe_mean_X0 * IDENTITY
    x_t, _ = heisenberg_positions(model, exact)
    x0_exp = X0 + (b2 / b1) * shift
    xt_exp = x_t + (1 / (b1 * gamma)) * shift
    return x0_exp, xt_exp


def ozawa_result_operators(model: LinearModel, exact: bool = False) -> Tuple[CanonicalExpr, CanonicalExpr]:
    """Ozawa reads the probe position directly: both results equal X̂_t."""
    _, X_t = heisenberg_positions(model, exact)
    return X_t, X_t


def disturbance_operator(model: LinearModel, exact: bool = False) -> CanonicalExpr:
    """p̂_t − p̂₀."""
    p_t, _ = heisenberg_momenta(model, exact)
    return p_t - P0
