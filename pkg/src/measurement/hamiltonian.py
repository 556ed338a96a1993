"""
Quadratic interaction Hamiltonians and their integration into linear maps.

With ẑ = (x̂₀, X̂₀, p̂₀, P̂₀), [ẑ_j, ẑ_k] = iħJ_jk and Ĥ = ½ ẑᵀHẑ (symmetrised
ordering), the Heisenberg equations close on the linear span of ẑ:

    dẑ/dt = (i/ħ)[Ĥ, ẑ] = J·H·ẑ,

so the evolution over Kt = g₀ is the 4×4 matrix exp(g₀·J·H). The ordering
constant of the symmetrisation only shifts Ĥ by a multiple of Î and drops
out of the commutator.
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.linalg import expm

from src.errors import NonUnitaryResult, PositionMomentumMixing, UnitarityViolation
from src.measurement.linear_model import LinearModel, MomentumMap, make_model

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
MIXING_TOL = 1e-10
NILPOTENT_TOL = 1e-12    # max |A⁴| relative to max(1, max|A|)⁴
BASIS = ("x0", "X0", "p0", "P0")
_INDEX = {name: i for i, name in enumerate(BASIS)}

# symplectic form for the ordering (x₀, X₀, p₀, P₀)
J = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """Ĥ/K = ½ Σ H_ij ẑ_i ẑ_j over (x₀, X₀, p₀, P₀); g0 = Kt."""
    matrix: np.ndarray
    g0: float = 1.0
    name: str = "custom"

    def __post_init__(self):
        h = np.asarray(self.matrix, dtype=float)
        if h.shape != (4, 4):
            raise ValueError(f"Hamiltonian matrix must be 4×4, got {h.shape}")
        if not np.allclose(h, h.T, atol=SYMMETRY_TOL, rtol=0.0):
            raise ValueError("Hamiltonian matrix must be symmetric")
        object.__setattr__(self, "matrix", h)

    @classmethod
    def from_terms(cls, terms: dict, g0: float = 1.0, name: str = "custom") -> "QuadraticHamiltonian":
        """
        Build from bilinear terms, e.g. {("x0", "P0"): 1.0} for x̂₀P̂₀.
        A product âb̂ is read as (âb̂ + b̂â)/2.
        """
        h = np.zeros((4, 4))
        for (a, b), c in terms.items():
            i, j = _INDEX[a], _INDEX[b]
            if i == j:
                h[i, i] += 2.0 * c
            else:
                h[i, j] += c
                h[j, i] += c
        return cls(h, g0=g0, name=name)

    def generator(self) -> np.ndarray:
        """J·H, the matrix of the linear Heisenberg equations per unit Kt."""
        return J @ self.matrix


def von_neumann_hamiltonian(g0: float = 1.0) -> QuadraticHamiltonian:
    """Ĥ = Kx̂₀P̂₀."""
    return QuadraticHamiltonian.from_terms({("x0", "P0"): 1.0}, g0=g0, name="von_neumann")


def ozawa_hamiltonian(g0: float = 1.0) -> QuadraticHamiltonian:
    """Ĥ = Kπ/(3√3)·(2x̂₀P̂₀ − 2p̂₀X̂₀ + x̂₀p̂₀ − X̂₀P̂₀)."""
    c = math.pi / (3.0 * math.sqrt(3.0))
    terms = {
        ("x0", "P0"): 2.0 * c,
        ("p0", "X0"): -2.0 * c,
        ("x0", "p0"): c,
        ("X0", "P0"): -c,
    }
    return QuadraticHamiltonian.from_terms(terms, g0=g0, name="ozawa")


def momentum_conserving_hamiltonian(g0: float = 1.0) -> QuadraticHamiltonian:
    """Ĥ = K(p̂₀ + P̂₀)(X̂₀ − x̂₀)."""
    terms = {
        ("p0", "X0"): 1.0,
        ("p0", "x0"): -1.0,
        ("P0", "X0"): 1.0,
        ("P0", "x0"): -1.0,
    }
    return QuadraticHamiltonian.from_terms(terms, g0=g0, name="momentum_conserving")


def is_nilpotent(a: np.ndarray, tol: float = NILPOTENT_TOL) -> bool:
    """A⁴ = 0 up to roundoff on the scale of the entries of A."""
    scale = max(1.0, float(np.max(np.abs(a)))) ** 4
    return float(np.max(np.abs(np.linalg.matrix_power(a, 4)))) <= tol * scale


def phase_space_map(h: QuadraticHamiltonian) -> np.ndarray:
    """
    exp(g₀·J·H). Nilpotent generators (the von Neumann and momentum-conserving
    couplings) are summed exactly; the rest go through scipy's Padé
    scaling-and-squaring expm.
    """
    a = h.g0 * h.generator()
    if is_nilpotent(a):
        term = np.eye(4)
        total = np.eye(4)
        for k in range(1, 4):
            term = term @ a / k
            total = total + term
        return total
    return expm(a)


def integrate_hamiltonian(h: QuadraticHamiltonian, hbar: float = 1.0) -> Tuple[LinearModel, MomentumMap]:
    """Integrate the Heisenberg equations over Kt = g0 into position and momentum maps."""
    s = phase_space_map(h)
    mixing = max(np.max(np.abs(s[:2, 2:])), np.max(np.abs(s[2:, :2])))
    if mixing > MIXING_TOL:
        raise PositionMomentumMixing(
            f"{h.name}: positions and momenta mix (max off-block {mixing:.3g}); not a point transform")
    (a1, a2), (b1, b2) = s[:2, :2]
    try:
        model = make_model(a1, a2, b1, b2, hbar=hbar, name=f"{h.name}(g0={h.g0:g})")
    except UnitarityViolation as exc:
        raise NonUnitaryResult(f"Integrated map of {h.name} is not unitary: {exc}") from exc
    (m_a1, m_a2), (m_b1, m_b2) = s[2:, 2:]
    logger.debug("Integrated %s → %s", h.name, model)
    return model, MomentumMap(a1=m_a1, a2=m_a2, b1=m_b1, b2=m_b2)
