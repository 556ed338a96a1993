"""
Object-space POVM induced by reading the pointer

    M̂ = (1/β₁)X̂_t − (β₂/β₁)⟨X̂₀⟩Î = x̂₀ + (β₂/β₁)(X̂₀ − ⟨X̂₀⟩Î).

M̂ is a function of positions only, so Π(Δ) = Tr_probe[(Î⊗|ξ₀⟩⟨ξ₀|)Û†1_Δ(M̂_t)Û]
is diagonal in the object position basis with weight

    w_Δ(x₀) = Prob_{X₀∼|ξ₀|²}[x₀ + (β₂/β₁)(X₀ − ⟨X̂₀⟩) ∈ Δ].
"""
import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad
from scipy.interpolate import interp1d
from scipy.special import ndtr

from src.errors import PartitionGap, Unmeasurable
from src.measurement.linear_model import LinearModel
from src.measurement.packets import PacketSpec
from src.oracle.grid import GridSpec, GridState, evolve, prepare, probe_marginal

logger = logging.getLogger(__name__)

EDGE_TOL = 1e-12
DEFAULT_POVM_N = 128
DEFAULT_BIN_COUNT = 16


@dataclass(frozen=True)
class PovmBin:
    """Π(Δ) for Δ = [lo, hi) of the pointer estimate, as an n_obj × n_obj matrix."""
    lo: float
    hi: float
    operator: np.ndarray = field(repr=False)

    @property
    def weights(self) -> np.ndarray:
        return np.real(np.diag(self.operator))

    def hermitian_error(self) -> float:
        return float(np.max(np.abs(self.operator - self.operator.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.operator)[0])

    def probability(self, phi: np.ndarray, dx: float) -> float:
        """⟨φ|Π(Δ)|φ⟩ for samples φ on the object nodes."""
        return float(np.real(np.vdot(phi, self.operator @ phi)) * dx)


def make_bins(lo: float, hi: float, count: int = DEFAULT_BIN_COUNT) -> List[tuple]:
    """count intervals with inner edges evenly spaced over [lo, hi]; the outer two are unbounded."""
    if count < 1:
        raise ValueError("Need at least one bin")
    if count == 1:
        return [(-np.inf, np.inf)]
    edges = np.linspace(lo, hi, count - 1)
    bounds = np.concatenate([[-np.inf], edges, [np.inf]])
    return [(float(a), float(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def _check_partition(bins: Sequence[tuple]) -> None:
    if not bins:
        raise PartitionGap("Empty partition")
    if bins[0][0] != -np.inf or bins[-1][1] != np.inf:
        raise PartitionGap("Partition must extend to ±∞ so every readout lands in a bin")
    for (a_lo, a_hi), (b_lo, b_hi) in zip(bins[:-1], bins[1:]):
        if abs(a_hi - b_lo) > EDGE_TOL or not a_lo < a_hi:
            raise PartitionGap(f"Bins [{a_lo:g}, {a_hi:g}) and [{b_lo:g}, {b_hi:g}) leave a gap or overlap")
    if not bins[-1][0] < bins[-1][1]:
        raise PartitionGap("Last bin is empty")


def _shift_cdf(probe: PacketSpec):
    """CDF of X₀ − ⟨X̂₀⟩ under |ξ₀|²: closed form for Gaussians, trapezoid for tabulated probes."""
    mean = probe.moments().mean_x
    if probe.closed_form:
        s = probe.sigma_x
        return lambda u: ndtr(u / s)
    rho = np.abs(probe.values) ** 2
    cdf = cumulative_trapezoid(rho, probe.x, initial=0.0)
    cdf = cdf / cdf[-1]
    return interp1d(probe.x - mean, cdf, bounds_error=False, fill_value=(0.0, 1.0))


def _bin_weights(x: np.ndarray, lo: float, hi: float, ratio: float, cdf) -> np.ndarray:
    if ratio == 0.0:
        return ((x >= lo) & (x < hi)).astype(float)
    # x + ratio·u ∈ [lo, hi)
    u_lo, u_hi = (lo - x) / ratio, (hi - x) / ratio
    if ratio < 0:
        u_lo, u_hi = u_hi, u_lo
    return np.asarray(cdf(u_hi), dtype=float) - np.asarray(cdf(u_lo), dtype=float)


def povm(model: LinearModel, probe: PacketSpec, bins: Sequence[tuple], grid: GridSpec) -> List[PovmBin]:
    """Π(Δ) for every bin on the object nodes of grid."""
    if not model.measurable:
        raise Unmeasurable(f"{model}: no pointer observable for β₁ = 0")
    _check_partition(bins)
    ratio = model.beta2 / model.beta1
    cdf = _shift_cdf(probe)
    x = grid.x
    out = []
    for lo, hi in bins:
        w = _bin_weights(x, lo, hi, ratio, cdf)
        out.append(PovmBin(lo=lo, hi=hi, operator=np.diag(w.astype(complex))))
    return out


def readout_interval(model: LinearModel, lo: float, hi: float, probe_mean: float) -> tuple:
    """Readout values X with (X − β₂⟨X̂₀⟩)/β₁ ∈ [lo, hi)."""
    a = model.beta1 * lo + model.beta2 * probe_mean
    b = model.beta1 * hi + model.beta2 * probe_mean
    return (a, b) if a <= b else (b, a)


def readout_probability(state_t: GridState, interval: tuple) -> float:
    """∫ P(X) dX over interval, clipped to the probe axis."""
    g = state_t.grid
    a, b = max(interval[0], g.X_min), min(interval[1], g.X_max)
    if b <= a:
        return 0.0
    value, _ = quad(lambda X: float(probe_marginal(state_t, X)[0]), a, b,
                    limit=200, epsabs=1e-13, epsrel=1e-10)
    return float(value)


@dataclass
class PovmReport:
    completeness_residual: float
    min_eigenvalue: float
    hermitian_error: float
    bins: List[PovmBin] = field(repr=False)
    probabilities: List[float]
    readout_probabilities: List[float]

    @property
    def probability_residual(self) -> float:
        return float(np.max(np.abs(np.array(self.probabilities) - np.array(self.readout_probabilities))))

    def to_dict(self) -> dict:
        return {
            "completeness_residual": self.completeness_residual,
            "min_eigenvalue": self.min_eigenvalue,
            "hermitian_error": self.hermitian_error,
            "probability_residual": self.probability_residual,
            "bins": [
                {"lo": b.lo, "hi": b.hi, "probability": p, "readout_probability": r}
                for b, p, r in zip(self.bins, self.probabilities, self.readout_probabilities)
            ],
        }


def povm_report(model: LinearModel, obj: PacketSpec, probe: PacketSpec,
                bins: Sequence[tuple], grid: GridSpec) -> PovmReport:
    """Completeness, positivity and agreement of ⟨φ₀|Π(Δ)|φ₀⟩ with the readout probabilities."""
    elements = povm(model, probe, bins, grid)
    total = sum(b.operator for b in elements)
    completeness = float(np.linalg.norm(total - np.eye(grid.n_obj), ord=2))

    state_t = evolve(prepare(obj, probe, grid), model)
    phi = obj.amplitude(grid.x)
    phi = phi / np.sqrt(np.sum(np.abs(phi) ** 2) * grid.dx)
    mean = probe.moments().mean_x
    probs = [b.probability(phi, grid.dx) for b in elements]
    readout = [readout_probability(state_t, readout_interval(model, b.lo, b.hi, mean)) for b in elements]

    report = PovmReport(
        completeness_residual=completeness,
        min_eigenvalue=min(b.min_eigenvalue() for b in elements),
        hermitian_error=max(b.hermitian_error() for b in elements),
        bins=elements,
        probabilities=probs,
        readout_probabilities=readout,
    )
    logger.info("POVM %d bins: completeness %.3g, min eig %.3g, probability residual %.3g",
                len(elements), report.completeness_residual, report.min_eigenvalue, report.probability_residual)
    return report
