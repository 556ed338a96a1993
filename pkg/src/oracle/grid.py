"""
Two-particle wavefunction on a uniform (x₀, X₀) grid.

The interaction is a point transform of configuration space, so the evolved
amplitude is the initial one read off at the pre-image point:

    ψ_t(x, X) = √|Γ|·φ₀(Γ(β₂x − α₂X))·ξ₀(Γ(−β₁x + α₁X)).

Both packets are evaluated directly at those points: closed-form packets
exactly, tabulated packets through their splines.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.errors import DomainTooSmall
from src.measurement.linear_model import LinearModel, make_model
from src.measurement.packets import PacketSpec

logger = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-12     # boundary density / peak density
NORM_LEAK_TOL = 1e-8     # |norm − 1| after evolution
COVERAGE_SIGMAS = 10.0
RESOLUTION_FACTOR = 1.0  # thinnest mapped width / largest spacing
SIZING_MARGIN = 2.0      # thinnest width / spacing targeted when choosing n; keeps the DFT edge clean
ORACLE_N_MAX = 1024


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform nodes x_min + k·dx, k = 0..n−1 (x_max excluded), per axis."""
    n_obj: int
    n_probe: int
    x_min: float
    x_max: float
    X_min: float
    X_max: float

    def __post_init__(self):
        for label, n in (("n_obj", self.n_obj), ("n_probe", self.n_probe)):
            if not _is_power_of_two(int(n)):
                raise ValueError(f"{label} must be a power of two, got {n}")
        if not (self.x_max > self.x_min and self.X_max > self.X_min):
            raise ValueError("Grid bounds must satisfy min < max on both axes")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_obj

    @property
    def dX(self) -> float:
        return (self.X_max - self.X_min) / self.n_probe

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_obj)

    @property
    def X(self) -> np.ndarray:
        return self.X_min + self.dX * np.arange(self.n_probe)

    @property
    def n_values(self) -> int:
        """Complex samples held by one GridState on this grid."""
        return self.n_obj * self.n_probe

    @classmethod
    def symmetric(cls, half_width: float, n: int, n_probe: Optional[int] = None) -> "GridSpec":
        n_probe = n if n_probe is None else n_probe
        return cls(n, n_probe, -half_width, half_width, -half_width, half_width)

    @staticmethod
    def _boxes(model: LinearModel, obj: PacketSpec, probe: PacketSpec, sigmas: float):
        mo, mp = obj.moments(), probe.moments()
        half = sigmas * max(mo.sigma_x, mp.sigma_x)
        lo = np.array([mo.mean_x - half, mp.mean_x - half])
        hi = np.array([mo.mean_x + half, mp.mean_x + half])
        corners = np.array([[a, b] for a in (lo[0], hi[0]) for b in (lo[1], hi[1])])
        mapped = corners @ model.position_matrix().T
        cov = model.position_matrix() @ np.diag([mo.var_x, mp.var_x]) @ model.position_matrix().T
        thinnest = float(np.sqrt(max(np.linalg.eigvalsh(cov)[0], 0.0)))
        thinnest = min(thinnest, mo.sigma_x, mp.sigma_x)
        return (np.minimum(lo, mapped.min(axis=0)), np.maximum(hi, mapped.max(axis=0)), thinnest)

    @classmethod
    def covering(cls, model: LinearModel, obj: PacketSpec, probe: PacketSpec,
                 n_obj: int = 512, n_probe: Optional[int] = None,
                 sigmas: float = COVERAGE_SIGMAS) -> "GridSpec":
        """Smallest grid whose box holds both packets and their images, then checked for resolution."""
        n_probe = n_obj if n_probe is None else n_probe
        lo, hi, _ = cls._boxes(model, obj, probe, sigmas)
        grid = cls(n_obj, n_probe, float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1]))
        ok, message = grid.check_coverage(model, obj, probe, sigmas)
        if not ok:
            raise DomainTooSmall(message)
        logger.debug("Covering grid x∈[%.3g, %.3g), X∈[%.3g, %.3g), %d×%d",
                     grid.x_min, grid.x_max, grid.X_min, grid.X_max, n_obj, n_probe)
        return grid

    @classmethod
    def resolving(cls, model: LinearModel, obj: PacketSpec, probe: PacketSpec,
                  n_min: int = 512, n_max: int = ORACLE_N_MAX,
                  sigmas: float = COVERAGE_SIGMAS) -> "GridSpec":
        """Covering grid with the smallest power-of-two n ≥ n_min that resolves the thinnest width."""
        lo, hi, thinnest = cls._boxes(model, obj, probe, sigmas)
        span = float(np.max(hi - lo))
        n = n_min
        while n < n_max and span / n > thinnest / SIZING_MARGIN:
            n *= 2
        if span / n > thinnest / SIZING_MARGIN:
            raise DomainTooSmall(f"Thinnest width {thinnest:.3g} over a span of {span:.3g} needs more than "
                                 f"{n_max} nodes per axis")
        return cls.covering(model, obj, probe, n_obj=n, sigmas=sigmas)

    def check_coverage(self, model: LinearModel, obj: PacketSpec, probe: PacketSpec,
                       sigmas: float = COVERAGE_SIGMAS) -> Tuple[bool, str]:
        """Coverage of initial and mapped boxes, and resolution of the thinnest mapped width."""
        lo, hi, thinnest = self._boxes(model, obj, probe, sigmas)
        eps = 1e-9 * max(1.0, float(np.max(np.abs(np.concatenate([lo, hi])))))
        if lo[0] < self.x_min - eps or hi[0] > self.x_max + eps:
            return False, f"Object axis [{self.x_min:g}, {self.x_max:g}) misses [{lo[0]:.3g}, {hi[0]:.3g}]"
        if lo[1] < self.X_min - eps or hi[1] > self.X_max + eps:
            return False, f"Probe axis [{self.X_min:g}, {self.X_max:g}) misses [{lo[1]:.3g}, {hi[1]:.3g}]"
        spacing = max(self.dx, self.dX)
        if thinnest < RESOLUTION_FACTOR * spacing:
            return False, (f"Thinnest width {thinnest:.3g} is below {RESOLUTION_FACTOR:g}× "
                           f"the grid spacing {spacing:.3g}; increase n")
        return True, "OK"


def _pre_image(model: Optional[LinearModel], x, X):
    if model is None:
        return x, X, 1.0
    g = model.gamma
    return (g * (model.beta2 * x - model.alpha2 * X),
            g * (-model.beta1 * x + model.alpha1 * X),
            np.sqrt(abs(g)))


@dataclass(frozen=True)
class GridState:
    """
    Sampled amplitude ψ(x-index, X-index). model is None for the initial state.
    scale is the factor that normalised the sampled initial product state.
    """
    amplitude: np.ndarray = field(repr=False)
    grid: GridSpec
    object_packet: PacketSpec = field(repr=False)
    probe_packet: PacketSpec = field(repr=False)
    model: Optional[LinearModel] = None
    scale: float = 1.0
    norm: float = 1.0

    def evaluate(self, x, X) -> np.ndarray:
        """ψ at arbitrary (broadcast) points, from the packets."""
        x0, X0, jac = _pre_image(self.model, np.asarray(x, dtype=float), np.asarray(X, dtype=float))
        return self.scale * jac * self.object_packet.amplitude(x0) * self.probe_packet.amplitude(X0)

    def slice_at(self, X: float) -> np.ndarray:
        """ψ(x, X) on the object nodes at an arbitrary probe value X."""
        return self.evaluate(self.grid.x, np.full(self.grid.n_obj, float(X)))

    def density(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    def initial(self) -> "GridState":
        """The un-evolved product state on the same grid and normalisation."""
        if self.model is None:
            return self
        xx, XX = np.meshgrid(self.grid.x, self.grid.X, indexing="ij")
        psi = self.scale * self.object_packet.amplitude(xx) * self.probe_packet.amplitude(XX)
        return GridState(psi, self.grid, self.object_packet, self.probe_packet, None, self.scale,
                         _norm(psi, self.grid))


def _norm(psi: np.ndarray, grid: GridSpec) -> float:
    return float(np.sum(np.abs(psi) ** 2) * grid.dx * grid.dX)


def _boundary_ratio(psi: np.ndarray) -> float:
    rho = np.abs(psi) ** 2
    edges = max(rho[0, :].max(), rho[-1, :].max(), rho[:, 0].max(), rho[:, -1].max())
    return float(edges / rho.max())


def prepare(obj: PacketSpec, probe: PacketSpec, grid: GridSpec) -> GridState:
    """Sample φ₀(x)ξ₀(X) on the grid and renormalise. Raises DomainTooSmall at a populated boundary."""
    phi = obj.amplitude(grid.x)
    xi = probe.amplitude(grid.X)
    psi = phi[:, None] * xi[None, :]
    if not np.any(psi):
        raise DomainTooSmall("Initial state vanishes on the grid")
    ratio = _boundary_ratio(psi)
    if ratio > BOUNDARY_TOL:
        raise DomainTooSmall(f"Boundary density is {ratio:.3g} of peak (limit {BOUNDARY_TOL:g}); widen the domain")
    raw = _norm(psi, grid)
    scale = 1.0 / np.sqrt(raw)
    logger.debug("Prepared %d×%d state, sampled norm %.12f", grid.n_obj, grid.n_probe, raw)
    return GridState(psi * scale, grid, obj, probe, None, scale, 1.0)


def _compose(outer: LinearModel, inner: Optional[LinearModel]) -> LinearModel:
    if inner is None:
        return outer
    m = outer.position_matrix() @ inner.position_matrix()
    return make_model(m[0, 0], m[0, 1], m[1, 0], m[1, 1], hbar=outer.hbar, name=f"{outer.name}∘{inner.name}")


def evolve(state: GridState, model: LinearModel) -> GridState:
    """Apply the point transform of model; raises DomainTooSmall if probability leaves the grid."""
    total = _compose(model, state.model)
    g = state.grid
    xx, XX = np.meshgrid(g.x, g.X, indexing="ij")
    x0, X0, jac = _pre_image(total, xx, XX)
    psi = state.scale * jac * state.object_packet.amplitude(x0) * state.probe_packet.amplitude(X0)
    norm = _norm(psi, g)
    if abs(norm - 1.0) > NORM_LEAK_TOL:
        raise DomainTooSmall(f"Evolved norm {norm:.10f} under {total}; probability left the grid")
    logger.debug("Evolved under %s, norm %.12f", total, norm)
    return GridState(psi, g, state.object_packet, state.probe_packet, total, state.scale, norm)


def probe_marginal(state: GridState, X: Optional[np.ndarray] = None) -> np.ndarray:
    """P(X) = ∫|ψ(x, X)|²dx on the probe nodes, or at arbitrary X values."""
    if X is None:
        return np.sum(state.density(), axis=0) * state.grid.dx
    X = np.atleast_1d(np.asarray(X, dtype=float))
    psi = state.evaluate(state.grid.x[:, None], X[None, :])
    return np.sum(np.abs(psi) ** 2, axis=0) * state.grid.dx
