"""
Single-particle initial states: closed-form minimal-uncertainty Gaussians
or tabulated amplitudes, and their first/second moments.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.interpolate import CubicSpline

logger = logging.getLogger(__name__)

UNIFORM_SPACING_RTOL = 1e-6


@dataclass(frozen=True)
class MomentSummary:
    """First and second moments of one particle; cov_xp is the symmetrised ⟨{x−x̄, p−p̄}⟩/2."""
    mean_x: float
    mean_p: float
    var_x: float
    var_p: float
    cov_xp: float = 0.0

    @property
    def sigma_x(self) -> float:
        return float(np.sqrt(self.var_x))

    @property
    def sigma_p(self) -> float:
        return float(np.sqrt(self.var_p))

    @property
    def second_x(self) -> float:
        """⟨x̂²⟩."""
        return self.var_x + self.mean_x ** 2

    @property
    def second_p(self) -> float:
        """⟨p̂²⟩."""
        return self.var_p + self.mean_p ** 2

    @property
    def sym_xp(self) -> float:
        """⟨(x̂p̂ + p̂x̂)/2⟩."""
        return self.cov_xp + self.mean_x * self.mean_p

    def is_physical(self, hbar: float = 1.0, rtol: float = 1e-12) -> bool:
        """Robertson–Schrödinger: var_x·var_p − cov_xp² ≥ ħ²/4."""
        if self.var_x < 0 or self.var_p < 0:
            return False
        return self.var_x * self.var_p - self.cov_xp ** 2 >= (hbar ** 2 / 4.0) * (1.0 - rtol)

    @classmethod
    def minimal(cls, mean_x: float, sigma_x: float, mean_p: float = 0.0, hbar: float = 1.0) -> "MomentSummary":
        """Minimal-uncertainty Gaussian moments: σ_p = ħ/(2σ_x)."""
        return cls(mean_x=mean_x, mean_p=mean_p, var_x=sigma_x ** 2, var_p=(hbar / (2.0 * sigma_x)) ** 2)


@dataclass(frozen=True)
class PacketSpec:
    """
    A one-particle wavefunction. kind='gaussian' is a minimal-uncertainty
    packet (mean_x, mean_p, sigma_x); kind='tabulated' carries samples on a
    uniform grid and is evaluated by cubic splines of Re and Im.
    """
    kind: str
    mean_x: float = 0.0
    mean_p: float = 0.0
    sigma_x: float = 1.0
    hbar: float = 1.0
    x: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    values: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("gaussian", "tabulated"):
            raise ValueError(f"Unknown packet kind '{self.kind}'")
        if self.kind == "gaussian" and not self.sigma_x > 0:
            raise ValueError(f"sigma_x must be positive, got {self.sigma_x}")
        if self.kind == "tabulated":
            x = np.asarray(self.x, dtype=float)
            v = np.asarray(self.values, dtype=complex)
            if x.ndim != 1 or x.shape != v.shape or x.size < 4:
                raise ValueError("Tabulated packet needs matching 1D position/amplitude arrays (≥ 4 samples)")
            dx = np.diff(x)
            if np.any(dx <= 0) or not np.allclose(dx, dx[0], rtol=UNIFORM_SPACING_RTOL, atol=0.0):
                raise ValueError("Tabulated packet requires strictly increasing, uniformly spaced positions")
            norm = np.sum(np.abs(v) ** 2) * dx[0]
            if not norm > 0:
                raise ValueError("Tabulated packet has zero norm")
            object.__setattr__(self, "x", x)
            object.__setattr__(self, "values", v / np.sqrt(norm))

    # -- constructors -------------------------------------------------------
    @classmethod
    def gaussian(cls, mean_x: float = 0.0, sigma_x: float = 1.0, mean_p: float = 0.0,
                 hbar: float = 1.0) -> "PacketSpec":
        return cls(kind="gaussian", mean_x=mean_x, mean_p=mean_p, sigma_x=sigma_x, hbar=hbar)

    @classmethod
    def tabulated(cls, x, values, hbar: float = 1.0) -> "PacketSpec":
        return cls(kind="tabulated", x=np.asarray(x), values=np.asarray(values), hbar=hbar)

    @classmethod
    def two_peak(cls, separation: float = 3.0, sigma_x: float = 0.6, half_width: float = 12.0,
                 n: int = 4096, hbar: float = 1.0) -> "PacketSpec":
        """Tabulated superposition of two Gaussians at ±separation/2 (unequal weights)."""
        x = np.linspace(-half_width, half_width, n)
        left = cls.gaussian(-separation / 2.0, sigma_x, hbar=hbar).amplitude(x)
        right = cls.gaussian(separation / 2.0, sigma_x, mean_p=0.5, hbar=hbar).amplitude(x)
        return cls.tabulated(x, left + 0.6 * right, hbar=hbar)

    @classmethod
    def from_file(cls, path: Union[str, Path], hbar: float = 1.0) -> "PacketSpec":
        """Three numeric columns: position, Re(amplitude), Im(amplitude)."""
        data = np.loadtxt(path, ndmin=2)
        if data.shape[1] != 3:
            raise ValueError(f"{path}: expected 3 columns (x, re, im), got {data.shape[1]}")
        return cls.tabulated(data[:, 0], data[:, 1] + 1j * data[:, 2], hbar=hbar)

    def to_file(self, path: Union[str, Path], x: Optional[np.ndarray] = None) -> None:
        x = self.x if x is None else np.asarray(x, dtype=float)
        psi = self.amplitude(x)
        np.savetxt(path, np.column_stack([x, psi.real, psi.imag]), header="x re im")

    # -- evaluation ---------------------------------------------------------
    @property
    def closed_form(self) -> bool:
        return self.kind == "gaussian"

    @property
    def support(self) -> tuple:
        """Interval outside which the amplitude is taken as zero (tabulated) or negligible."""
        if self.kind == "tabulated":
            return float(self.x[0]), float(self.x[-1])
        return self.mean_x - 40.0 * self.sigma_x, self.mean_x + 40.0 * self.sigma_x

    def amplitude(self, x) -> np.ndarray:
        """φ(x) at arbitrary points."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            s = self.sigma_x
            norm = (2.0 * np.pi * s ** 2) ** -0.25
            return norm * np.exp(-((x - self.mean_x) ** 2) / (4.0 * s ** 2) + 1j * self.mean_p * x / self.hbar)
        re, im = self._splines()
        out = re(x) + 1j * im(x)
        lo, hi = self.support
        return np.where((x >= lo) & (x <= hi), out, 0.0)

    def _splines(self):
        cache = self.__dict__.get("_spline_cache")
        if cache is None:
            cache = (CubicSpline(self.x, self.values.real), CubicSpline(self.x, self.values.imag))
            object.__setattr__(self, "_spline_cache", cache)
        return cache

    def moments(self) -> MomentSummary:
        """Closed form for Gaussians; quadrature and a unitary DFT for tabulated packets."""
        if self.kind == "gaussian":
            return MomentSummary.minimal(self.mean_x, self.sigma_x, self.mean_p, hbar=self.hbar)
        from src.oracle.momentum import momentum_density

        dx = self.x[1] - self.x[0]
        rho = np.abs(self.values) ** 2
        mean_x = float(np.sum(self.x * rho) * dx)
        var_x = float(np.sum((self.x - mean_x) ** 2 * rho) * dx)
        p, rho_p, dp = momentum_density(self.x, self.values, self.hbar)
        mean_p = float(np.sum(p * rho_p) * dp)
        var_p = float(np.sum((p - mean_p) ** 2 * rho_p) * dp)
        # ⟨(x̂p̂ + p̂x̂)/2⟩ = ħ∫ x·Im(φ*φ') dx
        dphi = np.gradient(self.values, dx)
        sym = float(self.hbar * np.sum(self.x * np.imag(np.conj(self.values) * dphi)) * dx)
        return MomentSummary(mean_x=mean_x, mean_p=mean_p, var_x=var_x, var_p=var_p,
                             cov_xp=sym - mean_x * mean_p)
