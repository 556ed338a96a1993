"""
Momentum-space densities by unitary DFT.

Convention: φ̃(p) = (2πħ)^(−1/2) ∫ φ(x) e^(−ipx/ħ) dx, sampled at
p_k = 2πħ·fftfreq(n, dx) and returned in ascending order.
"""
import logging
from typing import Tuple

import numpy as np
from scipy import fft

from src.errors import AliasingDetected
from src.measurement.linear_model import LinearModel, momentum_map

logger = logging.getLogger(__name__)

ALIASING_TOL = 1e-10


def _check_edges(rho: np.ndarray, axis: int, label: str) -> None:
    peak = rho.max()
    edges = max(np.take(rho, 0, axis=axis).max(), np.take(rho, -1, axis=axis).max())
    if edges > ALIASING_TOL * peak:
        raise AliasingDetected(
            f"{label}: momentum density at the Nyquist edge is {edges / peak:.3g} of peak; refine the grid")


def momentum_amplitude(x: np.ndarray, psi: np.ndarray, hbar: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """(p, φ̃(p)) on the DFT momentum grid of uniform nodes x."""
    x = np.asarray(x, dtype=float)
    n = x.size
    dx = x[1] - x[0]
    p = 2.0 * np.pi * hbar * fft.fftfreq(n, dx)
    # nodes start at x[0], not 0
    phi = fft.fft(psi) * dx / np.sqrt(2.0 * np.pi * hbar) * np.exp(-1j * p * x[0] / hbar)
    return fft.fftshift(p), fft.fftshift(phi)


def momentum_density(x: np.ndarray, psi: np.ndarray, hbar: float = 1.0) -> Tuple[np.ndarray, np.ndarray, float]:
    """(p, |φ̃(p)|², Δp). Raises AliasingDetected if the density reaches the band edge."""
    p, phi = momentum_amplitude(x, psi, hbar)
    rho = np.abs(phi) ** 2
    _check_edges(rho, 0, "packet")
    return p, rho, float(p[1] - p[0])


def momentum_moments(x: np.ndarray, psi: np.ndarray, hbar: float = 1.0) -> Tuple[float, float]:
    """(⟨p̂⟩, ⟨p̂²⟩) of a normalised 1D amplitude."""
    p, rho, dp = momentum_density(x, psi, hbar)
    return float(np.sum(p * rho) * dp), float(np.sum(p ** 2 * rho) * dp)


def dp_dis_from_packets(state0, model: LinearModel) -> float:
    """
    (Δp)_dis assembled from the per-packet DFT moments of an initial GridState
    and the momentum-map coefficients.
    """
    g = state0.grid
    hbar = model.hbar
    phi = state0.object_packet.amplitude(g.x)
    xi = state0.probe_packet.amplitude(g.X)
    phi = phi / np.sqrt(np.sum(np.abs(phi) ** 2) * g.dx)
    xi = xi / np.sqrt(np.sum(np.abs(xi) ** 2) * g.dX)
    mp, p2 = momentum_moments(g.x, phi, hbar)
    mP, P2 = momentum_moments(g.X, xi, hbar)
    m = momentum_map(model)
    d1 = m.a1 - 1.0
    sq = d1 ** 2 * p2 + m.a2 ** 2 * P2 + 2.0 * d1 * m.a2 * mp * mP
    return float(np.sqrt(max(sq, 0.0)))


def disturbance_from_state(state0, model: LinearModel) -> float:
    """(Δp)_dis = ⟨((a₁−1)p̂₀ + a₂P̂₀)²⟩^½ from the 2D DFT of the initial amplitude."""
    g = state0.grid
    hbar = model.hbar
    p = 2.0 * np.pi * hbar * fft.fftfreq(g.n_obj, g.dx)
    P = 2.0 * np.pi * hbar * fft.fftfreq(g.n_probe, g.dX)
    spectrum = fft.fft2(state0.amplitude)
    rho = np.abs(spectrum) ** 2
    _check_edges(fft.fftshift(rho), 0, "object axis")
    _check_edges(fft.fftshift(rho), 1, "probe axis")
    # Parseval normalisation on the (p, P) lattice
    rho = rho / rho.sum()
    m = momentum_map(model)
    q = (m.a1 - 1.0) * p[:, None] + m.a2 * P[None, :]
    return float(np.sqrt(np.sum(q ** 2 * rho)))
