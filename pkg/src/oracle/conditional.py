"""
Readout-conditioned quantities of the evolved state: errors given the
probe result X, the reduced object state, P(X)-weighted averages and the
pushforward density of the pointer estimate.
"""
import logging
from dataclasses import dataclass

import numpy as np

from src.errors import NegligibleProbability, Unmeasurable
from src.measurement.linear_model import LinearModel
from src.oracle.grid import GridState, probe_marginal

logger = logging.getLogger(__name__)

PROBABILITY_FLOOR = 1e-12   # P(X) below this fraction of max P is not conditioned on
ZERO_TOL = 1e-12            # quantities below this are compared absolutely


def _require_measurable(model: LinearModel) -> None:
    if not model.measurable:
        raise Unmeasurable(f"{model}: β₁ = 0, the readout does not determine the object position")


def _probe_mean(state: GridState) -> float:
    return state.probe_packet.moments().mean_x


def _conditional_density(state_t: GridState, X: float):
    """|ψ_t(·, X)|² and P(X); raises NegligibleProbability below the floor."""
    rho = np.abs(state_t.slice_at(X)) ** 2
    p = float(np.sum(rho) * state_t.grid.dx)
    floor = PROBABILITY_FLOOR * float(probe_marginal(state_t).max())
    if p <= floor:
        raise NegligibleProbability(f"P(X={X:g}) = {p:.3g} is below the floor {floor:.3g}")
    return rho, p


def xt_estimate(model: LinearModel, X, probe_mean: float):
    """(x̂_t)_exp as a function of the readout: (α₁/β₁)X − ⟨X̂₀⟩/(β₁Γ)."""
    return model.alpha1 / model.beta1 * X - probe_mean / (model.beta1 * model.gamma)


def x0_estimate(model: LinearModel, X, probe_mean: float):
    """(x̂₀)_exp as a function of the readout: X/β₁ − (β₂/β₁)⟨X̂₀⟩."""
    return X / model.beta1 - model.beta2 / model.beta1 * probe_mean


def conditional_error_xt(state_t: GridState, model: LinearModel, X: float) -> float:
    """ε_X(x_t): RMS distance of x_t from its estimate, given readout X."""
    _require_measurable(model)
    rho, p = _conditional_density(state_t, X)
    x = state_t.grid.x
    sq = np.sum((xt_estimate(model, X, _probe_mean(state_t)) - x) ** 2 * rho) * state_t.grid.dx / p
    return float(np.sqrt(sq))


def conditional_error_x0(state_t: GridState, model: LinearModel, X: float) -> float:
    """ε_X(x₀), with x₀ = Γ(β₂x − α₂X) the pre-image of each grid point."""
    _require_measurable(model)
    rho, p = _conditional_density(state_t, X)
    x = state_t.grid.x
    pre = model.gamma * (model.beta2 * x - model.alpha2 * X)
    sq = np.sum((x0_estimate(model, X, _probe_mean(state_t)) - pre) ** 2 * rho) * state_t.grid.dx / p
    return float(np.sqrt(sq))


@dataclass(frozen=True)
class ConditionalState:
    X: float
    probability: float
    amplitude: np.ndarray
    mean: float
    std: float


def conditional_state(state_t: GridState, X: float) -> ConditionalState:
    """Object amplitude ψ_t(·, X)/√P(X) and its position mean and spread."""
    psi = state_t.slice_at(X)
    rho, p = _conditional_density(state_t, X)
    x, dx = state_t.grid.x, state_t.grid.dx
    mean = float(np.sum(x * rho) * dx / p)
    var = float(np.sum((x - mean) ** 2 * rho) * dx / p)
    return ConditionalState(X=float(X), probability=p, amplitude=psi / np.sqrt(p), mean=mean,
                            std=float(np.sqrt(max(var, 0.0))))


def _relative_gap(value: float, reference: float) -> float:
    if abs(reference) < ZERO_TOL:
        return abs(value - reference)
    return abs(value - reference) / abs(reference)


@dataclass(frozen=True)
class AveragedErrors:
    """
    Errors computed twice: directly on the initial amplitude (Heisenberg form)
    and as P(X)-weighted averages of the conditional errors of the evolved one.
    """
    eps_x0_direct: float
    eps_xt_direct: float
    eps_x0_averaged: float
    eps_xt_averaged: float

    @property
    def residual_x0(self) -> float:
        return _relative_gap(self.eps_x0_averaged ** 2, self.eps_x0_direct ** 2)

    @property
    def residual_xt(self) -> float:
        return _relative_gap(self.eps_xt_averaged ** 2, self.eps_xt_direct ** 2)


def averaged_errors(state_t: GridState, model: LinearModel) -> AveragedErrors:
    _require_measurable(model)
    g = state_t.grid
    m = _probe_mean(state_t)
    b1, b2, gamma = model.beta1, model.beta2, model.gamma

    rho0 = state_t.initial().density()
    shift = (g.X - m)[None, :]
    eps_xt_direct = np.sum((shift / (b1 * gamma)) ** 2 * rho0) * g.dx * g.dX
    eps_x0_direct = np.sum((b2 / b1 * shift) ** 2 * rho0) * g.dx * g.dX

    # ∫P(X)ε_X² dX = ∫∫(estimate(X) − x)²|ψ_t|² dx dX over the evolved amplitude
    rho_t = state_t.density()
    x, X = g.x[:, None], g.X[None, :]
    pre = gamma * (b2 * x - model.alpha2 * X)
    eps_xt_avg = np.sum((xt_estimate(model, X, m) - x) ** 2 * rho_t) * g.dx * g.dX
    eps_x0_avg = np.sum((x0_estimate(model, X, m) - pre) ** 2 * rho_t) * g.dx * g.dX

    out = AveragedErrors(
        eps_x0_direct=float(np.sqrt(eps_x0_direct)),
        eps_xt_direct=float(np.sqrt(eps_xt_direct)),
        eps_x0_averaged=float(np.sqrt(eps_x0_avg)),
        eps_xt_averaged=float(np.sqrt(eps_xt_avg)),
    )
    logger.debug("Averaging residuals: x0 %.3g, xt %.3g", out.residual_x0, out.residual_xt)
    return out


@dataclass(frozen=True)
class BornRuleCheck:
    """Pushforward density of (x₀)_exp on the object nodes against |φ₀|²."""
    y: np.ndarray
    density: np.ndarray
    reference: np.ndarray
    l1_distance: float


def born_rule_density(state_t: GridState, model: LinearModel) -> BornRuleCheck:
    """q(y) = |β₁|·P(β₁y + β₂⟨X̂₀⟩) compared with |φ₀(y)|² in L¹."""
    _require_measurable(model)
    g = state_t.grid
    y = g.x
    readout = model.beta1 * y + model.beta2 * _probe_mean(state_t)
    q = abs(model.beta1) * probe_marginal(state_t, readout)
    phi = state_t.object_packet.amplitude(y)
    ref = np.abs(phi) ** 2
    ref = ref / (np.sum(ref) * g.dx)
    l1 = float(np.sum(np.abs(q - ref)) * g.dx)
    logger.debug("Born-rule L1 distance %.3g under %s", l1, model)
    return BornRuleCheck(y=y, density=q, reference=ref, l1_distance=l1)
