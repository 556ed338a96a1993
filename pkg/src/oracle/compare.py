"""Closed-form values against their grid-oracle counterparts for one configuration."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from src.errors import Unmeasurable
from src.measurement import gaussian
from src.measurement.linear_model import LinearModel
from src.measurement.packets import PacketSpec
from src.oracle.conditional import ZERO_TOL, averaged_errors
from src.oracle.grid import GridSpec, GridState, evolve, prepare
from src.oracle.momentum import disturbance_from_state, dp_dis_from_packets

logger = logging.getLogger(__name__)

ORACLE_RTOL = 1e-6


def relative_gap(oracle: float, analytic: float) -> float:
    """|oracle − analytic|/|analytic|, or the absolute gap when the analytic value is zero."""
    if abs(analytic) < ZERO_TOL:
        return abs(oracle - analytic)
    return abs(oracle - analytic) / abs(analytic)


def _heisenberg_rms(state0: GridState, cx0: float, cX0: float, shift: float = 0.0) -> float:
    """⟨(cx0·x̂₀ + cX0·X̂₀ + shift)²⟩^½ from the sampled initial density."""
    g = state0.grid
    q = cx0 * g.x[:, None] + cX0 * g.X[None, :] + shift
    return float(np.sqrt(np.sum(q ** 2 * state0.density()) * g.dx * g.dX))


def oracle_values(state0: GridState, state_t: GridState, model: LinearModel) -> Dict[str, float]:
    """Every grid-side scalar used by the comparison."""
    g = state0.grid
    rho0 = state0.density()
    m = state0.probe_packet.moments().mean_x
    ratio = model.beta2 / model.beta1

    mean_x = float(np.sum(g.x[:, None] * rho0) * g.dx * g.dX)
    # (x̂₀)_exp = x̂₀ + (β₂/β₁)(X̂₀ − ⟨X̂₀⟩)
    est = g.x[:, None] + ratio * (g.X[None, :] - m)
    est_mean = float(np.sum(est * rho0) * g.dx * g.dX)
    sigma_est = float(np.sqrt(np.sum((est - est_mean) ** 2 * rho0) * g.dx * g.dX))

    avg = averaged_errors(state_t, model)
    return {
        "eps_x0": _heisenberg_rms(state0, 0.0, ratio, -ratio * m),
        "eps_xt": avg.eps_xt_direct,
        "dp_dis": dp_dis_from_packets(state0, model),
        "dp_dis_2d": disturbance_from_state(state0, model),
        "sigma_x0exp": sigma_est,
        "eps_ozawa_x0": _heisenberg_rms(state0, model.beta1 - 1.0, model.beta2),
        "eps_ozawa_xt": _heisenberg_rms(state0, model.beta1 - model.alpha1, model.beta2 - model.alpha2),
        "estimate_bias": est_mean - mean_x,
        "eps_x0_averaged": avg.eps_x0_averaged,
        "eps_xt_averaged": avg.eps_xt_averaged,
        "residual_x0": avg.residual_x0,
        "residual_xt": avg.residual_xt,
    }


@dataclass
class OracleComparison:
    """Rows of (quantity, analytic, oracle, gap) plus the averaging-identity residuals."""
    model: LinearModel
    grid: GridSpec
    rows: List[dict] = field(default_factory=list)
    residual_x0: float = 0.0
    residual_xt: float = 0.0

    @property
    def max_gap(self) -> float:
        gaps = [r["gap"] for r in self.rows] + [self.residual_x0, self.residual_xt]
        return float(max(gaps))

    def passed(self, rtol: float = ORACLE_RTOL) -> bool:
        return self.max_gap <= rtol

    def value(self, quantity: str, side: str = "oracle") -> float:
        for r in self.rows:
            if r["quantity"] == quantity:
                return r[side]
        raise KeyError(quantity)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=["quantity", "analytic", "oracle", "gap"])

    def print_report(self) -> None:
        print("=== ANALYTIC vs ORACLE ===")
        print(f"Model: {self.model}")
        print(f"Grid: {self.grid.n_obj}×{self.grid.n_probe}, x∈[{self.grid.x_min:.4g}, {self.grid.x_max:.4g}),"
              f" X∈[{self.grid.X_min:.4g}, {self.grid.X_max:.4g})")
        print(self.to_frame().to_string(index=False, float_format=lambda v: f"{v:.10g}"))
        print(f"Averaged ε(x_t)² residual: {self.residual_xt:.3g}")
        print(f"Averaged ε(x₀)² residual:  {self.residual_x0:.3g}")
        print(f"Max gap: {self.max_gap:.3g}  ({'PASS' if self.passed() else 'FAIL'} at {ORACLE_RTOL:g})")
        print("=" * 40)


def compare(model: LinearModel, obj: PacketSpec, probe: PacketSpec,
            grid: Optional[GridSpec] = None, n: int = 512) -> OracleComparison:
    """Run the oracle for one configuration and line it up against the closed forms."""
    if not model.measurable:
        raise Unmeasurable(f"{model}: β₁ = 0, nothing to compare")
    if grid is None:
        grid = GridSpec.covering(model, obj, probe, n_obj=n)
    state0 = prepare(obj, probe, grid)
    state_t = evolve(state0, model)
    oracle = oracle_values(state0, state_t, model)

    mo, mp = obj.moments(), probe.moments()
    report = gaussian.full_report(model, mo, mp)
    analytic = {
        "eps_x0": report.eps_x0,
        "eps_xt": report.eps_xt,
        "dp_dis": report.dp_dis,
        "dp_dis_2d": report.dp_dis,
        "sigma_x0exp": report.sigma_x0exp,
        "eps_ozawa_x0": report.eps_ozawa_x0,
        "eps_ozawa_xt": report.eps_ozawa_xt,
        "estimate_bias": 0.0,
    }
    rows = [
        {"quantity": k, "analytic": a, "oracle": oracle[k], "gap": relative_gap(oracle[k], a)}
        for k, a in analytic.items()
    ]
    out = OracleComparison(model=model, grid=grid, rows=rows,
                           residual_x0=oracle["residual_x0"], residual_xt=oracle["residual_xt"])
    logger.debug("Oracle comparison for %s: max gap %.3g", model, out.max_gap)
    return out
