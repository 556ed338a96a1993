"""
Sweeps that check the error–disturbance relations over many configurations,
the Ozawa-definition demonstration, and audits of bias and linearity.
"""
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.errors import DomainTooSmall, OracleError
from src.measurement import gaussian
from src.measurement.canonical import X0, heisenberg_positions, ozawa_result_operators, result_operators
from src.measurement.linear_model import LinearModel, ozawa
from src.measurement.packets import MomentSummary, PacketSpec
from src.oracle.compare import compare
from src.oracle.grid import GridSpec
from src.verification.plan import SweepPlan

logger = logging.getLogger(__name__)

RELATIONS = ("64", "65", "69")
CSV_COLUMNS = [
    "config_id", "alpha1", "alpha2", "beta1", "beta2", "gamma", "g0", "sigma_x0", "sigma_X0",
    "eps_x0", "eps_xt", "eps_ozawa_x0", "eps_ozawa_xt", "dp_dis", "sigma_x0exp",
    "prod_64", "prod_65", "prod_69", "bound_64", "bound_65", "bound_69",
    "pass_64", "pass_65", "pass_69",
]
ORACLE_COLUMNS = [
    "oracle_eps_x0", "oracle_eps_xt", "oracle_dp_dis", "oracle_sigma_x0exp", "oracle_max_gap", "oracle_n",
    "oracle_status",
]


@dataclass
class VerifierReport:
    """One row per configuration plus aggregates over the rows."""
    frame: pd.DataFrame
    saturation_tol: float = gaussian.SATURATION_TOL

    @property
    def n_rows(self) -> int:
        return len(self.frame)

    def violations(self) -> Dict[str, int]:
        return {r: int((~self.frame[f"pass_{r}"].astype(bool)).sum()) for r in RELATIONS}

    def min_slack(self) -> Dict[str, float]:
        return {r: float(self.frame[f"slack_{r}"].min()) for r in RELATIONS}

    def saturation(self) -> Dict[str, List[int]]:
        """config_ids with |product − bound| < saturation_tol, per relation."""
        return {r: self.frame.loc[self.frame[f"slack_{r}"].abs() < self.saturation_tol, "config_id"]
                .astype(int).tolist() for r in RELATIONS}

    @property
    def passed(self) -> bool:
        return not any(self.violations().values())

    @property
    def oracle_rows(self) -> int:
        if "oracle_max_gap" not in self.frame:
            return 0
        return int(self.frame["oracle_max_gap"].notna().sum())

    def _oracle_count(self, status: str) -> int:
        if "oracle_status" not in self.frame:
            return 0
        return int((self.frame["oracle_status"] == status).sum())

    @property
    def oracle_skipped(self) -> int:
        """Sampled rows whose oracle run failed."""
        return self._oracle_count("failed")

    @property
    def oracle_unresolved(self) -> int:
        """Rows passed over because no grid up to the size cap resolves them."""
        return self._oracle_count("unresolved")

    def oracle_max_gap(self) -> float:
        if not self.oracle_rows:
            return float("nan")
        return float(self.frame["oracle_max_gap"].max())

    def summary(self) -> dict:
        return {
            "rows": self.n_rows,
            "violations": self.violations(),
            "min_slack": self.min_slack(),
            "saturation": self.saturation(),
            "ozawa_below_bound": int(self.frame["ozawa_below_bound"].sum()),
            "oracle_rows": self.oracle_rows,
            "oracle_skipped": self.oracle_skipped,
            "oracle_unresolved": self.oracle_unresolved,
            "oracle_max_gap": self.oracle_max_gap(),
        }

    def to_frame(self) -> pd.DataFrame:
        return self.frame.copy()

    def to_csv(self, path: Union[str, Path]) -> Path:
        cols = CSV_COLUMNS + [c for c in ORACLE_COLUMNS if c in self.frame]
        path = Path(path)
        self.frame[cols].to_csv(path, index=False, float_format="%.17g")
        return path

    def to_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        payload = {"summary": self.summary(), "rows": json.loads(self.frame.to_json(orient="records"))}
        path.write_text(json.dumps(payload, indent=2, default=float))
        return path

    def series(self, x: str, y: str, bound: str, path: Union[str, Path]) -> Path:
        """Plot-ready three-column CSV (x, y, bound), sorted by x."""
        path = Path(path)
        self.frame[[x, y, bound]].sort_values(x).to_csv(path, index=False, float_format="%.17g")
        return path

    def print_report(self) -> None:
        s = self.summary()
        print("=== RELATION SWEEP ===")
        print(f"Configurations: {s['rows']}")
        for r in RELATIONS:
            print(f"  relation {r}: violations {s['violations'][r]}, min slack {s['min_slack'][r]:.3e},"
                  f" saturated {len(s['saturation'][r])}")
        print(f"Ozawa products below ħ/2: {s['ozawa_below_bound']}")
        if s["oracle_rows"] or s["oracle_skipped"]:
            print(f"Oracle rows: {s['oracle_rows']}, max relative gap {s['oracle_max_gap']:.3e}")
            print(f"Oracle failures: {s['oracle_skipped']}, unresolved candidates: {s['oracle_unresolved']}")
        print("=" * 40)


def _row(config, report: gaussian.MeasurementReport) -> dict:
    m = config.model
    row = {
        "config_id": config.config_id,
        "alpha1": m.alpha1, "alpha2": m.alpha2, "beta1": m.beta1, "beta2": m.beta2,
        "gamma": m.gamma, "g0": config.g0,
        "sigma_x0": config.obj.sigma_x, "sigma_X0": config.probe.sigma_x,
        "family": config.family, "model_name": m.name, "hbar": m.hbar,
        "conserves_momentum": m.conserves_momentum,
    }
    d = report.to_dict()
    for key in ("eps_x0", "eps_xt", "eps_ozawa_x0", "eps_ozawa_xt", "dp_dis", "sigma_x0exp",
                "prod_64", "prod_65", "prod_69", "bound_64", "bound_65", "bound_69",
                "pass_64", "pass_65", "pass_69", "prod_ozawa", "ozawa_below_bound", "ozawa_bias"):
        row[key] = d[key]
    for r in RELATIONS:
        row[f"slack_{r}"] = report.slack(r)
    return row


def _packets(config):
    h = config.model.hbar
    obj = PacketSpec.gaussian(config.obj.mean_x, config.obj.sigma_x, config.obj.mean_p, hbar=h)
    probe = PacketSpec.gaussian(config.probe.mean_x, config.probe.sigma_x, config.probe.mean_p, hbar=h)
    return obj, probe


def _oracle_grid(config, n_min: int, n_max: int) -> Optional[GridSpec]:
    """Grid sized to resolve this configuration, or None when the size cap is not enough."""
    obj, probe = _packets(config)
    try:
        return GridSpec.resolving(config.model, obj, probe, n_min=n_min, n_max=n_max)
    except DomainTooSmall as exc:
        logger.debug("Config %d not resolvable: %s", config.config_id, exc)
        return None


def _oracle_columns(config, grid: GridSpec) -> dict:
    obj, probe = _packets(config)
    try:
        cmp = compare(config.model, obj, probe, grid=grid)
    except OracleError as exc:
        logger.warning("Oracle failed for config %d on %d×%d: %s", config.config_id, grid.n_obj,
                       grid.n_probe, exc)
        return {"oracle_n": grid.n_obj, "oracle_status": "failed"}
    return {
        "oracle_eps_x0": cmp.value("eps_x0"),
        "oracle_eps_xt": cmp.value("eps_xt"),
        "oracle_dp_dis": cmp.value("dp_dis"),
        "oracle_sigma_x0exp": cmp.value("sigma_x0exp"),
        "oracle_max_gap": cmp.max_gap,
        "oracle_n": grid.n_obj,
        "oracle_status": "ok",
    }


def verify_relations(plan: SweepPlan, progress: bool = True) -> VerifierReport:
    """Evaluate every configuration of the plan; optionally run the oracle on a subsample."""
    configs = list(plan.configurations())
    skipped = [c.config_id for c in configs if not c.model.measurable]
    if skipped:
        logger.warning("Skipping %d unmeasurable configurations (β₁ = 0): %s", len(skipped), skipped[:10])
        configs = [c for c in configs if c.model.measurable]
    rows = []
    for config in tqdm(configs, desc="configurations", disable=not progress or len(configs) < 100):
        rows.append(_row(config, gaussian.full_report(config.model, config.obj, config.probe)))

    if plan.oracle and configs:
        for row in rows:
            row.update({c: float("nan") for c in ORACLE_COLUMNS})
            row["oracle_status"] = ""
        # walk the configurations in random order, taking the first ones a grid can resolve
        rng = np.random.default_rng(plan.seed + 2)
        chosen = []
        for idx in rng.permutation(len(configs)):
            if len(chosen) == plan.oracle_subsample:
                break
            grid = _oracle_grid(configs[idx], plan.oracle_n, max(plan.oracle_n, plan.oracle_n_max))
            if grid is None:
                rows[idx]["oracle_status"] = "unresolved"
            else:
                chosen.append((int(idx), grid))
        if len(chosen) < plan.oracle_subsample:
            logger.warning("Only %d of %d requested oracle rows are resolvable with n ≤ %d",
                           len(chosen), plan.oracle_subsample, max(plan.oracle_n, plan.oracle_n_max))
        for idx, grid in tqdm(sorted(chosen, key=lambda c: c[0]), desc="oracle", disable=not progress):
            rows[idx].update(_oracle_columns(configs[idx], grid))

    frame = pd.DataFrame(rows)
    report = VerifierReport(frame=frame, saturation_tol=plan.saturation_tol)
    if frame.empty:
        return report
    v = report.violations()
    logger.info("Swept %d configurations: violations %s, min slack %s", report.n_rows, v,
                {k: f"{s:.3e}" for k, s in report.min_slack().items()})
    return report


@dataclass(frozen=True)
class OzawaDemo:
    """Ozawa's product next to ours for the Ozawa interaction."""
    sigma_x0: float
    sigma_X0: float
    hbar: float
    eps_ozawa_x0: float
    eps_xt: float
    dp_dis: float
    prod_ozawa: float
    prod_64: float
    ozawa_below_bound: bool
    relation_64_holds: bool
    oracle_eps_ozawa_x0: float = float("nan")

    def narrative(self) -> str:
        h2 = self.hbar / 2.0
        lines = [
            f"Ozawa interaction, σ(x₀)={self.sigma_x0:g}, σ(X₀)={self.sigma_X0:g}, ħ={self.hbar:g}",
            f"  ε^Oz(x₀)·(Δp)_dis = {self.eps_ozawa_x0:.6g}·{self.dp_dis:.6g} = {self.prod_ozawa:.6g}"
            f" {'<' if self.ozawa_below_bound else '≥'} {h2:g}",
            f"  ε(x_t)·(Δp)_dis   = {self.eps_xt:.6g}·{self.dp_dis:.6g} = {self.prod_64:.6g}"
            f" {'≥' if self.relation_64_holds else '<'} {h2:g}",
        ]
        if not math.isnan(self.oracle_eps_ozawa_x0):
            lines.append(f"  oracle ε^Oz(x₀) = {self.oracle_eps_ozawa_x0:.3g}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def demo_ozawa_violation(obj: MomentSummary, probe: MomentSummary, hbar: float = 1.0,
                         oracle_n: int = 0) -> OzawaDemo:
    """Ozawa's error times the disturbance drops below ħ/2 while ε(x_t)·(Δp)_dis stays above it."""
    model = ozawa(hbar)
    r = gaussian.full_report(model, obj, probe)
    oracle_value = float("nan")
    if oracle_n:
        cmp = compare(model,
                      PacketSpec.gaussian(obj.mean_x, obj.sigma_x, obj.mean_p, hbar=hbar),
                      PacketSpec.gaussian(probe.mean_x, probe.sigma_x, probe.mean_p, hbar=hbar),
                      n=oracle_n)
        oracle_value = cmp.value("eps_ozawa_x0")
    return OzawaDemo(
        sigma_x0=obj.sigma_x, sigma_X0=probe.sigma_x, hbar=hbar,
        eps_ozawa_x0=r.eps_ozawa_x0, eps_xt=r.eps_xt, dp_dis=r.dp_dis,
        prod_ozawa=r.prod_ozawa, prod_64=r.prod_64,
        ozawa_below_bound=r.ozawa_below_bound, relation_64_holds=r.pass_64,
        oracle_eps_ozawa_x0=oracle_value,
    )


def born_rule_audit(model: LinearModel, objects: Sequence[MomentSummary], probe: MomentSummary) -> pd.DataFrame:
    """Bias ⟨estimate⟩ − ⟨x̂₀⟩ of our result operator and of Ozawa's, per object state."""
    x0_exp, _ = result_operators(model, probe.mean_x)
    x_oz, _ = ozawa_result_operators(model)
    rows = []
    for obj in objects:
        ours = gaussian.expectation(x0_exp - X0, obj, probe)
        theirs = gaussian.expectation(x_oz - X0, obj, probe)
        rows.append({
            "mean_x0": obj.mean_x,
            "sigma_x0": obj.sigma_x,
            "our_bias": ours,
            "ozawa_bias": theirs,
            "our_unbiased": abs(ours) <= 1e-12 * max(1.0, abs(obj.mean_x)),
            "ozawa_unbiased": abs(theirs) <= 1e-12 * max(1.0, abs(obj.mean_x)),
        })
    return pd.DataFrame(rows)


def linearity_audit(model: LinearModel, tol: float = 1e-12) -> Dict[str, bool]:
    """
    The conditions that single out a linear interaction: a unique readout
    (β₁ ≠ 0), conservation of total momentum, and result operators that are
    unbiased for arbitrary object states.
    """
    unique = model.measurable
    unbiased = False
    if unique:
        x0_exp, xt_exp = result_operators(model)
        x_t, _ = heisenberg_positions(model)
        # unbiased for every φ₀ when the estimate minus the target has no object part
        d0, dt = x0_exp - X0, xt_exp - x_t
        unbiased = abs(d0.cx0) <= tol and abs(dt.cx0) <= tol and d0.cp0 == 0 and dt.cp0 == 0
    x_oz, _ = ozawa_result_operators(model)
    ozawa_unbiased = abs(x_oz.cx0 - 1.0) <= tol and abs(x_oz.cX0) <= tol
    audit = {
        "unique_readout": unique,
        "conserves_momentum": model.conserves_momentum,
        "result_operators_unbiased": bool(unbiased),
        "ozawa_unbiased": bool(ozawa_unbiased),
    }
    audit["linear_justified"] = all(audit[k] for k in ("unique_readout", "conserves_momentum",
                                                       "result_operators_unbiased"))
    return audit
