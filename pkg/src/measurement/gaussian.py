"""
Closed-form measurement errors, momentum disturbance and uncertainty
relations for a linear model acting on a product state |φ₀, ξ₀⟩.

Under a linear map every quantity is a first or second moment of a linear
combination of x̂₀, X̂₀, p̂₀, P̂₀, so moment summaries of the two packets are
enough. The relations checked are

    ε(x_t)·(Δp)_dis ≥ ħ/2,   ε(x₀)·(Δp)_dis ≥ |β₂|ħ/2,   σ((x₀)_exp)·(Δp)_dis ≥ ħ/2,

and Ozawa's product ε^Ozawa(x₀)·(Δp)_dis is reported alongside.
"""
import logging
import math
from dataclasses import asdict, dataclass, fields
from typing import Dict, Optional, Tuple

from src.errors import Unmeasurable
from src.measurement.canonical import (
    CanonicalExpr, X0, commutator_coefficient, disturbance_operator, heisenberg_positions,
    ozawa_result_operators, result_operators,
)
from src.measurement.linear_model import LinearModel, momentum_map
from src.measurement.packets import MomentSummary

logger = logging.getLogger(__name__)

RELATION_TOL = 1e-12    # relative slack allowed before a relation counts as failed
SATURATION_TOL = 1e-9   # |product − bound| below this counts as saturation


def _require_measurable(model: LinearModel) -> None:
    if not model.measurable:
        raise Unmeasurable(f"{model} has β₁ = 0 and cannot measure the object position")


def expectation(expr: CanonicalExpr, obj: MomentSummary, probe: MomentSummary) -> float:
    """⟨expr⟩ in the product state."""
    return (float(expr.cx0) * obj.mean_x + float(expr.cp0) * obj.mean_p
            + float(expr.cX0) * probe.mean_x + float(expr.cP0) * probe.mean_p + float(expr.cI))


def second_moment(expr: CanonicalExpr, obj: MomentSummary, probe: MomentSummary) -> float:
    """⟨expr²⟩ in the product state, with symmetrised x̂p̂ cross terms."""
    ux, up, vx, vp, c = (float(expr.cx0), float(expr.cp0), float(expr.cX0), float(expr.cP0), float(expr.cI))
    a_mean = ux * obj.mean_x + up * obj.mean_p
    b_mean = vx * probe.mean_x + vp * probe.mean_p
    a_sq = ux ** 2 * obj.second_x + up ** 2 * obj.second_p + 2.0 * ux * up * obj.sym_xp
    b_sq = vx ** 2 * probe.second_x + vp ** 2 * probe.second_p + 2.0 * vx * vp * probe.sym_xp
    return a_sq + b_sq + c ** 2 + 2.0 * a_mean * b_mean + 2.0 * c * (a_mean + b_mean)


def rms(expr: CanonicalExpr, obj: MomentSummary, probe: MomentSummary) -> float:
    """⟨expr²⟩^½."""
    return math.sqrt(max(second_moment(expr, obj, probe), 0.0))


def std(expr: CanonicalExpr, obj: MomentSummary, probe: MomentSummary) -> float:
    mean = expectation(expr, obj, probe)
    return math.sqrt(max(second_moment(expr, obj, probe) - mean ** 2, 0.0))


def robertson_bound(a: CanonicalExpr, b: CanonicalExpr, hbar: float = 1.0) -> float:
    """|⟨[A, B]⟩|/2, the lower bound of σ(A)⟨B²⟩^½ and of ⟨A²⟩^½⟨B²⟩^½."""
    return 0.5 * hbar * abs(float(commutator_coefficient(a, b)))


# -- the scalars --------------------------------------------------------------

def eps_x0(model: LinearModel, probe: MomentSummary) -> float:
    """ε(x₀) = |β₂/β₁|·σ(X₀)."""
    _require_measurable(model)
    return abs(model.beta2 / model.beta1) * probe.sigma_x


def eps_xt(model: LinearModel, probe: MomentSummary) -> float:
    """ε(x_t) = σ(X₀)/|β₁|."""
    _require_measurable(model)
    return probe.sigma_x / abs(model.beta1)


def dp_dis(model: LinearModel, obj: MomentSummary, probe: MomentSummary) -> float:
    """(Δp)_dis = ⟨((a₁−1)p̂₀ + a₂P̂₀)²⟩^½."""
    m = momentum_map(model)
    d1 = m.a1 - 1.0
    sq = (d1 ** 2 * obj.second_p + m.a2 ** 2 * probe.second_p
          + 2.0 * d1 * m.a2 * obj.mean_p * probe.mean_p)
    return math.sqrt(max(sq, 0.0))


def sigma_x0exp(model: LinearModel, obj: MomentSummary, probe: MomentSummary) -> float:
    """σ((x₀)_exp) = (σ(x₀)² + ε(x₀)²)^½."""
    return math.sqrt(obj.var_x + eps_x0(model, probe) ** 2)


def eps_ozawa_x0(model: LinearModel, obj: MomentSummary, probe: MomentSummary) -> Tuple[float, float]:
    """
    ε^Ozawa(x₀) = ⟨(X̂_t − x̂₀)²⟩^½ and its bias ⟨X̂_t⟩ − ⟨x̂₀⟩.
    The squared error equals (β₁−1)²σ(x₀)² + β₂²σ(X₀)² + bias².
    """
    x_ozawa, _ = ozawa_result_operators(model)
    diff = x_ozawa - X0
    bias = (model.beta1 - 1.0) * obj.mean_x + model.beta2 * probe.mean_x
    return rms(diff, obj, probe), bias


def eps_ozawa_xt(model: LinearModel, obj: MomentSummary, probe: MomentSummary) -> float:
    """Resolution ⟨(X̂_t − x̂_t)²⟩^½."""
    x_t, X_t = heisenberg_positions(model)
    return rms(X_t - x_t, obj, probe)


def eigenstate_predictions(model: LinearModel, x0: float, X0_value: float,
                           probe_mean_X0: Optional[float] = None) -> Dict[str, float]:
    """
    Readouts for an initial eigenstate |x₀, X₀⟩. Our estimate subtracts the
    known probe offset; Ozawa's takes X = β₁x₀ + β₂X₀ at face value.
    """
    _require_measurable(model)
    mean = X0_value if probe_mean_X0 is None else probe_mean_X0
    readout = model.beta1 * x0 + model.beta2 * X0_value
    return {
        "true_x0": x0,
        "readout_X": readout,
        "estimate_x0": readout / model.beta1 - (model.beta2 / model.beta1) * mean,
        "ozawa_x0": readout,
    }


def resolution_zero_model_is_unitary(alpha1: float, alpha2: float, hbar: float = 1.0) -> bool:
    """
    Zero resolution needs X̂_t = x̂_t, i.e. β = α. The position map then has
    equal rows, det = 0, and no unitary evolution realises it.
    """
    ok, message = LinearModel(alpha1, alpha2, alpha1, alpha2, hbar=hbar, name="zero_resolution").validate()
    logger.debug("β = α = (%g, %g): %s", alpha1, alpha2, message)
    return ok


# -- report -------------------------------------------------------------------

@dataclass(frozen=True)
class MeasurementReport:
    """All derived scalars for one (model, object, probe) configuration."""
    model_name: str
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    gamma: float
    hbar: float
    eps_x0: float
    eps_xt: float
    eps_ozawa_x0: float
    eps_ozawa_xt: float
    dp_dis: float
    sigma_x0exp: float
    ozawa_bias: float
    prod_64: float
    prod_65: float
    prod_69: float
    prod_ozawa: float
    bound_64: float
    bound_65: float
    bound_69: float
    pass_64: bool
    pass_65: bool
    pass_69: bool
    ozawa_below_bound: bool
    physical_states: bool

    def slack(self, relation: str) -> float:
        """product − bound for relation '64', '65', '69' or 'ozawa'."""
        if relation == "ozawa":
            return self.prod_ozawa - self.bound_64
        return getattr(self, f"prod_{relation}") - getattr(self, f"bound_{relation}")

    def saturated(self, relation: str, tol: float = SATURATION_TOL) -> bool:
        return abs(self.slack(relation)) < tol

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MeasurementReport":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"Unknown report keys: {sorted(unknown)}")
        return cls(**data)


def _passes(product: float, bound: float, hbar: float) -> bool:
    return product >= bound - RELATION_TOL * max(bound, hbar)


class MeasurementAnalyzer:
    """Evaluate errors, disturbance and the uncertainty relations for one configuration."""

    def __init__(self, model: LinearModel, obj: MomentSummary, probe: MomentSummary):
        self.model = model
        self.obj = obj
        self.probe = probe

    @property
    def physical_states(self) -> bool:
        h = self.model.hbar
        return self.obj.is_physical(h) and self.probe.is_physical(h)

    def commutators(self) -> Dict[str, float]:
        """Coefficients c with [A, p̂_t − p̂₀] = c·iħ for the three result differences."""
        x0_exp, xt_exp = result_operators(self.model, self.probe.mean_x)
        x_t, _ = heisenberg_positions(self.model)
        dist = disturbance_operator(self.model)
        return {
            "xt_exp_minus_xt": float(commutator_coefficient(xt_exp - x_t, dist)),
            "x0_exp_minus_x0": float(commutator_coefficient(x0_exp - X0, dist)),
            "x0_exp": float(commutator_coefficient(x0_exp, dist)),
        }

    def report(self) -> MeasurementReport:
        model, obj, probe = self.model, self.obj, self.probe
        _require_measurable(model)
        if not self.physical_states:
            logger.warning("Moment summaries violate σ_x·σ_p ≥ ħ/2; relations may fail (hypothetical states)")
        h = model.hbar
        e0 = eps_x0(model, probe)
        et = eps_xt(model, probe)
        eo0, bias = eps_ozawa_x0(model, obj, probe)
        eot = eps_ozawa_xt(model, obj, probe)
        dp = dp_dis(model, obj, probe)
        sx = sigma_x0exp(model, obj, probe)
        bound_64 = h / 2.0
        bound_65 = abs(model.beta2) * h / 2.0
        bound_69 = h / 2.0
        prod_64, prod_65, prod_69 = et * dp, e0 * dp, sx * dp
        prod_ozawa = eo0 * dp
        return MeasurementReport(
            model_name=model.name,
            alpha1=model.alpha1, alpha2=model.alpha2, beta1=model.beta1, beta2=model.beta2,
            gamma=model.gamma, hbar=h,
            eps_x0=e0, eps_xt=et, eps_ozawa_x0=eo0, eps_ozawa_xt=eot,
            dp_dis=dp, sigma_x0exp=sx, ozawa_bias=bias,
            prod_64=prod_64, prod_65=prod_65, prod_69=prod_69, prod_ozawa=prod_ozawa,
            bound_64=bound_64, bound_65=bound_65, bound_69=bound_69,
            pass_64=_passes(prod_64, bound_64, h),
            pass_65=_passes(prod_65, bound_65, h),
            pass_69=_passes(prod_69, bound_69, h),
            ozawa_below_bound=prod_ozawa < bound_64,
            physical_states=self.physical_states,
        )

    def evaluate_relations(self) -> Tuple[Dict[str, bool], Dict[str, float]]:
        """Return (checks, metrics) for this configuration."""
        r = self.report()
        checks = {
            "relation_64_ok": r.pass_64,
            "relation_65_ok": r.pass_65,
            "relation_69_ok": r.pass_69,
            "ozawa_product_ok": not r.ozawa_below_bound,
            "physical_states": r.physical_states,
        }
        metrics = {
            "eps_x0": r.eps_x0,
            "eps_xt": r.eps_xt,
            "eps_ozawa_x0": r.eps_ozawa_x0,
            "eps_ozawa_xt": r.eps_ozawa_xt,
            "dp_dis": r.dp_dis,
            "sigma_x0exp": r.sigma_x0exp,
            "ozawa_bias": r.ozawa_bias,
            "slack_64": r.slack("64"),
            "slack_65": r.slack("65"),
            "slack_69": r.slack("69"),
            "slack_ozawa": r.slack("ozawa"),
        }
        return checks, metrics

    def print_report(self) -> None:
        """Print a human-readable analysis report."""
        checks, metrics = self.evaluate_relations()
        r = self.report()
        print("=== MEASUREMENT ANALYSIS ===")
        print(f"Model: {self.model}")
        print(f"  Γ = {r.gamma:g}, conserves momentum: {self.model.conserves_momentum}")
        print(f"Object: ⟨x⟩={self.obj.mean_x:g}, σ(x₀)={self.obj.sigma_x:g}, σ(p₀)={self.obj.sigma_p:g}")
        print(f"Probe:  ⟨X⟩={self.probe.mean_x:g}, σ(X₀)={self.probe.sigma_x:g}, σ(P₀)={self.probe.sigma_p:g}")
        print("Scalars:")
        for k, v in metrics.items():
            print(f"  {k}: {v:.6f}")
        print("Relations (product ≥ bound):")
        print(f"  ε(x_t)(Δp)_dis     = {r.prod_64:.6f} ≥ {r.bound_64:.6f}  {r.pass_64}")
        print(f"  ε(x₀)(Δp)_dis      = {r.prod_65:.6f} ≥ {r.bound_65:.6f}  {r.pass_65}")
        print(f"  σ((x₀)_exp)(Δp)_dis = {r.prod_69:.6f} ≥ {r.bound_69:.6f}  {r.pass_69}")
        print(f"  ε^Oz(x₀)(Δp)_dis   = {r.prod_ozawa:.6f} vs ħ/2 = {r.bound_64:.6f}"
              f"  {'below (informational)' if r.ozawa_below_bound else 'above'}")
        print("Checks:")
        for k, v in checks.items():
            print(f"  {k}: {v}")
        print("=" * 40)


def full_report(model: LinearModel, obj: MomentSummary, probe: MomentSummary) -> MeasurementReport:
    """Every scalar, product, bound and pass flag for one configuration."""
    return MeasurementAnalyzer(model, obj, probe).report()
