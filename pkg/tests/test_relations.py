import json

import numpy as np
import pandas as pd
import pytest

from src.errors import ConfigError, DomainTooSmall
from src.measurement.linear_model import make_model, momentum_conserving, ozawa, von_neumann
from src.measurement.packets import MomentSummary
from src.verification import relations
from src.verification.plan import SweepPlan, random_models
from src.verification.relations import (
    CSV_COLUMNS, born_rule_audit, demo_ozawa_violation, linearity_audit, verify_relations,
)

G0_VALUES = (-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0)


# -- plans ---------------------------------------------------------------------

def test_random_families_are_valid():
    rng = np.random.default_rng(7)
    for m in random_models("conserving", 200, rng):
        assert m.conserves_momentum
        assert abs(abs(m.gamma) - 1.0) < 1e-9
        assert 0.1 <= abs(m.beta1) <= 3.0
    for m in random_models("general", 200, rng):
        assert abs(abs(m.gamma) - 1.0) < 1e-9
    with pytest.raises(ConfigError):
        random_models("harmonic", 1, rng)


def test_plan_sizes():
    plan = SweepPlan(g0_values=G0_VALUES, sigma_x0=(0.5, 1.0), sigma_X0=(0.5, 1.0, 2.0))
    assert plan.size() == 8 * 6
    assert [c.config_id for c in plan.configurations()] == list(range(48))
    random_plan = SweepPlan(family="mixed", n_random=20, random_states=True, seed=3)
    assert random_plan.size() == 20
    widths = [c.obj.sigma_x for c in random_plan.configurations()]
    assert all(0.2 <= w <= 2.0 for w in widths)


def test_plan_is_reproducible():
    a = [c.model.coefficients for c in SweepPlan(family="general", n_random=5, seed=11).configurations()]
    b = [c.model.coefficients for c in SweepPlan(family="general", n_random=5, seed=11).configurations()]
    c = [c.model.coefficients for c in SweepPlan(family="general", n_random=5, seed=12).configurations()]
    assert a == b
    assert a != c


@pytest.mark.parametrize("plan, fragment", [
    (SweepPlan(g0_values=()), "Empty g0"),
    (SweepPlan(family="explicit"), "No explicit"),
    (SweepPlan(family="conserving"), "n_random"),
    (SweepPlan(sigma_x0=()), "Empty state"),
    (SweepPlan(sigma_X0=(0.5, -1.0)), "positive"),
    (SweepPlan(family="wide"), "Unknown family"),
])
def test_invalid_plans(plan, fragment):
    ok, message = plan.validate()
    assert not ok and fragment in message
    with pytest.raises(ConfigError):
        plan.models()


def test_unmeasurable_catalog_member_is_rejected():
    with pytest.raises(ConfigError):
        SweepPlan(g0_values=(0.0, 1.0)).models()


def test_unmeasurable_rows_are_skipped_when_allowed():
    plan = SweepPlan(g0_values=(0.0, 1.0), allow_unmeasurable=True)
    report = verify_relations(plan, progress=False)
    assert report.n_rows == 1
    assert report.frame["g0"].tolist() == [1.0]


# -- sweeps ----------------------------------------------------------------------

def test_catalog_sweep():
    report = verify_relations(SweepPlan(g0_values=G0_VALUES), progress=False)
    assert report.n_rows == 8
    assert report.passed
    assert report.violations() == {"64": 0, "65": 0, "69": 0}
    row = report.frame.set_index("g0").loc[1.0]
    assert row["prod_64"] == pytest.approx(0.559017, abs=1e-6)


def test_von_neumann_saturates():
    plan = SweepPlan(family="explicit", coefficients=[von_neumann().coefficients, ozawa().coefficients])
    report = verify_relations(plan, progress=False)
    sat = report.saturation()
    assert sat["64"] == [0]
    # Ozawa reaches its zero bound for relation 65
    assert sat["65"] == [0, 1]
    assert report.min_slack()["64"] == pytest.approx(0.0, abs=1e-15)
    assert report.summary()["ozawa_below_bound"] == 1


def test_large_random_sweep_has_no_violations():
    plan = SweepPlan(family="mixed", n_random=10_000, random_states=True, seed=5)
    report = verify_relations(plan, progress=False)
    assert report.n_rows == 10_000
    assert report.passed
    assert min(report.min_slack().values()) >= -1e-12


def test_sweep_with_oracle_subsample():
    coefficients = [momentum_conserving(g).coefficients for g in (-1.0, -0.5, 0.5, 1.0)]
    coefficients += [von_neumann().coefficients, ozawa().coefficients]
    plan = SweepPlan(family="explicit", coefficients=coefficients, sigma_x0=(1.0, 0.7), sigma_X0=(0.5,),
                     oracle=True, oracle_subsample=4, oracle_n=512, seed=1)
    report = verify_relations(plan, progress=False)
    assert report.oracle_rows >= 1
    assert report.oracle_max_gap() <= 1e-6
    assert report.frame["oracle_max_gap"].isna().sum() == report.n_rows - report.oracle_rows


def test_oracle_covers_random_subsample():
    plan = SweepPlan(family="mixed", n_random=200, random_states=True, oracle=True, oracle_subsample=32, seed=11)
    report = verify_relations(plan, progress=False)
    assert report.oracle_rows == 32
    assert report.oracle_skipped == 0
    assert report.oracle_max_gap() <= 1e-6
    assert set(report.frame["oracle_status"]) <= {"", "ok", "unresolved"}
    summary = report.summary()
    assert summary["oracle_skipped"] == 0
    assert summary["oracle_unresolved"] == report.oracle_unresolved
    ok = report.frame[report.frame["oracle_status"] == "ok"]
    assert ok["oracle_n"].isin([512, 1024]).all()


def test_oracle_failures_are_counted(monkeypatch):
    def coarse(*args, **kwargs):
        raise DomainTooSmall("grid too coarse")

    monkeypatch.setattr(relations, "compare", coarse)
    plan = SweepPlan(family="explicit", coefficients=[von_neumann().coefficients, ozawa().coefficients],
                     sigma_x0=(1.0,), sigma_X0=(0.5,), oracle=True, oracle_subsample=2, seed=1)
    report = verify_relations(plan, progress=False)
    assert report.oracle_rows == 0
    assert report.oracle_skipped == 2
    assert report.summary()["oracle_skipped"] == 2


def test_outputs(tmp_path):
    report = verify_relations(SweepPlan(g0_values=G0_VALUES, sigma_x0=(1.0, 2.0)), progress=False)
    csv = pd.read_csv(report.to_csv(tmp_path / "sweep.csv"))
    assert list(csv.columns) == CSV_COLUMNS
    assert len(csv) == 16
    assert csv["pass_64"].all()

    payload = json.loads(report.to_json(tmp_path / "sweep.json").read_text())
    assert payload["summary"]["rows"] == 16
    assert payload["summary"]["violations"] == {"64": 0, "65": 0, "69": 0}
    assert len(payload["rows"]) == 16

    series = pd.read_csv(report.series("g0", "prod_64", "bound_64", tmp_path / "series.csv"))
    assert list(series.columns) == ["g0", "prod_64", "bound_64"]
    assert series["g0"].is_monotonic_increasing


def test_print_report(capsys):
    verify_relations(SweepPlan(), progress=False).print_report()
    out = capsys.readouterr().out
    assert "=== RELATION SWEEP ===" in out
    assert "relation 64: violations 0" in out


# -- demonstrations and audits -----------------------------------------------------

def test_ozawa_demo():
    demo = demo_ozawa_violation(MomentSummary.minimal(0.0, 1.0), MomentSummary.minimal(0.0, 0.1))
    assert demo.ozawa_below_bound
    assert demo.relation_64_holds
    assert demo.prod_64 == pytest.approx(0.502494, abs=1e-6)
    assert demo.prod_ozawa == pytest.approx(0.0, abs=1e-15)
    text = demo.narrative()
    assert "< 0.5" in text and "≥ 0.5" in text
    assert demo.to_dict()["sigma_X0"] == pytest.approx(0.1)


def test_ozawa_demo_with_oracle():
    demo = demo_ozawa_violation(MomentSummary.minimal(0.0, 1.0), MomentSummary.minimal(0.0, 0.5), oracle_n=512)
    assert demo.oracle_eps_ozawa_x0 == pytest.approx(0.0, abs=1e-12)
    assert "oracle" in demo.narrative()


def test_born_rule_audit():
    probe = MomentSummary.minimal(0.0, 0.5)
    objects = [MomentSummary.minimal(m, 1.0) for m in (0.0, 1.0, -2.5)]
    audit = born_rule_audit(momentum_conserving(1.0), objects, probe)
    assert audit["our_unbiased"].all()
    assert audit["our_bias"].abs().max() < 1e-12
    assert audit.set_index("mean_x0").loc[1.0, "ozawa_bias"] == pytest.approx(-2.0)
    assert not audit["ozawa_unbiased"].iloc[1:].any()


def test_linearity_audit():
    mc = linearity_audit(momentum_conserving(1.0))
    assert mc == {
        "unique_readout": True,
        "conserves_momentum": True,
        "result_operators_unbiased": True,
        "ozawa_unbiased": False,
        "linear_justified": True,
    }
    oz = linearity_audit(ozawa())
    assert oz["ozawa_unbiased"] and not oz["conserves_momentum"] and not oz["linear_justified"]
    idle = linearity_audit(make_model(1.0, 0.0, 0.0, 1.0))
    assert not idle["unique_readout"] and not idle["linear_justified"]
