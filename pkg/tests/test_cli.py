import io
import json
import logging

import pandas as pd
import pytest

from src.cli import build_parser, main
from src.errors import DomainTooSmall


@pytest.fixture(autouse=True)
def _restore_root_logger():
    # main() reconfigures the root logger with force=True
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_model_info_json(capsys, tmp_path):
    code, out = _run(capsys, "model-info", "--catalog", "ozawa", "--format", "json", "--out", str(tmp_path))
    assert code == 0
    info = json.loads(out)
    assert (info["alpha1"], info["alpha2"], info["beta1"], info["beta2"]) == (1.0, -1.0, 1.0, 0.0)
    assert info["momentum_map"] == {"a1": 0.0, "a2": -1.0, "b1": 1.0, "b2": 1.0}
    assert info["gamma"] == 1.0 and not info["conserves_momentum"]


def test_model_info_table(capsys, tmp_path):
    code, out = _run(capsys, "model-info", "--catalog", "momentum_conserving", "--g0", "0.5", "--out", str(tmp_path))
    assert code == 0
    assert "=== MODEL ===" in out
    assert "conserves_momentum: True" in out


def test_identity_model_is_valid_but_unmeasurable(capsys, tmp_path):
    code, out = _run(capsys, "model-info", "--coeffs=1,0,0,1", "--format", "json", "--out", str(tmp_path))
    assert code == 0
    assert json.loads(out)["measurable"] is False


def test_non_unitary_model_exits_2(capsys, tmp_path):
    code, _ = _run(capsys, "model-info", "--coeffs=2,0,2,1", "--out", str(tmp_path))
    assert code == 2


def test_analyze_writes_report(capsys, tmp_path):
    code, out = _run(capsys, "analyze", "--catalog", "von_neumann", "--format", "json", "--out", str(tmp_path))
    assert code == 0
    printed = json.loads(out)
    assert printed["prod_64"] == 0.5 and printed["pass_64"]
    (written,) = tmp_path.glob("analyze_*.json")
    assert json.loads(written.read_text()) == printed


def test_analyze_unmeasurable_exits_2(capsys, tmp_path):
    code, _ = _run(capsys, "analyze", "--coeffs=1,0,0,1", "--out", str(tmp_path))
    assert code == 2


def test_sweep_writes_csv_and_json(capsys, tmp_path):
    code, out = _run(capsys, "sweep", "--g0-values=-1,0.5,1,2", "--quiet", "--format", "json",
                     "--out", str(tmp_path))
    assert code == 0
    summary = json.loads(out)
    assert summary["rows"] == 4
    (csv,) = [p for p in tmp_path.glob("sweep_*.csv") if "g0_prod64" not in p.name]
    frame = pd.read_csv(csv)
    assert len(frame) == 4 and frame["pass_64"].all()
    assert len(list(tmp_path.glob("sweep_*_g0_prod64.csv"))) == 1
    assert len(list(tmp_path.glob("sweep_*.json"))) == 1


def test_random_sweep_over_seeds(capsys, tmp_path):
    code, out = _run(capsys, "sweep", "--family", "mixed", "--n-random", "50", "--seeds", "1,2",
                     "--random-states", "--quiet", "--format", "json", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads(out)
    assert summary["rows"] == 100
    assert summary["violations"] == {"64": 0, "65": 0, "69": 0}


def test_empty_g0_range_exits_2(capsys, tmp_path):
    code, _ = _run(capsys, "sweep", "--g0-values=", "--quiet", "--out", str(tmp_path))
    assert code == 2


def test_oracle_compare(capsys, tmp_path):
    code, out = _run(capsys, "oracle-compare", "--catalog", "von_neumann", "--n", "512", "--out", str(tmp_path))
    assert code == 0
    assert "PASS" in out
    assert len(list(tmp_path.glob("oracle_compare_*.json"))) == 1


def test_oracle_compare_narrow_domain_exits_4(capsys, tmp_path):
    code, _ = _run(capsys, "oracle-compare", "--catalog", "von_neumann", "--half-width", "3",
                   "--out", str(tmp_path))
    assert code == 4


def test_povm_check(capsys, tmp_path):
    code, out = _run(capsys, "povm-check", "--catalog", "von_neumann", "--bins", "8", "--format", "json",
                     "--out", str(tmp_path))
    assert code == 0
    report = json.loads(out)
    assert len(report["bins"]) == 8
    assert report["completeness_residual"] < 1e-8


def test_povm_check_default_model(capsys, tmp_path):
    code, _ = _run(capsys, "povm-check", "--out", str(tmp_path))
    assert code == 0


def test_demo(capsys, tmp_path):
    code, out = _run(capsys, "demo", "ozawa-violation", "--sigma-X0", "0.1", "--out", str(tmp_path))
    assert code == 0
    assert "Ozawa interaction" in out
    assert len(list(tmp_path.glob("demo_ozawa_violation_*.json"))) == 1


def test_search(capsys, tmp_path):
    code, out = _run(capsys, "search", "--relation", "64", "--pop", "8", "--generations", "2",
                     "--format", "json", "--out", str(tmp_path))
    assert code == 0
    assert json.loads(out)["relation"] == "64"


def test_config_file(capsys, tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"catalog": "ozawa", "format": "json", "out_dir": str(tmp_path / "out")}))
    code, out = _run(capsys, "analyze", "--config", str(path))
    assert code == 0
    assert json.loads(out)["model_name"] == "ozawa"
    assert len(list((tmp_path / "out").glob("analyze_*.json"))) == 1


def test_parser_rejects_unknown_catalog():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["model-info", "--catalog", "harmonic"])


@pytest.mark.parametrize("argv, stem", [
    (("model-info", "--catalog", "ozawa"), "model_info"),
    (("analyze", "--catalog", "von_neumann"), "analyze"),
    (("oracle-compare", "--catalog", "von_neumann", "--n", "512"), "oracle_compare"),
    (("povm-check", "--catalog", "von_neumann", "--bins", "8"), "povm_check"),
    (("demo", "ozawa-violation", "--sigma-X0", "0.1"), "demo_ozawa_violation"),
    (("search", "--relation", "64", "--pop", "8", "--generations", "2"), "search_64"),
], ids=lambda v: v if isinstance(v, str) else v[0])
def test_csv_format(capsys, tmp_path, argv, stem):
    code, out = _run(capsys, *argv, "--format", "csv", "--out", str(tmp_path))
    assert code == 0
    frame = pd.read_csv(io.StringIO(out))
    assert len(frame) >= 1
    (written,) = tmp_path.glob(f"{stem}_*.csv")
    assert list(pd.read_csv(written).columns) == list(frame.columns)


def test_csv_model_info_flattens_momentum_map(capsys, tmp_path):
    _, out = _run(capsys, "model-info", "--catalog", "ozawa", "--format", "csv", "--out", str(tmp_path))
    row = pd.read_csv(io.StringIO(out)).iloc[0]
    assert (row["a1"], row["a2"], row["b1"], row["b2"]) == (0.0, -1.0, 1.0, 1.0)


def test_sweep_oracle_failure_exits_4(capsys, tmp_path, monkeypatch):
    def coarse(*args, **kwargs):
        raise DomainTooSmall("grid too coarse")

    monkeypatch.setattr("src.verification.relations.compare", coarse)
    code, out = _run(capsys, "sweep", "--g0-values=0.5,1", "--oracle", "--subsample", "2", "--quiet",
                     "--format", "json", "--out", str(tmp_path))
    assert code == 4
    assert json.loads(out)["oracle_skipped"] == 2
