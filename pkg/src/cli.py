"""
Command-line front end.

    python -m src model-info --catalog ozawa
    python -m src analyze --catalog momentum_conserving --g0 1
    python -m src sweep --family conserving --n-random 10000 --seed 3
    python -m src oracle-compare --catalog von_neumann
    python -m src povm-check --catalog von_neumann
    python -m src demo ozawa-violation
    python -m src search --relation ozawa --family general

Exit codes: 0 success, 2 invalid config/model, 3 relation violation,
4 numerical-oracle failure.
"""
import argparse
import json
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from src.config import RunConfig, load_config
from src.errors import LinMeasureError, OracleError, RelationViolation
from src.measurement.gaussian import MeasurementAnalyzer
from src.measurement.linear_model import CATALOG, momentum_map
from src.oracle.compare import ORACLE_RTOL, compare
from src.oracle.grid import GridSpec
from src.oracle.povm import make_bins, povm_report
from src.verification.relations import VerifierReport, demo_ozawa_violation, verify_relations
from src.verification.saturation_search import SEARCH_RELATIONS, search_min_slack

logger = logging.getLogger(__name__)

POVM_TOL = 1e-8
POVM_PROBABILITY_TOL = 1e-7


def _timestamp() -> str:
    return datetime.now().strftime("%Y%m%d_%H%M%S")


def _coeffs(text: str):
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected four comma-separated numbers α₁,α₂,β₁,β₂")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _floats(text: str) -> List[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _ints(text: str) -> List[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Nested config keys for every flag that was given."""
    out: Dict[str, Any] = {}
    for key in ("catalog", "g0", "coeffs", "hbar", "format"):
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    if getattr(args, "out", None):
        out["out_dir"] = args.out
    for prefix, section in (("x0", "object"), ("X0", "probe")):
        for field in ("sigma", "mean"):
            value = getattr(args, f"{field}_{prefix}", None)
            if value is not None:
                out.setdefault(section, {})["sigma_x" if field == "sigma" else "mean_x"] = value
    sweep = {}
    for key, dest in (("family", "family"), ("g0_values", "g0_values"), ("n_random", "n_random"),
                      ("seed", "seed"), ("seeds", "seeds"), ("subsample", "oracle_subsample"),
                      ("oracle_n", "oracle_n")):
        value = getattr(args, key, None)
        if value is not None:
            sweep[dest] = value
    if getattr(args, "oracle", False):
        sweep["oracle"] = True
    if getattr(args, "random_states", False):
        sweep["random_states"] = True
    if sweep:
        out["sweep"] = sweep
    if getattr(args, "n", None) is not None:
        out.setdefault("grid", {})["n_obj"] = args.n
    if getattr(args, "half_width", None) is not None:
        out.setdefault("grid", {})["half_width"] = args.half_width
    if getattr(args, "bins", None) is not None:
        out.setdefault("povm", {})["bins"] = args.bins
    return out


def _write_json(cfg: RunConfig, stem: str, payload: Any) -> Path:
    out_dir = cfg.output_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}_{_timestamp()}.json"
    path.write_text(json.dumps(payload, indent=2))
    logger.info("Wrote %s", path)
    return path


def _emit_csv(cfg: RunConfig, stem: str, frame: pd.DataFrame) -> Path:
    """Print frame as CSV and write it next to the JSON outputs."""
    out_dir = cfg.output_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}_{_timestamp()}.csv"
    frame.to_csv(path, index=False, float_format="%.17g")
    print(frame.to_csv(index=False, float_format="%.17g"), end="")
    logger.info("Wrote %s", path)
    return path


# -- subcommands --------------------------------------------------------------

def cmd_model_info(cfg: RunConfig) -> int:
    model = cfg.build_model()
    d = model.diagnostics
    m = momentum_map(model)
    info = {
        "name": model.name,
        "alpha1": model.alpha1, "alpha2": model.alpha2, "beta1": model.beta1, "beta2": model.beta2,
        "hbar": model.hbar,
        "gamma": d.gamma,
        "momentum_map": {"a1": m.a1, "a2": m.a2, "b1": m.b1, "b2": m.b2},
        "conserves_momentum": d.conserves_momentum,
        "measurable": d.measurable,
    }
    if cfg.format == "json":
        print(json.dumps(info, indent=2))
        return 0
    if cfg.format == "csv":
        flat = {k: v for k, v in info.items() if k != "momentum_map"}
        flat.update(info["momentum_map"])
        _emit_csv(cfg, "model_info", pd.DataFrame([flat]))
        return 0
    print("=== MODEL ===")
    print(f"{model}")
    print(f"  x_t = {model.alpha1:g}·x₀ + {model.alpha2:g}·X₀")
    print(f"  X_t = {model.beta1:g}·x₀ + {model.beta2:g}·X₀")
    print(f"  p_t = {m.a1:g}·p₀ + {m.a2:g}·P₀")
    print(f"  P_t = {m.b1:g}·p₀ + {m.b2:g}·P₀")
    print(f"  Γ = {d.gamma:g}")
    print(f"  conserves_momentum: {d.conserves_momentum}")
    print(f"  measurable: {d.measurable}")
    return 0


def cmd_analyze(cfg: RunConfig) -> int:
    model = cfg.build_model()
    obj = cfg.object_packet().moments()
    probe = cfg.probe_packet().moments()
    analyzer = MeasurementAnalyzer(model, obj, probe)
    report = analyzer.report()
    if cfg.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    elif cfg.format == "csv":
        _emit_csv(cfg, "analyze", pd.DataFrame([report.to_dict()]))
    else:
        analyzer.print_report()
    _write_json(cfg, "analyze", report.to_dict())
    if not (report.pass_64 and report.pass_65 and report.pass_69):
        raise RelationViolation(f"Relation failed for {model}: 64 {report.pass_64}, 65 {report.pass_65},"
                                f" 69 {report.pass_69}")
    return 0


def cmd_sweep(cfg: RunConfig, quiet: bool = False) -> int:
    seeds = cfg.sweep.seeds or [cfg.sweep.seed]
    frames = []
    for seed in seeds:
        plan = cfg.sweep_plan(seed=seed)
        part = verify_relations(plan, progress=not quiet).to_frame()
        part.insert(1, "seed", seed)
        frames.append(part)
    frame = pd.concat(frames, ignore_index=True)
    frame["config_id"] = range(len(frame))
    report = VerifierReport(frame=frame)

    out_dir = cfg.output_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = _timestamp()
    report.to_csv(out_dir / f"sweep_{stamp}.csv")
    report.to_json(out_dir / f"sweep_{stamp}.json")
    if cfg.sweep.family == "catalog":
        report.series("g0", "prod_64", "bound_64", out_dir / f"sweep_{stamp}_g0_prod64.csv")
    logger.info("Wrote sweep outputs to %s", out_dir)

    if cfg.format == "json":
        print(json.dumps(report.summary(), indent=2, default=float))
    else:
        report.print_report()
    if not report.passed:
        raise RelationViolation(f"Sweep found violations: {report.violations()}")
    if report.oracle_skipped:
        raise OracleError(f"Oracle failed on {report.oracle_skipped} sampled configurations")
    gap = report.oracle_max_gap()
    if report.oracle_rows and gap > ORACLE_RTOL:
        raise OracleError(f"Oracle disagrees with the closed forms: max gap {gap:.3g} > {ORACLE_RTOL:g}")
    return 0


def cmd_oracle_compare(cfg: RunConfig) -> int:
    model = cfg.build_model()
    obj, probe = cfg.object_packet(), cfg.probe_packet()
    grid = cfg.grid_spec(model, obj, probe)
    result = compare(model, obj, probe, grid=grid)
    if cfg.format == "json":
        print(result.to_frame().to_json(orient="records", indent=2))
    elif cfg.format == "csv":
        _emit_csv(cfg, "oracle_compare", result.to_frame())
    else:
        result.print_report()
    _write_json(cfg, "oracle_compare", {
        "rows": result.rows,
        "residual_x0": result.residual_x0,
        "residual_xt": result.residual_xt,
        "max_gap": result.max_gap,
    })
    if not result.passed():
        raise OracleError(f"Oracle disagrees with the closed forms: max gap {result.max_gap:.3g} > {ORACLE_RTOL:g}")
    return 0


def cmd_povm_check(cfg: RunConfig) -> int:
    model = cfg.build_model()
    obj, probe = cfg.object_packet(), cfg.probe_packet()
    p = cfg.povm
    grid = GridSpec.covering(model, obj, probe, n_obj=p.n_obj, n_probe=p.n_probe)
    mo = obj.moments()
    lo = p.lo if p.lo is not None else mo.mean_x - 3.0 * mo.sigma_x
    hi = p.hi if p.hi is not None else mo.mean_x + 3.0 * mo.sigma_x
    report = povm_report(model, obj, probe, make_bins(lo, hi, p.bins), grid)
    if cfg.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    elif cfg.format == "csv":
        _emit_csv(cfg, "povm_check", pd.DataFrame(report.to_dict()["bins"]))
    else:
        print("=== POVM CHECK ===")
        print(f"Model: {model}")
        print(f"Bins: {p.bins}, object grid n={grid.n_obj}")
        print(f"  completeness residual: {report.completeness_residual:.3e}")
        print(f"  min eigenvalue:        {report.min_eigenvalue:.3e}")
        print(f"  hermitian error:       {report.hermitian_error:.3e}")
        print(f"  probability residual:  {report.probability_residual:.3e}")
        print("=" * 40)
    _write_json(cfg, "povm_check", report.to_dict())
    if (report.completeness_residual > POVM_TOL or report.min_eigenvalue < -POVM_TOL
            or report.probability_residual > POVM_PROBABILITY_TOL):
        raise OracleError("POVM check failed tolerance")
    return 0


def cmd_demo(cfg: RunConfig, name: str, oracle_n: int = 0) -> int:
    if name != "ozawa-violation":
        raise ValueError(f"Unknown demo '{name}'")
    demo = demo_ozawa_violation(cfg.object_packet().moments(), cfg.probe_packet().moments(),
                                hbar=cfg.hbar, oracle_n=oracle_n)
    if cfg.format == "json":
        print(json.dumps(demo.to_dict(), indent=2))
    elif cfg.format == "csv":
        _emit_csv(cfg, "demo_ozawa_violation", pd.DataFrame([demo.to_dict()]))
    else:
        print(demo.narrative())
    _write_json(cfg, "demo_ozawa_violation", demo.to_dict())
    return 0


def cmd_search(cfg: RunConfig, relation: str, family: str, pop: int, generations: int) -> int:
    result = search_min_slack(relation=relation, family=family, seed=cfg.sweep.seed,
                              pop_size=pop, generations=generations, hbar=cfg.hbar)
    payload = result.to_dict()
    if cfg.format == "json":
        print(json.dumps(payload, indent=2))
    elif cfg.format == "csv":
        flat = {k: v for k, v in payload.items() if k != "coefficients"}
        flat.update(zip(("alpha1", "alpha2", "beta1", "beta2"), payload["coefficients"] or [float("nan")] * 4))
        _emit_csv(cfg, f"search_{relation}", pd.DataFrame([flat]))
    else:
        print("=== MIN-SLACK SEARCH ===")
        for k, v in payload.items():
            print(f"  {k}: {v}")
    _write_json(cfg, f"search_{relation}", payload)
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or YAML run configuration")
    common.add_argument("--out", help="output directory (default $LINMEASURE_OUT_DIR or ./results)")
    common.add_argument("--format", choices=("json", "csv", "table"), default=None)
    common.add_argument("--hbar", type=float, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("--quiet", action="store_true", help="warnings only, no progress bars")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--catalog", choices=sorted(CATALOG), default=None)
    model.add_argument("--g0", type=float, default=None)
    model.add_argument("--coeffs", type=_coeffs, default=None, help="α₁,α₂,β₁,β₂")

    states = argparse.ArgumentParser(add_help=False)
    states.add_argument("--sigma-x0", dest="sigma_x0", type=float, default=None)
    states.add_argument("--sigma-X0", dest="sigma_X0", type=float, default=None)
    states.add_argument("--mean-x0", dest="mean_x0", type=float, default=None)
    states.add_argument("--mean-X0", dest="mean_X0", type=float, default=None)

    parser = argparse.ArgumentParser(prog="linmeasure", description="Linear position-measurement model verifier")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("model-info", parents=[common, model], help="coefficients, Γ, momentum map")
    sub.add_parser("analyze", parents=[common, model, states], help="errors, disturbance and relations")

    p = sub.add_parser("sweep", parents=[common, model, states], help="relation sweep → CSV + JSON")
    p.add_argument("--family", choices=("catalog", "explicit", "conserving", "general", "mixed"), default=None)
    p.add_argument("--g0-values", dest="g0_values", type=_floats, default=None)
    p.add_argument("--n-random", dest="n_random", type=int, default=None)
    p.add_argument("--seeds", type=_ints, default=None)
    p.add_argument("--random-states", dest="random_states", action="store_true")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--subsample", type=int, default=None)
    p.add_argument("--oracle-n", dest="oracle_n", type=int, default=None)

    p = sub.add_parser("oracle-compare", parents=[common, model, states], help="analytic vs grid oracle")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--half-width", dest="half_width", type=float, default=None)

    p = sub.add_parser("povm-check", parents=[common, model, states], help="POVM completeness and positivity")
    p.add_argument("--bins", type=int, default=None)

    p = sub.add_parser("demo", parents=[common, states], help="narrative demonstrations")
    p.add_argument("name", choices=("ozawa-violation",))
    p.add_argument("--oracle-n", dest="oracle_n", type=int, default=0)

    p = sub.add_parser("search", parents=[common, states], help="evolutionary min-slack search")
    p.add_argument("--relation", choices=SEARCH_RELATIONS, default="64")
    p.add_argument("--family", choices=("conserving", "general"), default="conserving")
    p.add_argument("--pop", type=int, default=40)
    p.add_argument("--generations", type=int, default=30)
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(format="[%(module)-12s] %(message)s", level=level, force=True)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args)
    try:
        overrides = _overrides(args)
        if args.command in ("demo", "search"):
            # these subcommands carry their own --oracle-n / --family meanings
            overrides.pop("sweep", None)
            if args.seed is not None:
                overrides["sweep"] = {"seed": args.seed}
        cfg = load_config(args.config, overrides)
        if args.command == "model-info":
            return cmd_model_info(cfg)
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, quiet=args.quiet)
        if args.command == "oracle-compare":
            return cmd_oracle_compare(cfg)
        if args.command == "povm-check":
            return cmd_povm_check(cfg)
        if args.command == "demo":
            return cmd_demo(cfg, args.name, oracle_n=args.oracle_n)
        return cmd_search(cfg, args.relation, args.family, args.pop, args.generations)
    except LinMeasureError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except ValueError as exc:
        logger.error("Invalid input: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
