"""Command-line entry point: ``coopetition {solve,sweep,oracle-check,check-dist}``.

Exit codes: 0 success, 1 validation error, 2 solver non-convergence,
3 oracle verdict failure.
"""
from __future__ import annotations

import argparse
import datetime
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from . import distributions, oracle, scenario_io
from .errors import ConvergenceError, ValidationError
from .market import period1_threshold
from .report import compare_reference, dumps, equilibrium_report, format_reference, format_summary

EXIT_OK, EXIT_VALIDATION, EXIT_CONVERGENCE, EXIT_ORACLE = 0, 1, 2, 3

log = logging.getLogger("coopetition")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="coopetition-out", help="output directory")
    p.add_argument("--grid", type=int, default=None, help="oracle grid size (default 2000)")
    p.add_argument("--eps", type=float, default=None,
                   help="best-response convergence tolerance (default 1e-10)")
    p.add_argument("--deviation-tol", type=float, default=None,
                   help="largest unilateral gain the oracle tolerates (default 1e-4)")
    p.add_argument("--damping", type=float, default=None, help="best-response damping in [0, 1)")
    p.add_argument("--no-timestamp", action="store_true", help="omit the generated_at field")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coopetition",
                                     description="Two-period FL coopetition equilibrium solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one scenario file")
    p.add_argument("scenario")
    _common(p)

    p = sub.add_parser("sweep", help="solve every cell of an accuracy fixture")
    p.add_argument("fixture")
    p.add_argument("params", help="YAML file with params / distribution / settings")
    p.add_argument("--workers", type=int, default=1)
    _common(p)

    p = sub.add_parser("oracle-check", help="solve a scenario and cross-check it by full grid enumeration")
    p.add_argument("scenario")
    _common(p)

    p = sub.add_parser("check-dist", help="check a preference distribution for an increasing hazard rate")
    p.add_argument("descriptor",
                   help="kind name (uniform, truncated_gaussian, truncated_gamma, valley_mixture), "
                        "an inline mapping such as '{kind: truncated_gaussian, sd: 0.3}', "
                        "or a scenario file")
    p.add_argument("--points", type=int, default=2001)
    _common(p)
    return parser


def _settings(args, base):
    return base.with_overrides(oracle_grid_n=args.grid, br_tolerance=args.eps,
                               deviation_tolerance=args.deviation_tol, damping=args.damping)


def _stamp(doc, args):
    if not args.no_timestamp:
        doc["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return doc


def _write(outdir: Path, name: str, doc: dict) -> Path:
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / name
    path.write_text(dumps(doc))
    return path


def cmd_solve(args) -> int:
    from .period1 import optimize

    scenario = scenario_io.load_scenario(args.scenario)
    settings = _settings(args, scenario.settings)
    sol = optimize(scenario, settings)
    grid = oracle.grid_period1_optimum(scenario, grid_n=settings.oracle_grid_n)
    rep = equilibrium_report(scenario, sol, grid)
    print(format_summary(rep))
    block = compare_reference(scenario, settings)
    ok = rep["verdict"]["passed"]
    if block is not None:
        rep["reference"] = block
        print(format_reference(block))
        ok = ok and all(block["verified"].values())
    path = _write(Path(args.out), "report.json", _stamp(rep, args))
    print(f"wrote {path}")
    return EXIT_OK if ok else EXIT_ORACLE


def cmd_sweep(args) -> int:
    fixtures = scenario_io.load_accuracy_fixture(args.fixture)
    params, dist, base = scenario_io.load_shared_params(args.params)
    settings = _settings(args, base)
    report = scenario_io.run_sweep(fixtures, params, dist, settings, workers=args.workers,
                                   period1_grid=settings.oracle_grid_n)
    for c in report.cells:
        if c.ok:
            r = c.report
            flag = "" if c.reported_collab is None or c.reported_collab == c.collaborate else "  (differs from reported)"
            print(f"{c.key:24} collaborate={str(c.collaborate):5} p_I1={r['p_I1']:.5f} "
                  f"p_I2={r['p_I2']:.5f} p_E2={r['p_E2']:.5f} "
                  f"verdict={'pass' if c.verified else 'FAIL'}{flag}")
        else:
            print(f"{c.key:24} ERROR ({c.error_kind}): {c.error}")
    extra = _stamp({}, args)
    for path in scenario_io.write_sweep(report, args.out, extra):
        print(f"wrote {path}")
    if any(c.error_kind == "convergence" for c in report.cells):
        return EXIT_CONVERGENCE
    if any(c.error_kind is not None for c in report.cells):
        return EXIT_VALIDATION
    return EXIT_OK if report.all_verified else EXIT_ORACLE


def cmd_oracle_check(args) -> int:
    from .period1 import optimize

    scenario = scenario_io.load_scenario(args.scenario)
    settings = _settings(args, scenario.settings)
    n = settings.oracle_grid_n
    sol = optimize(scenario, settings)
    params, dist, q = scenario.params, scenario.dist, scenario.qualities
    theta1 = period1_threshold(params, q.q_I1, sol.p_I1)
    games = {}
    for name, eq in (("fl", sol.outcome.fl), ("local", sol.outcome.local)):
        pair = q.period2(name == "fl")
        ge = oracle.grid_price_equilibrium(params, dist, pair, theta1, grid_n=n)
        verdict = oracle.verify_no_deviation(params, dist, pair, theta1, (eq.p_I2, eq.p_E2),
                                             n, settings.deviation_tolerance)
        entry = {"solver": [eq.p_I2, eq.p_E2], "verdict": verdict.to_dict(),
                 "grid_equilibria": ge.count, "degenerate": ge.degenerate}
        if ge.count:
            near = ge.closest(eq.p_I2, eq.p_E2)
            cell = max(ge.grid_I[1] - ge.grid_I[0], ge.grid_E[1] - ge.grid_E[0])
            entry["nearest_grid_equilibrium"] = list(near)
            entry["distance_in_cells"] = float(np.hypot(near[0] - eq.p_I2, near[1] - eq.p_E2) / cell)
        games[name] = entry
    grid = oracle.grid_period1_optimum(scenario, grid_n=n)
    gap = abs(sol.W_I - grid.W_I)
    doc = {
        "scenario": scenario.label, "grid_n": n, "theta1": theta1,
        "solver": {"p_I1": sol.p_I1, "W_I": sol.W_I},
        "grid_period1": {"p_I1": grid.p_I1, "W_I": grid.W_I, "abs_diff_W_I": gap,
                         "tolerance": scenario_io.PERIOD1_ORACLE_TOL},
        "price_games": games,
    }
    passed = gap <= scenario_io.PERIOD1_ORACLE_TOL and all(g["verdict"]["passed"] for g in games.values())
    doc["passed"] = passed
    for name, g in games.items():
        v = g["verdict"]
        print(f"{name:6} solver=({g['solver'][0]:.6f}, {g['solver'][1]:.6f}) "
              f"worst_gain={v['worst_gain']:.2e} grid_NE={g['grid_equilibria']} "
              f"{'pass' if v['passed'] else 'FAIL'}")
    print(f"period1 solver W_I={sol.W_I:.8f} grid W_I={grid.W_I:.8f} |dW|={gap:.2e}")
    path = _write(Path(args.out), "oracle_check.json", _stamp(doc, args))
    print(f"wrote {path}")
    if not passed:
        print("oracle: verdict failed", file=sys.stderr)
    return EXIT_OK if passed else EXIT_ORACLE


def _parse_descriptor(text: str):
    path = Path(text)
    if path.is_file():
        return scenario_io.load_scenario(path).dist
    if text in ("valley_mixture", "mixture"):
        return distributions.valley_mixture()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValidationError(f"check-dist: cannot parse descriptor: {exc}") from None
    if isinstance(doc, str):
        doc = {"kind": doc}
    return distributions.from_dict(doc)


def cmd_check_dist(args) -> int:
    dist = _parse_descriptor(args.descriptor)
    res = distributions.hazard_monotone_check(dist, grid_points=args.points)
    doc = {"distribution": dist.to_dict(), "passed": res.passed,
           "violation_at": res.violation_at, "notes": list(res.notes), "grid_points": args.points}
    path = _write(Path(args.out), "check_dist.json", _stamp(doc, args))
    if res.passed:
        print(f"{dist.kind}: hazard rate non-decreasing on [0, 1]")
    else:
        print(f"{dist.kind}: increasing-hazard condition violated, hazard rate drops at phi={res.violation_at:.4f}")
    for note in res.notes:
        print(f"  note: {note}")
    print(f"wrote {path}")
    return EXIT_OK if res.passed else EXIT_VALIDATION


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "oracle-check": cmd_oracle_check,
            "check-dist": cmd_check_dist}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        where = f" in profile {exc.profile}" if getattr(exc, "profile", None) else ""
        print(f"error{where}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
