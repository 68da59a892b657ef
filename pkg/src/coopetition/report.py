"""Machine-readable equilibrium reports.

Reports are plain dicts of JSON types. :func:`dumps` writes them with sorted
keys and ``repr`` floats, so identical runs give byte-identical files.
"""
from __future__ import annotations

import json
import math

from .collab_game import collaboration_equilibrium
from .market import period1_threshold, period2_segments
from .scenario_io import PERIOD1_ORACLE_TOL


def _clean(x):
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def dumps(doc: dict) -> str:
    return json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"


def equilibrium_report(scenario, solution, grid_opt=None, oracle_table=None) -> dict:
    """Everything about one solved scenario: prices, profits, demand and verdicts.

    ``grid_opt`` is an :class:`~coopetition.oracle.GridOptimum` to compare the
    period-1 optimum against; ``oracle_table`` a grid-dynamics profit table.
    """
    params, dist, q = scenario.params, scenario.dist, scenario.qualities
    at = solution.at_optimum
    outcome = at.outcome
    eq = outcome.equilibrium
    q_pair = q.period2(outcome.collaborate)
    seg = period2_segments(params, dist, *q_pair, eq.p_I2, eq.p_E2, at.theta1)
    verdicts = {"fl": outcome.fl.verified, "local": outcome.local.verified}
    rep = {
        "scenario": scenario.label,
        "metadata": dict(scenario.metadata),
        "p_I1": solution.p_I1,
        "theta1": at.theta1,
        "region": solution.region,
        "r_star": list(outcome.r_star.as_tuple()),
        "collaborate": outcome.collaborate,
        "I_prefers_fl": outcome.I_prefers_fl,
        "E_prefers_fl": outcome.E_prefers_fl,
        "p_I2": eq.p_I2,
        "p_E2": eq.p_E2,
        "profits": {"W_I1": at.W_I1, "W_I2": at.W_I2, "W_E2": at.W_E2, "W_I": at.W_I},
        "demand": {
            "mass_I1": seg.mass_I1, "mass_I2": seg.mass_I2, "mass_E2": seg.mass_E2,
            "seg_I2": seg.seg_I2, "seg_E2": seg.seg_E2, "phi_star": seg.phi_star,
        },
        "profit_table": {f"{a}{b}": list(v) for (a, b), v in outcome.profit_table().items()},
        "equilibria": {"fl": outcome.fl.to_dict(), "local": outcome.local.to_dict()},
        "regions": [
            {"label": r.label, "p_I1": r.p_I1, "W_I": r.W_I, "iterations": r.iterations,
             "converged": r.converged}
            for r in solution.regions
        ],
    }
    passed = all(v is not False for v in verdicts.values())
    verdict = {"price_games": verdicts}
    if grid_opt is not None:
        gap = abs(solution.W_I - grid_opt.W_I)
        rep["oracle"] = {
            "p_I1": grid_opt.p_I1, "W_I": grid_opt.W_I, "theta1": grid_opt.theta1,
            "collaborate": grid_opt.collaborate, "grid_n": grid_opt.grid_n,
            "abs_diff_W_I": gap, "tolerance": PERIOD1_ORACLE_TOL,
        }
        verdict["period1"] = gap <= PERIOD1_ORACLE_TOL
        passed = passed and verdict["period1"]
    if oracle_table is not None:
        rep["oracle_profit_table"] = oracle_table
    verdict["passed"] = passed
    rep["verdict"] = verdict
    return rep


def reference_price(scenario) -> float:
    ref = scenario.reference or {}
    p = ref.get("p_I1", "cap")
    if p == "cap":
        return scenario.params.price_cap(scenario.qualities.q_I1)
    return float(p)


def compare_reference(scenario, settings=None) -> dict | None:
    """Side-by-side comparison with the published numbers in ``scenario.reference``.

    Both price games are solved at the reference ``p_I1`` with oracle
    verification; each published profit is flagged match / mismatch at the
    reference tolerance. A mismatch is a reported outcome, not an error.
    """
    ref = scenario.reference
    if not ref:
        return None
    settings = settings or scenario.settings
    tol = float(ref.get("tolerance", PERIOD1_ORACLE_TOL))
    p_I1 = reference_price(scenario)
    outcome = collaboration_equilibrium(scenario, p_I1, settings, verify=True)
    rows = []
    published = ref.get("profits", {})
    for name, eq in (("fl", outcome.fl), ("local", outcome.local)):
        pub = published.get(name)
        for k, (company, value) in enumerate((("I", eq.W_I2), ("E", eq.W_E2))):
            row = {"profile": name, "company": company, "computed": value,
                   "p_I2": eq.p_I2, "p_E2": eq.p_E2}
            if pub is not None:
                row["reference"] = float(pub[k])
                row["abs_diff"] = abs(value - float(pub[k]))
                row["match"] = row["abs_diff"] <= tol
            rows.append(row)
    block = {
        "p_I1": p_I1,
        "theta1": period1_threshold(scenario.params, scenario.qualities.q_I1, p_I1),
        "tolerance": tol,
        "rows": rows,
        "r_star": list(outcome.r_star.as_tuple()),
        "verified": {"fl": outcome.fl.verified, "local": outcome.local.verified},
        "verdicts": {"fl": outcome.fl.verdict.to_dict(), "local": outcome.local.verdict.to_dict()},
    }
    if "r_star" in ref:
        block["reference_r_star"] = list(ref["r_star"])
        block["r_star_match"] = block["r_star"] == list(ref["r_star"])
    block["all_match"] = all(r.get("match", True) for r in rows) and block.get("r_star_match", True)
    return block


def format_reference(block: dict) -> str:
    lines = [f"reference comparison at p_I1={block['p_I1']:.6g} (tolerance {block['tolerance']:g})",
             f"  {'profile':8} {'co':2} {'computed':>10} {'reference':>10} {'diff':>10}  status"]
    for r in block["rows"]:
        if "reference" in r:
            status = "match" if r["match"] else "MISMATCH"
            lines.append(f"  {r['profile']:8} {r['company']:2} {r['computed']:10.6f} "
                         f"{r['reference']:10.6f} {r['abs_diff']:10.2e}  {status}")
        else:
            lines.append(f"  {r['profile']:8} {r['company']:2} {r['computed']:10.6f}")
    if "reference_r_star" in block:
        status = "match" if block["r_star_match"] else "MISMATCH"
        lines.append(f"  r*: computed {tuple(block['r_star'])}, reference "
                     f"{tuple(block['reference_r_star'])}  {status}")
    v = block["verified"]
    lines.append(f"  no-deviation check: fl={'pass' if v['fl'] else 'FAIL'}, "
                 f"local={'pass' if v['local'] else 'FAIL'}")
    return "\n".join(lines)


def format_summary(rep: dict) -> str:
    pr = rep["profits"]
    lines = [
        f"{rep['scenario']}: r*={tuple(rep['r_star'])} region={rep['region']}",
        f"  p_I1={rep['p_I1']:.6f} theta1={rep['theta1']:.6f} "
        f"p_I2={rep['p_I2']:.6f} p_E2={rep['p_E2']:.6f}",
        f"  W_I={pr['W_I']:.6f} (W_I1={pr['W_I1']:.6f}, W_I2={pr['W_I2']:.6f}) W_E2={pr['W_E2']:.6f}",
    ]
    if "oracle" in rep:
        o = rep["oracle"]
        lines.append(f"  oracle: p_I1={o['p_I1']:.6f} W_I={o['W_I']:.6f} |dW|={o['abs_diff_W_I']:.2e}")
    lines.append(f"  verdict: {'pass' if rep['verdict']['passed'] else 'FAIL'}")
    return "\n".join(lines)
