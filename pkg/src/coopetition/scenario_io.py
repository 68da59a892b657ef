"""Scenario files, accuracy fixtures and sweeps over them.

A scenario file is YAML with the sections ``params``, ``distribution``,
``qualities`` and the optional ``settings``, ``metadata`` and ``reference``::

    params: {w_q: 1.0, w_p: 1.0, w_phi: 1.0, c_I: 0.0, c_E: 0.0}
    distribution: {kind: uniform}
    qualities: {q_I1: 0.72, q_local: [0.72, 0.73], q_fl: [0.75, 0.75]}
    settings: {br_tolerance: 1.0e-7}
    metadata: {dataset: CIFAR-10, sweep_key: beta=0.1}

``metadata`` holds labels only; nothing in it reaches the solver.
``reference`` holds externally published numbers to compare against
(see :func:`coopetition.report.compare_reference`).

An accuracy fixture is a CSV with header
``dataset,sweep_key,i_local,i_local_sd,e_local,e_local_sd,fedavg,fedavg_sd``
and an optional ``reported_collab`` column (1/0). Accuracies are percent.
"""
from __future__ import annotations

import csv
import logging
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from . import distributions, oracle
from .errors import ConvergenceError, CoopetitionError, ValidationError
from .market import MarketParams, QualityProfile, period1_threshold
from .settings import SolverSettings

log = logging.getLogger(__name__)

PARAM_FIELDS = ("w_q", "w_p", "w_phi", "c_I", "c_E")
QUALITY_FIELDS = ("q_I1", "q_local", "q_fl")
SECTIONS = ("params", "distribution", "qualities", "settings", "metadata", "reference")
REQUIRED_COLUMNS = ("dataset", "sweep_key", "i_local", "i_local_sd", "e_local", "e_local_sd",
                    "fedavg", "fedavg_sd")
OPTIONAL_COLUMNS = ("reported_collab",)
PERIOD1_ORACLE_TOL = 1e-3


class _Loader(yaml.SafeLoader):
    pass


# PyYAML follows YAML 1.1 and reads "1e-3" as a string; accept it as a float.
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
                 |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
                 |\.[0-9_]+(?:[eE][-+][0-9]+)?
                 |[-+]?\.(?:inf|Inf|INF)
                 |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."))


@dataclass(frozen=True)
class Scenario:
    params: MarketParams
    dist: distributions.PreferenceDistribution
    qualities: QualityProfile
    settings: SolverSettings = SolverSettings()
    metadata: dict = field(default_factory=dict)
    reference: dict | None = None

    def to_dict(self) -> dict:
        q = self.qualities
        d = {
            "params": {k: getattr(self.params, k) for k in PARAM_FIELDS},
            "distribution": self.dist.to_dict(),
            "qualities": {"q_I1": q.q_I1, "q_local": list(q.q_local), "q_fl": list(q.q_fl)},
            "settings": self.settings.to_dict(),
            "metadata": dict(self.metadata),
        }
        if self.reference is not None:
            d["reference"] = self.reference
        return d

    @property
    def label(self) -> str:
        m = self.metadata
        if "dataset" in m and "sweep_key" in m:
            return f"{m['dataset']}/{m['sweep_key']}"
        return str(m.get("name", "scenario"))


def _section(doc, name, required=True):
    if name not in doc or doc[name] is None:
        if required:
            raise ValidationError(f"scenario: missing required section '{name}'")
        return {}
    if not isinstance(doc[name], dict):
        raise ValidationError(f"scenario: section '{name}' must be a mapping")
    return doc[name]


def parse_scenario(doc) -> Scenario:
    """Validate a decoded scenario mapping and build a :class:`Scenario`."""
    if not isinstance(doc, dict):
        raise ValidationError("scenario: top level must be a mapping")
    unknown = sorted(set(doc) - set(SECTIONS))
    if unknown:
        raise ValidationError(f"scenario: unknown section(s) {unknown}")

    p = _section(doc, "params")
    extra = sorted(set(p) - set(PARAM_FIELDS))
    if extra:
        raise ValidationError(f"params: unknown field(s) {extra}")
    missing = [k for k in PARAM_FIELDS if k not in p]
    if missing:
        raise ValidationError(f"params: missing required field '{missing[0]}'")
    params = MarketParams(**{k: p[k] for k in PARAM_FIELDS})

    dist = distributions.from_dict(_section(doc, "distribution"))

    q = _section(doc, "qualities")
    extra = sorted(set(q) - set(QUALITY_FIELDS))
    if extra:
        raise ValidationError(f"qualities: unknown field(s) {extra}")
    for k in QUALITY_FIELDS:
        if k not in q or q[k] is None:
            raise ValidationError(f"qualities: missing required field '{k}'")
    for k in ("q_local", "q_fl"):
        if not isinstance(q[k], (list, tuple)):
            raise ValidationError(f"qualities.{k} must be a pair (q_I2, q_E2)")
    qualities = QualityProfile(q["q_I1"], tuple(q["q_local"]), tuple(q["q_fl"]))

    settings = SolverSettings.from_dict(_section(doc, "settings", required=False))

    metadata = _section(doc, "metadata", required=False)
    for k, v in metadata.items():
        if isinstance(v, (dict, list)):
            raise ValidationError(f"metadata.{k}: labels must be scalars")
    reference = doc.get("reference")
    if reference is not None and not isinstance(reference, dict):
        raise ValidationError("scenario: section 'reference' must be a mapping")
    return Scenario(params, dist, qualities, settings, dict(metadata), reference)


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ValidationError(f"{source}: parse error{where}: {problem}") from None
    try:
        return parse_scenario(doc)
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}") from None


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"scenario file not found: {path}")
    return loads_scenario(path.read_text(), str(path))


def dump_scenario(scenario: Scenario, path=None) -> str:
    """YAML text for ``scenario``; floats are written with ``repr`` so reloads are exact."""
    text = yaml.safe_dump(scenario.to_dict(), sort_keys=False, default_flow_style=None)
    if path is not None:
        Path(path).write_text(text)
    return text


def load_shared_params(path) -> tuple[MarketParams, distributions.PreferenceDistribution, SolverSettings]:
    """Read the params / distribution / settings sections of a sweep parameter file."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"parameter file not found: {path}")
    try:
        doc = yaml.load(path.read_text(), Loader=_Loader)
    except yaml.YAMLError as exc:
        raise ValidationError(f"{path}: parse error: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top level must be a mapping")
    doc = dict(doc)
    # borrow the scenario validator with a placeholder quality block
    doc.setdefault("qualities", {"q_I1": 0.0, "q_local": [0.0, 0.0], "q_fl": [0.0, 0.0]})
    try:
        s = parse_scenario(doc)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    return s.params, s.dist, s.settings


def bundled(name: str) -> Path:
    """Path of a data file shipped with the package (``two_firm_example.yaml`` etc.)."""
    return Path(str(resources.files("coopetition") / "data" / name))


# ---------------------------------------------------------------- fixtures

@dataclass(frozen=True)
class AccuracyFixture:
    dataset: str
    sweep_key: str
    i_local: float
    e_local: float
    fedavg: float
    i_local_sd: float = 0.0
    e_local_sd: float = 0.0
    fedavg_sd: float = 0.0
    reported_collab: bool | None = None

    def __post_init__(self):
        for name in ("i_local", "e_local", "fedavg"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or not 0.0 <= v <= 100.0:
                raise ValidationError(f"fixture {self.key}: {name}={v!r} outside [0, 100]")
        for name in ("i_local_sd", "e_local_sd", "fedavg_sd"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"fixture {self.key}: {name} must be non-negative")

    @property
    def key(self) -> str:
        return f"{self.dataset}/{self.sweep_key}"

    @property
    def sweep(self) -> str:
        """Name of the swept quantity, e.g. ``beta`` or ``D_E``."""
        return self.sweep_key.split("=", 1)[0]

    @property
    def sweep_value(self) -> float:
        raw = self.sweep_key.split("=", 1)[-1].strip().lower()
        mult = 1000.0 if raw.endswith("k") else 1.0
        try:
            return float(raw.rstrip("k")) * mult
        except ValueError:
            return math.nan


def _parse_percent(row, col, lineno):
    try:
        return float(row[col])
    except (TypeError, ValueError):
        raise ValidationError(f"fixture line {lineno}: column '{col}' is not a number: {row[col]!r}") from None


def load_accuracy_fixture(path) -> list[AccuracyFixture]:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"fixture file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise ValidationError(f"{path}: schema mismatch, missing column(s) {missing}")
        extra = [c for c in header if c not in REQUIRED_COLUMNS + OPTIONAL_COLUMNS]
        if extra:
            raise ValidationError(f"{path}: schema mismatch, unexpected column(s) {extra}")
        out, seen = [], set()
        for lineno, row in enumerate(reader, start=2):
            reported = row.get("reported_collab")
            reported = None if reported in (None, "") else reported.strip() in ("1", "true", "True")
            fx = AccuracyFixture(
                dataset=row["dataset"].strip(),
                sweep_key=row["sweep_key"].strip(),
                **{c: _parse_percent(row, c, lineno) for c in REQUIRED_COLUMNS[2:]},
                reported_collab=reported,
            )
            if fx.key in seen:
                raise ValidationError(f"{path}: duplicate row for {fx.key}")
            seen.add(fx.key)
            out.append(fx)
    return out


def scenario_from_fixture(fixture: AccuracyFixture, params: MarketParams,
                          dist: distributions.PreferenceDistribution,
                          settings: SolverSettings = SolverSettings()) -> Scenario:
    """Percent accuracies become fraction-scale qualities; FL quality is shared."""
    q_i, q_e, q_fl = fixture.i_local / 100.0, fixture.e_local / 100.0, fixture.fedavg / 100.0
    qualities = QualityProfile(q_i, (q_i, q_e), (q_fl, q_fl))
    meta = {"dataset": fixture.dataset, "sweep_key": fixture.sweep_key, "sweep": fixture.sweep}
    return Scenario(params, dist, qualities, settings, meta)


# ---------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class CellResult:
    key: str
    dataset: str
    sweep: str
    sweep_key: str
    sweep_value: float
    reported_collab: bool | None
    report: dict | None = None
    error: str | None = None
    error_kind: str | None = None

    @property
    def ok(self) -> bool:
        return self.report is not None

    @property
    def collaborate(self) -> bool | None:
        return None if self.report is None else self.report["collaborate"]

    @property
    def verified(self) -> bool:
        return self.report is not None and self.report["verdict"]["passed"]

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("key", "dataset", "sweep", "sweep_key",
                                           "reported_collab", "report", "error", "error_kind")}
        d["sweep_value"] = None if math.isnan(self.sweep_value) else self.sweep_value
        return d


def oracle_profit_table(scenario: Scenario, p_I1: float) -> dict:
    """Period-2 profits of both collaboration profiles at ``p_I1`` from grid dynamics."""
    params, dist, q = scenario.params, scenario.dist, scenario.qualities
    theta1 = period1_threshold(params, q.q_I1, p_I1)
    table = {}
    for name, pair in (("fl", q.q_fl), ("local", q.q_local)):
        p_I, p_E, W_I, W_E, moving = oracle.grid_br_equilibrium(params, dist, pair, theta1)
        table[name] = {"p_I2": float(p_I[0]), "p_E2": float(p_E[0]),
                       "W_I2": float(W_I[0]), "W_E2": float(W_E[0]), "settled": not bool(moving[0])}
    table["collaborate"] = (table["fl"]["W_I2"] >= table["local"]["W_I2"]
                            and table["fl"]["W_E2"] >= table["local"]["W_E2"])
    return table


def solve_cell(scenario: Scenario, period1_grid: int | None = None) -> dict:
    """Optimize one scenario and attach oracle cross-checks."""
    from .period1 import optimize
    from .report import equilibrium_report

    settings = scenario.settings
    sol = optimize(scenario, settings)
    grid_n = period1_grid or settings.oracle_grid_n
    g = oracle.grid_period1_optimum(scenario, grid_n=grid_n)
    return equilibrium_report(scenario, sol, g, oracle_table=oracle_profit_table(scenario, sol.p_I1))


def _run_cell(args) -> CellResult:
    fixture, params, dist, settings, period1_grid = args
    base = dict(key=fixture.key, dataset=fixture.dataset, sweep=fixture.sweep,
                sweep_key=fixture.sweep_key, sweep_value=fixture.sweep_value,
                reported_collab=fixture.reported_collab)
    try:
        scenario = scenario_from_fixture(fixture, params, dist, settings)
        return CellResult(**base, report=solve_cell(scenario, period1_grid))
    except ConvergenceError as exc:
        return CellResult(**base, error=str(exc), error_kind="convergence")
    except CoopetitionError as exc:
        return CellResult(**base, error=str(exc), error_kind="validation")
    except Exception as exc:  # noqa: BLE001 - one bad cell must not sink the sweep
        log.exception("cell %s failed", fixture.key)
        return CellResult(**base, error=f"{type(exc).__name__}: {exc}", error_kind="internal")


@dataclass(frozen=True)
class SweepReport:
    cells: tuple[CellResult, ...] = ()

    def __len__(self):
        return len(self.cells)

    def cell(self, key: str) -> CellResult:
        for c in self.cells:
            if c.key == key:
                return c
        raise KeyError(key)

    def collaboration_table(self) -> dict:
        """``{sweep: {dataset: {sweep_key: bool | None}}}`` in fixture order."""
        out: dict = {}
        for c in self.cells:
            out.setdefault(c.sweep, {}).setdefault(c.dataset, {})[c.sweep_key] = c.collaborate
        return out

    def pricing_series(self) -> dict:
        """``{(dataset, sweep): rows}`` with one row of optimal prices per sweep value."""
        out: dict = {}
        for c in self.cells:
            if c.report is None:
                continue
            r = c.report
            out.setdefault((c.dataset, c.sweep), []).append(
                (c.sweep_key, c.sweep_value, r["p_I1"], r["p_I2"], r["p_E2"], r["theta1"]))
        return out

    def discrepancies(self) -> list[dict]:
        """Cells whose computed collaboration differs from the reported one."""
        out = []
        for c in self.cells:
            if c.reported_collab is None:
                continue
            if c.collaborate is None or c.collaborate != c.reported_collab:
                r = c.report or {}
                out.append({
                    "cell": c.key,
                    "reported_collab": c.reported_collab,
                    "computed_collab": c.collaborate,
                    "error": c.error,
                    "p_I1": r.get("p_I1"),
                    "theta1": r.get("theta1"),
                    "solver_profit_table": r.get("profit_table"),
                    "oracle_profit_table": r.get("oracle_profit_table"),
                    "oracle_period1": r.get("oracle"),
                })
        return out

    @property
    def all_verified(self) -> bool:
        return all(c.verified for c in self.cells)

    @property
    def failures(self) -> list[CellResult]:
        return [c for c in self.cells if not c.ok]

    def to_dict(self) -> dict:
        return {
            "cells": [c.to_dict() for c in self.cells],
            "collaboration": self.collaboration_table(),
            "discrepancies": self.discrepancies(),
            "all_verified": self.all_verified,
        }


def run_sweep(fixtures, params: MarketParams, dist: distributions.PreferenceDistribution,
              settings: SolverSettings = SolverSettings(), workers: int = 1,
              period1_grid: int | None = None) -> SweepReport:
    """Solve every fixture cell; failures are recorded per cell and the sweep goes on.

    Results keep the fixture order whether run serially or in a process pool,
    so both modes serialize identically.
    """
    jobs = [(fx, params, dist, settings, period1_grid) for fx in fixtures]
    if not jobs:
        return SweepReport(())
    if workers <= 1:
        cells = [_run_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            cells = list(ex.map(_run_cell, jobs))
    for c in cells:
        log.info("%s: %s", c.key, c.error or f"collaborate={c.collaborate}")
    return SweepReport(tuple(cells))


def series_csv(rows) -> str:
    lines = ["sweep_key,x,p_I1,p_I2,p_E2,theta1"]
    for key, x, p1, pi, pe, th in rows:
        lines.append(f"{key},{x!r},{p1!r},{pi!r},{pe!r},{th!r}")
    return "\n".join(lines) + "\n"


def table_csv(report: SweepReport) -> str:
    lines = ["dataset,sweep,sweep_key,collaborate,reported_collab,verified,error"]
    for c in report.cells:
        fmt = {None: "", True: "1", False: "0"}
        err = (c.error or "").replace(",", ";").replace("\n", " ")
        lines.append(f"{c.dataset},{c.sweep},{c.sweep_key},{fmt[c.collaborate]},"
                     f"{fmt[c.reported_collab]},{fmt[c.verified]},{err}")
    return "\n".join(lines) + "\n"


def write_sweep(report: SweepReport, outdir, extra: dict | None = None) -> list[Path]:
    """Write the JSON report, the collaboration table and one series file per curve."""
    from .report import dumps

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    doc = report.to_dict()
    if extra:
        doc.update(extra)
    p = outdir / "sweep_report.json"
    p.write_text(dumps(doc))
    written.append(p)
    p = outdir / "collaboration.csv"
    p.write_text(table_csv(report))
    written.append(p)
    for (dataset, sweep), rows in report.pricing_series().items():
        p = outdir / f"prices_{_slug(dataset)}_{_slug(sweep)}.csv"
        p.write_text(series_csv(rows))
        written.append(p)
    return written


def _slug(s: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "-", s).strip("-").lower()

