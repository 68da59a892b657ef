import dataclasses
import json

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from coopetition.distributions import TruncatedGaussian, Uniform
from coopetition.errors import ValidationError
from coopetition.market import MarketParams, QualityProfile
from coopetition.report import dumps
from coopetition.scenario_io import (AccuracyFixture, Scenario, bundled, dump_scenario,
                                     load_accuracy_fixture, load_scenario, load_shared_params,
                                     loads_scenario, run_sweep, scenario_from_fixture)
from coopetition.settings import SolverSettings

from conftest import UNIT

GOOD = """
params: {w_q: 1, w_p: 1, w_phi: 1, c_I: 0, c_E: 0}
distribution: {kind: uniform}
qualities: {q_I1: 0.7, q_local: [0.7, 0.6], q_fl: [0.8, 0.8]}
settings: {br_tolerance: 1e-8, scan_points: 32}
metadata: {dataset: demo, D_I: 5000}
"""


def test_bundled_example_scenario(example):
    assert example.qualities.q_local == (0.72, 0.73)
    assert example.qualities.q_fl == (0.75, 0.75)
    assert example.qualities.q_I1 == 0.72
    assert isinstance(example.dist, Uniform)
    assert example.params == MarketParams(1.0, 1.0, 1.0, 0.0, 0.0)
    assert example.reference["profits"]["fl"] == [0.061, 0.0675]


def test_inline_scenario_parses_exponent_floats():
    s = loads_scenario(GOOD)
    assert s.settings.br_tolerance == 1e-8 and s.settings.scan_points == 32
    assert s.metadata == {"dataset": "demo", "D_I": 5000}


def test_w_p_zero_rejected():
    with pytest.raises(ValidationError, match="w_p must be positive"):
        loads_scenario(GOOD.replace("w_p: 1", "w_p: 0"))


def test_missing_q_fl_named():
    with pytest.raises(ValidationError, match="q_fl"):
        loads_scenario(GOOD.replace(", q_fl: [0.8, 0.8]", ""))


@pytest.mark.parametrize("edit,field", [
    (("params: {", "params: {bogus: 1, "), "bogus"),
    (("kind: uniform", "kind: cauchy"), "distribution.kind"),
    (("scan_points: 32", "scan_points: lots"), "settings.scan_points"),
    (("D_I: 5000", "D_I: [1, 2]"), "metadata.D_I"),
    (("q_local: [0.7, 0.6]", "q_local: 0.7"), "q_local"),
    (("c_E: 0", "c_E: -1"), "c_E"),
])
def test_validation_errors_name_the_field(edit, field):
    with pytest.raises(ValidationError, match=field.replace(".", r"\.")):
        loads_scenario(GOOD.replace(*edit))


def test_parse_error_reports_line():
    with pytest.raises(ValidationError, match="line 3"):
        loads_scenario("params:\n  w_q: 1\n w_p: 2\nqualities: {}\n")


def test_missing_file():
    with pytest.raises(ValidationError, match="not found"):
        load_scenario("/nonexistent/x.yaml")


def test_round_trip_bundled(example, tmp_path):
    path = tmp_path / "s.yaml"
    dump_scenario(example, path)
    assert load_scenario(path) == example


finite = st.floats(0.0, 10.0, allow_nan=False, allow_infinity=False)
positive = st.floats(1e-6, 10.0)


@hsettings(max_examples=80, deadline=None)
@given(w=st.tuples(positive, positive, positive), c=st.tuples(finite, finite),
       q=st.tuples(finite, finite, finite, finite, finite), sd=st.floats(0.01, 2.0),
       tol=st.floats(1e-14, 1e-3))
def test_round_trip_is_bitwise(w, c, q, sd, tol):
    s = Scenario(MarketParams(*w, *c), TruncatedGaussian(0.5, sd),
                 QualityProfile(q[0], (q[1], q[2]), (q[3], q[4])),
                 SolverSettings(br_tolerance=tol), {"dataset": "x", "sweep_key": "beta=0.1"})
    back = loads_scenario(dump_scenario(s))
    assert back == s
    for a, b in zip(dataclasses.astuple(back.params), dataclasses.astuple(s.params)):
        assert a.hex() == b.hex()


def test_fixture_values(fixtures):
    assert len(fixtures) == 22
    by_key = {f.key: f for f in fixtures}
    c = by_key["CIFAR-10/beta=inf"]
    assert (c.i_local, c.e_local, c.fedavg) == (60.81, 57.56, 69.81)
    assert (c.i_local_sd, c.e_local_sd, c.fedavg_sd) == (4.32, 3.75, 2.26)
    h = by_key["HAM10000/D_E=2k"]
    assert (h.i_local, h.e_local, h.fedavg) == (76.37, 73.67, 79.90)
    assert h.reported_collab is False and c.reported_collab is True
    assert h.sweep == "D_E" and h.sweep_value == 2000.0
    assert c.sweep == "beta" and c.sweep_value == float("inf")


def _write_csv(tmp_path, rows, header="dataset,sweep_key,i_local,i_local_sd,e_local,e_local_sd,fedavg,fedavg_sd"):
    p = tmp_path / "f.csv"
    p.write_text(header + "\n" + "\n".join(rows) + "\n")
    return p


def test_fixture_range_error(tmp_path):
    p = _write_csv(tmp_path, ["X,beta=1,135,1,50,1,60,1"])
    with pytest.raises(ValidationError, match=r"i_local=135.0 outside \[0, 100\]"):
        load_accuracy_fixture(p)


def test_fixture_schema_mismatch(tmp_path):
    p = _write_csv(tmp_path, ["X,beta=1,50,50,60"], header="dataset,sweep_key,i_local,e_local,fedavg")
    with pytest.raises(ValidationError, match="schema mismatch"):
        load_accuracy_fixture(p)


def test_fixture_non_numeric_and_duplicate(tmp_path):
    with pytest.raises(ValidationError, match="i_local"):
        load_accuracy_fixture(_write_csv(tmp_path, ["X,beta=1,abc,1,50,1,60,1"]))
    with pytest.raises(ValidationError, match="duplicate"):
        load_accuracy_fixture(_write_csv(tmp_path, ["X,beta=1,50,1,50,1,60,1"] * 2))


def test_scenario_from_fixture(fixtures):
    by_key = {f.key: f for f in fixtures}
    s = scenario_from_fixture(by_key["CIFAR-10/beta=inf"], UNIT, Uniform())
    assert s.qualities.q_I1 == pytest.approx(0.6081, abs=1e-15)
    assert s.qualities.q_local == pytest.approx((0.6081, 0.5756), abs=1e-15)
    assert s.qualities.q_fl == pytest.approx((0.6981, 0.6981), abs=1e-15)
    s = scenario_from_fixture(by_key["HAM10000/D_E=5k"], UNIT, Uniform())
    assert s.qualities.q_fl == pytest.approx((0.8109, 0.8109), abs=1e-15)
    z = scenario_from_fixture(AccuracyFixture("Z", "beta=1", 0.0, 0.0, 0.0), UNIT, Uniform())
    assert z.qualities == QualityProfile(0.0, (0.0, 0.0), (0.0, 0.0))


def test_empty_sweep():
    r = run_sweep([], UNIT, Uniform())
    assert len(r) == 0 and r.collaboration_table() == {} and r.discrepancies() == []


def test_sweep_cells_carry_verdicts_and_are_deterministic(fixtures):
    cells = [fixtures[3], fixtures[18]]
    a = run_sweep(cells, UNIT, Uniform(), period1_grid=400)
    b = run_sweep(cells, UNIT, Uniform(), period1_grid=400)
    assert dumps(a.to_dict()) == dumps(b.to_dict())
    for c in a.cells:
        assert c.ok and "verdict" in c.report and c.verified
    assert a.collaboration_table() == {"beta": {"CIFAR-10": {"beta=0.1": True}},
                                       "D_E": {"HAM10000": {"D_E=2k": True}}}
    [d] = a.discrepancies()
    assert d["cell"] == "HAM10000/D_E=2k" and d["reported_collab"] is False
    assert set(d["oracle_profit_table"]) == {"fl", "local", "collaborate"}


def test_sweep_isolates_failing_cell(fixtures):
    bad = SolverSettings(max_br_iterations=1)
    r = run_sweep(fixtures[:2], UNIT, Uniform(), bad, period1_grid=200)
    assert all(not c.ok and c.error_kind == "convergence" for c in r.cells)
    assert len(r.cells) == 2 and not r.all_verified


def test_metadata_is_inert(fixtures):
    s = scenario_from_fixture(fixtures[0], UNIT, Uniform())
    relabeled = dataclasses.replace(s, metadata={"dataset": "other", "D_E": 123})
    from coopetition.period1 import optimize
    assert optimize(s).W_I == optimize(relabeled).W_I


def test_shared_params_file():
    params, dist, settings = load_shared_params(bundled("sweep_params.yaml"))
    assert params == UNIT and isinstance(dist, Uniform) and settings == SolverSettings()


def test_sweep_report_json_round_trips(fixtures):
    r = run_sweep(fixtures[:1], UNIT, Uniform(), period1_grid=200)
    doc = json.loads(dumps(r.to_dict()))
    assert doc["cells"][0]["key"] == "CIFAR-10/beta=inf"
