import json
import os

import pytest

from trajbench.cli import main
from trajbench.workbench import (InputError, instance_to_json, load_instance, parse_regimes, regime_sweep,
                                 run_command)

SCN_C = {
    "s0": "1",
    "families": [
        {"kind": "delayed_jump", "prefix": ["1"], "plateau": "2", "jump_to": "4", "label": "U"},
        {"kind": "explicit", "trajectories": [{"label": "D", "path": ["1", "0"]},
                                              {"label": "Z", "breakpoints": [[0, "1"]]}]},
    ],
    "regime": {"N": 4, "M": 3},
}


@pytest.fixture
def write(tmp_path):
    def put(doc, name="inst.json"):
        p = tmp_path / name
        p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(p)
    return put


def test_load_scn_c_file(write, scn):
    inst = load_instance(write(SCN_C))
    assert inst.labels == scn("SCN-C", 4, 3).labels
    assert inst.regime_kind == "emulation"


def test_zero_denominator_reports_location(write):
    doc = json.loads(json.dumps(SCN_C))
    doc["families"][1]["trajectories"][0]["path"][1] = "1/0"
    with pytest.raises(InputError, match=r"families\[1\]\.trajectories\[0\]\.path\[1\]: zero denominator"):
        load_instance(write(doc))


@pytest.mark.parametrize("mutate, where", [
    (lambda d: d.pop("s0"), "s0"),
    (lambda d: d["regime"].update(M=0), "regime"),
    (lambda d: d["families"][0].update(kind="weird"), r"families\[0\]\.kind"),
    (lambda d: d["families"][1]["trajectories"][0].update(path=[1, 0.5]), "path"),
])
def test_schema_errors(write, mutate, where):
    doc = json.loads(json.dumps(SCN_C))
    mutate(doc)
    with pytest.raises(InputError, match=where):
        load_instance(write(doc))


def test_json_syntax_error(write):
    with pytest.raises(InputError, match="line 1"):
        load_instance(write("{nope"))


def test_instance_json_roundtrip(write, scn):
    inst = scn("SCN-B", 3, 2)
    back = load_instance(write(instance_to_json(inst)))
    assert back.classes == inst.classes and back.labels == inst.labels


def test_sweep_rows_and_order(monkeypatch):
    monkeypatch.setenv("WORKBENCH_THREADS", "3")
    rep = regime_sweep("SCN-C", "ind(S[1] < 1/2)", [(6, 4), (3, 4), (5, 4)])
    assert [r.M for r in rep.rows] == [6, 3, 5]
    assert rep.csv().splitlines() == [
        "M,N,null,L,sigmabar,ibar,dual,regime",
        "6,4,5,true,0,0,0,exact",
        "3,4,2,true,1/2,1/2,1/2,emulation",
        "5,4,5,true,0,0,0,exact",
    ]


def test_sweep_shows_minus_infinity():
    rep = regime_sweep("SCN-B", "abs(S[1]-1)", [(8, 6)])
    assert rep.rows[0].cells()[4] == "-inf"


def test_parse_regimes():
    assert parse_regimes("3:4, 6:4") == [(3, 4), (6, 4)]
    with pytest.raises(InputError):
        parse_regimes("3-4")


def test_run_command_dispatch(scn):
    rep = run_command("price", scn("SCN-C", 4, 3), op="ibar", payoff="ind(S[1] < 1/2)")
    assert rep.rows == [["ibar", "1/2", "V=1/2 n=3 H(1)=-1/2"]]


def test_cli_price(capsys):
    assert main(["price", "--scenario", "SCN-C", "--N", "4", "--M", "3", "--op", "sigmabar",
                 "--payoff", "ind(S[1] < 1/2)"]) == 0
    out = capsys.readouterr().out
    assert "sigmabar  1/2" in out and "dual      1/2    U4:1/2 D:1/2" in out


def test_cli_instance_file(write, capsys):
    assert main(["check", "--instance", write(SCN_C), "--condition", "L"]) == 0
    assert "true" in capsys.readouterr().out


def test_cli_replicate_infeasible_reports_certificate(capsys):
    assert main(["price", "--scenario", "A", "--op", "replicate", "--payoff", "abs(S[1]-1)"]) == 0
    assert "infeasible" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["price", "--scenario", "A"],
    ["price", "--op", "norm", "--payoff", "S[1]"],
    ["check", "--scenario", "A", "--condition", "Q"],
])
def test_usage_exit_code(argv, capsys):
    assert main(argv) == 1


@pytest.mark.parametrize("argv", [
    ["price", "--scenario", "A", "--op", "norm", "--payoff", "S[1]/S[0]"],
    ["price", "--scenario", "A", "--op", "norm"],
    ["classify", "--scenario", "SCN-Q"],
    ["classify", "--instance", "/nonexistent.json"],
    ["price", "--scenario", "A", "--op", "ibar", "--payoff", "S[1]-1"],
])
def test_input_exit_code(argv, capsys):
    assert main(argv) == 2
    assert "input error" in capsys.readouterr().err


def test_construct_failure_exit_code(capsys):
    assert main(["martingale", "--scenario", "SCN-C", "--action", "construct"]) == 2
    assert "type-II" in capsys.readouterr().err


def test_invariant_exit_code(monkeypatch, capsys):
    from trajbench import hedging
    monkeypatch.setattr(hedging.PriceResult, "certified", lambda self: False)
    assert main(["price", "--scenario", "A", "--op", "sigmabar", "--payoff", "S[1]"]) == 3


def test_measure_file(write, capsys):
    m = write({"Z": "1"}, "q.json")
    assert main(["martingale", "--scenario", "SCN-C", "--action", "expect", "--measure", m,
                 "--payoff", "ind(S[1] < 1/2)"]) == 0
    assert "0 <= 1/2 <= 1/2 pass" in capsys.readouterr().out


def test_report_is_deterministic(tmp_path):
    a, b = tmp_path / "a.md", tmp_path / "b.md"
    for p in (a, b):
        assert main(["report", "--scenario", "SCN-C", "--out", str(p)]) == 0
    assert a.read_text() == b.read_text()
    assert a.read_text().startswith("# Trajectory set report")


def test_sweep_cli_csv(capsys):
    assert main(["sweep", "--scenario", "SCN-C", "--payoff", "ind(S[1] < 1/2)", "--regimes", "3:4,6:4",
                 "--format", "csv"]) == 0
    assert capsys.readouterr().out.splitlines()[1:] == ["3,4,2,true,1/2,1/2,1/2,emulation",
                                                         "6,4,5,true,0,0,0,exact"]
