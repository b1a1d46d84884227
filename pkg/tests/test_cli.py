import json
from fractions import Fraction as F

import pytest

from nadyn.cli import (
    APPLICABLE,
    EXPLAIN,
    RunSettings,
    builtin_names,
    builtin_text,
    load_builtin,
    main,
    parse_scenario,
    render,
    run,
)
from nadyn.errors import ParseError, ValidationError
from nadyn.plmap import PLMap

PAPER_BUILTINS = ["ex1", "ex2", "ex3", "ex4", "ex5", "ex6", "ex7", "ex8", "ex9", "half-trap"]


def scenario(**overrides):
    doc = {
        "name": "t",
        "space": "interval",
        "family": {"kind": "cyclic", "maps": [{"points": [["0", "0"], ["1/2", "1"], ["1", "0"]]}]},
        "analyses": [],
    }
    doc.update(overrides)
    return json.dumps(doc)


def results(report):
    return [b.get("result") for b in report["analyses"]]


def test_builtins_listed():
    names = builtin_names()
    for n in PAPER_BUILTINS + ["identity", "tent"]:
        assert n in names


def test_ex9_builtin_family():
    s = load_builtin("ex9")
    f1, f2 = s.family.maps
    assert f1 == PLMap([0, F(1, 4), F(3, 4), 1], [F(1, 2), 1, 0, F(1, 2)])
    assert f2 == PLMap([0, F(1, 2), F(3, 4), 1], [F(1, 2), 1, 0, F(1, 2)])


@pytest.mark.parametrize("name", PAPER_BUILTINS + ["identity", "tent"])
def test_round_trip(name):
    s = load_builtin(name)
    assert parse_scenario(s.to_json()) == s
    assert parse_scenario(s.to_json()).to_json() == s.to_json()


def test_empty_analyses_echo_family():
    s = parse_scenario(scenario())
    report = run(s)
    assert report["analyses"] == []
    assert report["family"]["kind"] == "cyclic"


def test_out_of_range_value():
    bad = scenario(family={"kind": "cyclic", "maps": [{"points": [["0", "0"], ["1", "7/6"]]}]})
    with pytest.raises(ValidationError) as info:
        parse_scenario(bad)
    assert info.value.invariant == "range"


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as info:
        parse_scenario('{"space": "interval",\n "family": }')
    assert "line 2" in str(info.value)
    bad = scenario(family={"kind": "cyclic", "maps": [{"points": [["0", 0.5], ["1", "1"]]}]})
    with pytest.raises(ParseError) as info:
        parse_scenario(bad)
    assert "maps[0].points[0][1]" in str(info.value)


def test_applicability_checked_before_running():
    text = scenario(
        space="circle",
        family={"kind": "cyclic", "maps": [{"rotate": "1/3"}]},
        analyses=[{"detector": "check_transitivity"}],
    )
    with pytest.raises(ValidationError) as info:
        parse_scenario(text)
    assert info.value.invariant == "applicability"
    with pytest.raises(ValidationError):
        parse_scenario(scenario(analyses=[{"detector": "check_transitivity", "target": "member:3"}]))


def test_ex8_report_has_three_cycle():
    report = run(load_builtin("ex8"))
    li = results(report)[0]
    assert li["li_yorke_certified"]
    assert ["-7/9", "5/9", "1/9"] in li["period3_cycles_display"]
    assert ["1/9", "7/9", "5/9"] in li["period3_cycles"]


def test_identity_report_all_negative():
    for r in results(run(load_builtin("identity"))):
        if "status" in r:
            assert r["status"] in ("CertifiedFalse", "RefutedAtScale")
        elif "li_yorke_certified" in r:
            assert not r["li_yorke_certified"] and not r["scrambled_at_scale"]
        else:
            assert r["increment_est"] == 0


def test_ex2_targets():
    report = run(load_builtin("ex2"))
    status = {
        (b["detector"], b["target"]): b["result"].get("status")
        for b in report["analyses"]
        if b["detector"] == "check_transitivity"
    }
    assert status[("check_transitivity", "composition")] == "VerifiedAtScale"
    assert status[("check_transitivity", "member:1")] == "CertifiedFalse"
    assert status[("check_transitivity", "member:2")] == "CertifiedFalse"
    traps = [b["result"]["trap"] for b in report["analyses"] if b["detector"] == "find_invariant_trap"]
    assert traps == ["[1/2, 1]", "[0, 1/2]"]


def test_errors_are_captured_per_analysis():
    text = scenario(
        family={"kind": "cyclic", "maps": [{"points": [["0", "0"], ["1/2", "1"], ["1", "0"]]}]},
        analyses=[{"detector": "lap_entropy", "params": {"K": 30}}, {"detector": "check_transitivity"}],
    )
    report = run(parse_scenario(text, budget=1000), RunSettings(budget=1000))
    first, second = report["analyses"]
    assert first["error"]["type"] == "BudgetExceeded"
    assert second["result"]["status"] == "VerifiedAtScale"


def test_reports_are_deterministic():
    for name in ("ex2", "ex8", "ex1"):
        s = load_builtin(name)
        assert render(run(s, RunSettings(seed=3))) == render(run(load_builtin(name), RunSettings(seed=3)))


def test_main_run_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["run", "ex4", "--output", str(out)]) == 0
    assert json.loads(out.read_text())["scenario"]["name"] == "ex4"
    assert capsys.readouterr().out == out.read_text()

    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert main(["run", str(bad)]) == 3
    bad.write_text(scenario(family={"kind": "cyclic", "maps": [{"points": [["0", "0"], ["1", "7/6"]]}]}))
    assert main(["run", str(bad)]) == 4
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    assert main(["run", "ex4", "--mesh", "1"]) == 2
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_main_list_and_explain(capsys):
    assert main(["list-builtins"]) == 0
    listed = capsys.readouterr().out
    assert all(n in listed for n in PAPER_BUILTINS)
    for det in APPLICABLE:
        assert det in EXPLAIN
    assert main(["explain", "check_transitivity"]) == 0
    assert "interval" in capsys.readouterr().out
    assert main(["explain", "nope"]) == 2


def test_settings_reach_detectors():
    report = run(load_builtin("ex6"), RunSettings(mesh=8, horizon=32))
    params = report["analyses"][0]["result"]["params"]
    assert (params["m"], params["N"]) == (8, 32)
    assert report["settings"]["mesh"] == 8


def test_builtin_text_is_json():
    for n in builtin_names():
        assert json.loads(builtin_text(n))["name"] == n
