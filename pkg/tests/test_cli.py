# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

import json

import pytest
from typer.testing import CliRunner

from src.cli.main import app
from src.core.result_io import load_sweep
from src.core.scenario import DEFAULT_SCENARIO

runner = CliRunner()


def _with_first_member_active(value):
    members = [dict(m) for m in DEFAULT_SCENARIO["members"]]
    members[0]["active"] = value
    return json.dumps({**DEFAULT_SCENARIO, "members": members})


def _flat(output: str) -> str:
    return " ".join(output.split())


def test_generate_writes_members_and_edges(tmp_path):
    out = tmp_path / "net"
    args = ["generate", "--n", "1000", "--seed", "42", "--model", "model2", "--k", "3", "--out", str(out)]
    result = runner.invoke(app, args)
    assert result.exit_code == 0, result.output

    members = (out / "members.csv").read_bytes()
    edges = (out / "edges.csv").read_bytes()
    assert len(members.splitlines()) == 1 + 1000
    assert len(edges.splitlines()) == 1 + 3000

    again = runner.invoke(app, args)
    assert again.exit_code == 0
    assert (out / "members.csv").read_bytes() == members
    assert (out / "edges.csv").read_bytes() == edges


def test_generate_reads_seed_from_environment(tmp_path):
    flags = ["--n", "30", "--model", "model1", "--activity", "0.3"]
    explicit = runner.invoke(app, ["generate", *flags, "--seed", "42", "--out", str(tmp_path / "a")])
    from_env = runner.invoke(app, ["generate", *flags, "--out", str(tmp_path / "b")], env={"HOLOVOTE_SEED": "42"})
    assert explicit.exit_code == from_env.exit_code == 0
    for name in ("members.csv", "edges.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_generate_with_domains(tmp_path):
    result = runner.invoke(
        app, ["generate", "--n", "20", "--k", "2", "--domains", "tax,health", "--out", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    rows = (tmp_path / "edges.csv").read_text().splitlines()[1:]
    assert {row.rsplit(",", 1)[1] for row in rows} <= {"tax", "health"}


@pytest.mark.parametrize(
    "args",
    [
        ["--n", "0"],
        ["--model", "model1", "--k", "2"],
        ["--model", "model2", "--n", "3", "--k", "3"],
        ["--depth", "zero"],
        ["--activity", "1.5"],
        ["--model", "triangle"],
        ["--domains", ","],
        ["--bogus"],
    ],
)
def test_generate_usage_errors(tmp_path, args):
    out = tmp_path / "never"
    result = runner.invoke(app, ["generate", *args, "--out", str(out)])
    assert result.exit_code == 2
    assert not out.exists()


def test_generate_without_representatives_fails(tmp_path):
    out = tmp_path / "net"
    result = runner.invoke(app, ["generate", "--n", "10", "--model", "model1", "--activity", "0", "--out", str(out)])
    assert result.exit_code == 1
    assert not out.exists()


def test_minimal_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    args = [
        "sweep", "--n", "10", "--topologies", "k0", "--participation", "1.0:1.0:1.0",
        "--trials", "1", "--seed", "1", "--out", str(out), "--plot",
    ]
    result = runner.invoke(app, args)
    assert result.exit_code == 0, result.output

    records = load_sweep(out)
    assert len(records) == 1
    assert records[0].mean_error <= 1e-12
    assert out.with_suffix(".svg").exists()


def test_sweep_output_is_reproducible(tmp_path):
    args = ["sweep", "--n", "40", "--topologies", "k0,k1d1,k2dinf", "--participation", "0.25:1.0:0.25", "--trials", "3"]
    first = runner.invoke(app, [*args, "--seed", "7", "--out", str(tmp_path / "a.csv")])
    second = runner.invoke(app, [*args, "--seed", "7", "--out", str(tmp_path / "b.csv")])
    assert first.exit_code == second.exit_code == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert len((tmp_path / "a.csv").read_text().splitlines()) == 1 + 3 * 4


@pytest.mark.parametrize(
    "args",
    [
        ["--participation", "0.9:0.1:0.05"],
        ["--participation", "0.1-0.9"],
        ["--topologies", "k9x"],
        ["--topologies", "k0,k0"],
        ["--trials", "0"],
        ["--mode", "sideways"],
        ["--n", "10", "--participation", "0.01:0.02:0.01"],
    ],
)
def test_sweep_usage_errors(tmp_path, args):
    out = tmp_path / "sweep.csv"
    result = runner.invoke(app, ["sweep", "--n", "20", "--trials", "1", *args, "--out", str(out)])
    assert result.exit_code == 2
    assert not out.exists()


def _write_sweep(path, body):
    path.write_text("topology,participation,mean_error,std_error,mean_stranded,trials\n" + body)
    return path


def test_compare_single_topology(tmp_path):
    path = _write_sweep(tmp_path / "one.csv", "k0,0.5,0.1,0.01,0,10\nk0,1,0,0,0,10\n")
    result = runner.invoke(app, ["compare", str(path)])
    assert result.exit_code == 0, result.output
    assert "Best topology: k0" in _flat(result.output)


def test_compare_reports_band_agreement(tmp_path):
    path = _write_sweep(
        tmp_path / "two.csv",
        "k0,0.2,0.05,0.01,0,10\nk0,1,0,0,0,10\nk1d1,0.2,0.01,0.01,0,10\nk1d1,1,0,0,0,10\n",
    )
    result = runner.invoke(app, ["compare", str(path)])
    assert result.exit_code == 0, result.output
    flat = _flat(result.output)
    assert "Best topology: k1d1" in flat
    assert "DISAGREES" in flat
    assert "0.20" in flat


def test_compare_reports_dominance(tmp_path):
    path = _write_sweep(
        tmp_path / "three.csv",
        "k1d1,0.1,0.0002,0,0.1,10\nk1d1,0.5,0.0001,0,0,10\nk1d1,1,0,0,0,10\n"
        "k3dinf,0.1,0.22,0.01,0.45,10\nk3dinf,0.5,0.00005,0,0,10\nk3dinf,1,0,0,0,10\n",
    )
    result = runner.invoke(app, ["compare", str(path)])
    assert result.exit_code == 0, result.output
    flat = _flat(result.output)
    assert "k3dinf beats k1d1" in flat
    assert "FAILS" in flat
    assert "ranks 2 by AUC" in flat
    assert "not lower than k1d1 at: 0.10" in flat


def test_compare_truncated_row(tmp_path):
    path = _write_sweep(tmp_path / "bad.csv", "k0,0.5,0.1,0.01,0,10\nk0,1,0\n")
    result = runner.invoke(app, ["compare", str(path)])
    assert result.exit_code == 1
    assert "line 3" in _flat(result.output)


def test_compare_rejects_non_finite_statistics(tmp_path):
    path = _write_sweep(tmp_path / "nan.csv", "k0,0.5,0.1,0.01,0,10\nk0,1,nan,0,0,10\n")
    result = runner.invoke(app, ["compare", str(path)])
    assert result.exit_code == 1
    assert "line 3" in _flat(result.output)


def test_compare_missing_file(tmp_path):
    result = runner.invoke(app, ["compare", str(tmp_path / "absent.csv")])
    assert result.exit_code == 1


def test_workspace_demo_default():
    result = runner.invoke(app, ["workspace-demo"])
    assert result.exit_code == 0, result.output
    flat = _flat(result.output)
    assert "size history: 0 → 1 → 2 → 3 → 1" in flat
    assert "Selected problem: p-traffic" in flat
    assert "Selected solution: s-bus-lanes" in flat


def test_power_weighting_flips_the_demo():
    result = runner.invoke(app, ["workspace-demo", "--power-weighted"])
    assert result.exit_code == 0, result.output
    flat = _flat(result.output)
    assert "member 2: 3" in flat
    assert "Selected problem: p-parks" in flat
    assert "Selected solution: s-river-walk" in flat


def test_workspace_demo_with_single_candidates(tmp_path):
    scenario = {
        "members": [{"id": 0, "opinion": 0.5, "active": True}],
        "method": "borda",
        "problems": [{"id": "only-problem", "author": 0}],
        "solutions": {"only-problem": [{"id": "only-solution", "author": 0}]},
        "problem_ballots": [{"voter": 0, "ranking": ["only-problem"]}],
        "solution_ballots": [{"voter": 0, "ranking": ["only-solution"]}],
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(scenario))
    result = runner.invoke(app, ["workspace-demo", "--scenario", str(path)])
    assert result.exit_code == 0, result.output
    flat = _flat(result.output)
    assert "Selected problem: only-problem" in flat
    assert "Selected solution: only-solution" in flat


@pytest.mark.parametrize(
    "content",
    [
        "{not json",
        "[]",
        json.dumps({"members": []}),
        json.dumps({"members": [{"id": 0, "opinion": 2.0, "active": True}]}),
        json.dumps({**DEFAULT_SCENARIO, "solutions": [["s-bus-lanes"]]}),
        json.dumps({**DEFAULT_SCENARIO, "solutions": {"p-traffic": [["s-bus-lanes", 0]]}}),
        _with_first_member_active("false"),
        _with_first_member_active(2),
    ],
)
def test_workspace_demo_bad_scenarios(tmp_path, content):
    path = tmp_path / "scenario.json"
    path.write_text(content)
    result = runner.invoke(app, ["workspace-demo", "--scenario", str(path)])
    assert result.exit_code == 1


def test_workspace_demo_missing_scenario(tmp_path):
    result = runner.invoke(app, ["workspace-demo", "--scenario", str(tmp_path / "absent.json")])
    assert result.exit_code == 1


def test_config_command():
    result = runner.invoke(app, ["config"])
    assert result.exit_code == 0
    assert "HOLOVOTE_SEED" in result.output


def test_workspace_demo_accepts_integer_activity_flags(tmp_path):
    members = [{**m, "active": int(m["active"])} for m in DEFAULT_SCENARIO["members"]]
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({**DEFAULT_SCENARIO, "members": members}))
    result = runner.invoke(app, ["workspace-demo", "--scenario", str(path)])
    assert result.exit_code == 0, result.output
    assert "Selected solution: s-bus-lanes" in _flat(result.output)
