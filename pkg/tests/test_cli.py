import json
import os

import pytest

from stringsim import cli

TINY = """
[scenario]
name = "tiny"
L = 6
beta = 0.78
environment = "string"
g_over_J = 0.75
h_over_J = [0.0, 0.6]

[protocol]
t_max = 2.0
n_times = 11
shots = 40
seed = 3

[outputs]
maps = true
twobody = true
thermal = true
"""


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.toml"
    path.write_text(TINY)
    return str(path)


def _artifact_dirs(root, name):
    base = os.path.join(root, name)
    return sorted(os.path.join(base, d) for d in os.listdir(base))


def test_run_writes_expected_layout(tiny_config, tmp_path):
    out = str(tmp_path / "out")
    assert cli.main(["run", tiny_config, "--out", out]) == 0
    dirs = _artifact_dirs(out, "tiny")
    assert len(dirs) == 2  # one per h value
    for d in dirs:
        files = set(os.listdir(d))
        assert {"qmap.csv", "emap.csv", "fits.json", "thermal.csv",
                "twobody.csv", "manifest.json"} <= files
        manifest = json.load(open(os.path.join(d, "manifest.json")))
        assert manifest["spec_hash"] == os.path.basename(d)
        assert manifest["parameters"]["L"] == 6
        assert manifest["seed"] == 3


def test_run_outputs_are_deterministic(tiny_config, tmp_path):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert cli.main(["run", tiny_config, "--out", out1]) == 0
    assert cli.main(["run", tiny_config, "--out", out2]) == 0
    for d1, d2 in zip(_artifact_dirs(out1, "tiny"), _artifact_dirs(out2, "tiny")):
        for f in ("qmap.csv", "emap.csv", "fits.json", "thermal.csv", "twobody.csv"):
            b1 = open(os.path.join(d1, f), "rb").read()
            b2 = open(os.path.join(d2, f), "rb").read()
            assert b1 == b2, f


def test_threaded_grid_matches_serial(tiny_config, tmp_path):
    out1, out2 = str(tmp_path / "s"), str(tmp_path / "t")
    assert cli.main(["run", tiny_config, "--out", out1]) == 0
    assert cli.main(["run", tiny_config, "--out", out2, "--threads", "2"]) == 0
    for d1, d2 in zip(_artifact_dirs(out1, "tiny"), _artifact_dirs(out2, "tiny")):
        q1 = open(os.path.join(d1, "qmap.csv"), "rb").read()
        q2 = open(os.path.join(d2, "qmap.csv"), "rb").read()
        assert q1 == q2


def test_seed_flag_changes_output_location(tiny_config, tmp_path):
    out = str(tmp_path / "out")
    assert cli.main(["run", tiny_config, "--out", out, "--seed", "99"]) == 0
    for d in _artifact_dirs(out, "tiny"):
        assert json.load(open(os.path.join(d, "manifest.json")))["seed"] == 99


def test_set_overrides_config(tiny_config, tmp_path):
    out = str(tmp_path / "out")
    assert cli.main(["run", tiny_config, "--out", out,
                     "--set", "protocol.n_times=5",
                     "--set", "outputs.thermal=false",
                     "--set", "scenario.h_over_J=[0.6]"]) == 0
    dirs = _artifact_dirs(out, "tiny")
    assert len(dirs) == 1
    assert "thermal.csv" not in os.listdir(dirs[0])
    with open(os.path.join(dirs[0], "qmap.csv")) as f:
        times = {line.split(",")[0] for line in f.readlines()[1:]}
    assert len(times) == 5


def test_malformed_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[scenario]\nname = 'x'\nL = 'six'\n")
    assert cli.main(["run", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "scenario.L" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path):
    assert cli.main(["run", str(tmp_path / "nope.toml")]) == 2


def test_invalid_environment_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('[scenario]\nname = "x"\nL = 4\nbeta = 0.78\n'
                   'environment = "plasma"\n')
    assert cli.main(["run", str(bad)]) == 2
    assert "environment" in capsys.readouterr().err


def test_bundled_scenario_resolves(tmp_path):
    out = str(tmp_path / "out")
    code = cli.main(["run", "fig2_bloch", "--out", out,
                     "--set", "protocol.t_max=1.0",
                     "--set", "protocol.n_times=5",
                     "--set", "outputs.fits=[]"])
    assert code == 0
    assert os.path.isdir(os.path.join(out, "fig2_bloch"))


def test_accept_subset_passes(tmp_path, capsys):
    out = str(tmp_path / "acc")
    assert cli.main(["accept", "--only", "virtual", "--out", out]) == 0
    assert "[PASS] virtual-field-oracle" in capsys.readouterr().out
    report = json.load(open(os.path.join(out, "acceptance.json")))
    assert report[0]["passed"] is True


def test_accept_localizes_induced_failure(monkeypatch, capsys):
    # breaking the chain geometry must fail exactly the criterion that uses it
    from stringsim import couplings as cp
    monkeypatch.setattr(cp, "chain_positions",
                        lambda n, spacing=3.75e-6, edge_relaxation=0.25:
                        cp.uniform_chain_positions(n, spacing))
    assert cli.main(["accept", "--only", "virtual", "--only", "coupling"]) == 1
    lines = capsys.readouterr().out.strip().splitlines()
    tags = {l.split()[1]: l.split()[0] for l in lines}
    assert tags["virtual-field-oracle"] == "[PASS]"
    assert tags["coupling-synthesis"] == "[FAIL]"


def test_calibrate_writes_report(tmp_path, capsys):
    out = str(tmp_path / "cal")
    assert cli.main(["calibrate", "--out", out]) == 0
    report = json.load(open(os.path.join(out, "calibration.json")))
    assert abs(report["fit"]["beta"] - 0.78) <= 0.1
    assert os.path.exists(os.path.join(out, "couplings.csv"))


def test_thermal_verb(tiny_config, tmp_path, capsys):
    out = str(tmp_path / "th")
    assert cli.main(["thermal", tiny_config, "--out", out]) == 0
    dirs = _artifact_dirs(out, "tiny")
    assert len(dirs) == 2
    for d in dirs:
        assert os.path.exists(os.path.join(d, "thermal.csv"))
        info = json.load(open(os.path.join(d, "thermal.json")))
        assert "temperature" in info
