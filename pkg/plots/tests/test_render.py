import os
import subprocess
import sys

import pytest

from stringplots import FigureRecipe, SchemaError, render, render_run

CONFIG = """
[scenario]
name = "demo"
L = 6
beta = 0.78
environment = "string"
g_over_J = 0.75
h_over_J = 0.6

[protocol]
t_max = 2.0
n_times = 9
shots = 0
seed = 1

[outputs]
maps = true
twobody = true
thermal = true
"""


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    """A completed simulator run, produced through the CLI file interface."""
    root = tmp_path_factory.mktemp("artifacts")
    cfg = root / "demo.toml"
    cfg.write_text(CONFIG)
    out = subprocess.run(
        [sys.executable, "-m", "stringsim.cli", "run", str(cfg),
         "--out", str(root / "out")],
        capture_output=True, text=True, check=True)
    return out.stdout.strip().splitlines()[0]


def test_render_writes_all_panels(run_dir, tmp_path):
    paths = render_run(run_dir, str(tmp_path / "figs"))
    names = {os.path.basename(p) for p in paths}
    for panel in ("qmap", "emap", "potential", "thermal"):
        for ext in ("png", "svg"):
            assert any(n.endswith(f"{panel}.{ext}") for n in names), (panel, ext)


def test_rerender_is_pixel_identical(run_dir, tmp_path):
    first = render_run(run_dir, str(tmp_path / "a"))
    second = render_run(run_dir, str(tmp_path / "b"))
    for p1, p2 in zip(sorted(first), sorted(second)):
        assert open(p1, "rb").read() == open(p2, "rb").read(), p1


def test_missing_column_is_schema_error(run_dir, tmp_path):
    broken = tmp_path / "broken"
    broken.mkdir()
    for f in ("manifest.json", "emap.csv", "fits.json"):
        (broken / f).write_bytes(open(os.path.join(run_dir, f), "rb").read())
    qmap = open(os.path.join(run_dir, "qmap.csv")).read()
    (broken / "qmap.csv").write_text(qmap.replace("time,bond,q", "time,bond,charge"))
    with pytest.raises(SchemaError, match="q"):
        render(FigureRecipe(str(broken), str(tmp_path / "figs"), panels=("qmap",)))


def test_empty_directory_is_schema_error(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(SchemaError):
        render_run(str(empty), str(tmp_path / "figs"))


def test_unknown_panel_rejected(run_dir, tmp_path):
    with pytest.raises(ValueError):
        FigureRecipe(run_dir, str(tmp_path), panels=("hologram",))
