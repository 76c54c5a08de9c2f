from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from hdx import complex as cx
from hdx.cli import ExperimentConfig, main, parse_args, run


def _run(argv):
    buf = io.StringIO()
    code = run(parse_args(argv), stream=buf)
    return code, json.loads(buf.getvalue())


def test_full_pipeline_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    code, summary = _run(["all", "--q", "2", "--out", str(a), "--dehn-samples", "5"])
    assert code == 0 and set(summary["stages"].values()) == {"ok"}
    _run(["all", "--q", "2", "--out", str(b), "--dehn-samples", "5"])
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    assert "complex.json" in names and "summary.json" in names
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
    exp = json.loads((a / "expansion.json").read_text())["result"]
    assert exp["result"]["exp_b"] == "1/2"
    assert all(b["holds"] for b in exp["bounds"])


def test_config_hash_ignores_output_location():
    c1 = ExperimentConfig("build", out="x")
    c2 = ExperimentConfig("all", out="y", threads=4)
    assert c1.hash() == c2.hash()
    assert ExperimentConfig("build", q=3).hash() != c1.hash()


@pytest.mark.parametrize("argv", [["build", "--q", "6"], ["build", "--construction", "file"],
                                  ["build", "--construction", "xsq", "--s", "4"], ["cones", "--k", "-1"]])
def test_config_errors_exit_2(argv):
    code, summary = _run(argv)
    assert code == 2 and summary["status"] == "config_error"


def test_group_too_large_gives_partial_report(tmp_path):
    code, summary = _run(["xsq", "--q", "2", "--s", "5", "--size-cap", "2000", "--out", str(tmp_path)])
    assert code == 3 and summary["stages"]["build"] == "budget_exceeded"
    rep = json.loads((tmp_path / "build.json").read_text())["result"]
    assert rep["error"] == "GroupTooLarge" and rep["partial_size"] > rep["cap"] == 2000


def test_search_budget_exceeded_exit_3():
    code, summary = _run(["expansion", "--q", "2", "--k", "1", "--budget-log2", "8"])
    assert code == 3 and summary["stages"]["expansion"] == "budget_exceeded"


def test_file_construction(tmp_path):
    path = tmp_path / "oct.json"
    path.write_text(cx.octahedron().to_json())
    code, summary = _run(["all", "--construction", "file", "--file", str(path), "--out", str(tmp_path / "o")])
    assert code == 0
    assert summary["stages"]["presentation"] == "not_applicable"
    hom = json.loads((tmp_path / "o" / "homology.json").read_text())["result"]
    assert hom is not None


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "hdx", "build", "--q", "2"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["stages"] == {"build": "ok"}
    assert main(["build", "--q", "7", "--n", "2"]) == 0
    # one subgroup does not define a coset complex
    assert main(["build", "--q", "7", "--n", "1"]) == 2
