import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from relhyp.cli import main


def schema(name):
    return json.loads((resources.files("relhyp") / "schemas" / f"{name}.v1.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


COMMANDS = {
    "area": ["area", "-c", "zxz", "--word", "H[A]{3} b H[A]{-3} b^-1"],
    "dehn": ["dehn", "-c", "zxz", "--n-max", "4", "--pool", "A=1..2"],
    "ball": ["ball", "-c", "tree", "--radius", "2"],
    "delta": ["delta", "-c", "tree", "--radius", "4", "--four-point"],
    "components": ["components", "-c", "zxz", "--word", "[H[A]{2}, b]", "--cyclic"],
    "omega": ["omega", "-c", "tree", "--max-length", "4"],
    "check-embedded": ["check-embedded", "-c", "tree", "--subgroup", "Y=a,b", "--radius", "4"],
    "elementary": ["elementary", "-c", "tree", "--g", "ab", "--n-max", "3", "--radius", "4"],
    "classify": ["classify", "-c", "zxz", "--g", "a", "--radius", "3"],
    "bounded-gen": ["bounded-gen", "-c", "tree", "--x", "a,b,c", "--exp", "2", "--radius", "4"],
    "diameter": ["diameter", "-c", "tree", "--radii", "1..4"],
    "verify": ["verify", "-c", "dinfty", "--radius", "2"],
}


@pytest.mark.parametrize("name", sorted(COMMANDS))
def test_reports_match_their_schema(capsys, name):
    code, out, _ = run(capsys, *COMMANDS[name])
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, schema(name))
    assert report["report"] == name


def test_area_example(capsys):
    code, out, _ = run(capsys, *COMMANDS["area"])
    report = json.loads(out)
    assert (report["status"], report["k"]) == ("Exact", 3)


def test_delta_of_tree_is_zero(capsys):
    code, out, _ = run(capsys, "delta", "-c", "tree", "--radius", "6")
    assert json.loads(out)["delta"] == 0


def test_negative_verdict_exits_2(capsys):
    code, out, _ = run(capsys, "check-embedded", "-c", "zxz", "--subgroup", "A")
    report = json.loads(out)
    assert code == 2
    assert (report["verdict"], report["condition"]) == ("Violated", "Q3")


def test_ball_file_feeds_delta(capsys, tmp_path):
    path = tmp_path / "ball.json"
    code, out, _ = run(capsys, "ball", "-c", "tree", "--radius", "4", "--out", str(path))
    assert code == 0 and json.loads(out)["written"] == str(path)
    jsonschema.validate(json.loads(path.read_text()), schema("ball"))
    code, out, _ = run(capsys, "delta", str(path))
    assert json.loads(out)["delta"] == 0


def test_out_directory_and_determinism(capsys, tmp_path):
    argv = ["bounded-gen", "-c", "tree", "--x", "a,b", "--exp", "3", "--radius", "4"]
    for d in ("one", "two"):
        assert run(capsys, *argv, "--out", str(tmp_path / d))[0] == 0
    one, two = tmp_path / "one", tmp_path / "two"
    assert sorted(p.name for p in one.iterdir()) == ["metadata.json", "report.csv", "report.json",
                                                     "summary.txt"]
    assert (one / "report.json").read_bytes() == (two / "report.json").read_bytes()
    assert (one / "report.csv").read_bytes() == (two / "report.csv").read_bytes()
    meta = json.loads((one / "metadata.json").read_text())
    assert meta["command"] == "bounded-gen" and "timestamp" in meta
    assert (one / "report.csv").read_text().splitlines()[0] == "radius,sphere,covered,fraction"


def test_dehn_csv_on_stdout(capsys):
    code, out, _ = run(capsys, "dehn", "-c", "zxz", "--n-max", "4", "--pool", "A=1..2",
                       "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "n,max_area,unknown_count"
    assert lines[-1] == "4,2,0"


def test_omega_with_cycle_file(capsys, tmp_path):
    cycles = tmp_path / "cycles.txt"
    cycles.write_text("# commutators\n" + "\n".join(f"[H[A]{{{n}}}, b]" for n in range(1, 4)) + "\n")
    code, out, _ = run(capsys, "omega", "-c", "zxz", "--cycles", str(cycles), "--omega", "A=a,a^-1",
                       "--format", "csv")
    rows = out.splitlines()
    assert rows[0] == "cycle,length,sigma,ratio"
    assert [r.split(",")[-1] for r in rows[1:]] == ["1/2", "1", "3/2"]


def test_errors_are_structured_json(capsys):
    code, out, err = run(capsys, "area", "-c", "zxz", "--word", "b")
    assert code == 1 and not out
    payload = json.loads(err)
    jsonschema.validate(payload, schema("error"))
    assert payload["error"] == "NotNullError"
    code, _, err = run(capsys, "area", "-c", "zxz", "--word", "b c")
    assert code == 1 and json.loads(err)["error"] == "WordSyntaxError"


def test_config_errors_carry_position(capsys, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("group G = cyclic(3)\nfoo 1\n")
    code, _, err = run(capsys, "verify", "-c", str(bad))
    payload = json.loads(err)
    assert code == 1 and (payload["line"], payload["column"]) == (2, 1)
    jsonschema.validate(payload, schema("error"))


def test_env_cap_override(capsys, monkeypatch):
    monkeypatch.setenv("RELHYP_AREA_CAP", "3")
    code, out, _ = run(capsys, "area", "-c", "zxz", "--word", "[H[A]{2}, b]")
    assert json.loads(out)["status"] == "UnknownWithinCap" and json.loads(out)["cap"] == 3
    monkeypatch.setenv("RELHYP_VERTEX_CAP", "20")
    code, out, _ = run(capsys, "ball", "-c", "tree", "--radius", "5")
    assert json.loads(out)["capped"] is True


@pytest.mark.parametrize("name", ["zxz", "tree", "dinfty", "z5z5"])
def test_verify_bundled(capsys, name):
    code, out, _ = run(capsys, "verify", "-c", name)
    report = json.loads(out)
    assert code == 0 and report["failed"] == 0


def test_console_entry_point_exit_code():
    proc = subprocess.run([sys.executable, "-m", "relhyp.cli", "check-embedded", "-c", "zxz",
                           "--subgroup", "Qa"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert json.loads(proc.stdout)["witness"]["g"] == "(0,1)"
