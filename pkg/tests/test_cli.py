import csv
import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from boxwall import cli


def run(tmp_path, *args):
    return cli.main([*args, "--out-dir", str(tmp_path)])


def read_csv(path):
    with path.open() as fh:
        return list(csv.DictReader(fh))


def test_spectrum_csv(tmp_path):
    assert run(tmp_path, "spectrum", "--n-max", "3") == cli.EXIT_OK
    rows = read_csv(tmp_path / "spectrum.csv")
    assert [r["n"] for r in rows] == ["1", "2", "3"]
    for r in rows:
        assert float(r["rel_error"]) <= 1e-3
        assert float(r["overlap"]) > 0.999
    manifest = json.loads((tmp_path / "spectrum.manifest.json").read_text())
    assert manifest["parameters"]["cutoff_p0"] == 60.5
    assert manifest["outputs"] == ["spectrum.csv"]


def test_spectrum_json_in_other_units(tmp_path):
    code = run(tmp_path, "spectrum", "--n-max", "2", "--m", "2", "--hbar", "0.5", "--L", "3",
               "--cutoff-p0", "40.5", "--panels", "80", "--format", "json")
    assert code == cli.EXIT_OK
    rows = json.loads((tmp_path / "spectrum.json").read_text())
    e1 = (math.pi * 0.5 / 3) ** 2 / 4
    assert rows[0]["E_analytic"] == pytest.approx(e1, rel=1e-14)
    assert rows[0]["rel_error"] <= 1e-3


def test_spectrum_under_resolved(tmp_path, capsys):
    code = run(tmp_path, "spectrum", "--n-max", "5", "--cutoff-p0", "5", "--panels", "8",
               "--order", "4")
    assert code == cli.EXIT_NUMERICAL
    assert "mode not resolved: n=5" in capsys.readouterr().err
    assert (tmp_path / "spectrum.csv").exists()


@pytest.mark.parametrize("args", [
    ["spectrum", "--n-max", "0"],
    ["spectrum", "--format", "xml"],
    ["spectrum", "--m", "-1"],
    ["momdist", "--n", "0"],
    ["momdist", "--p-min", "2", "--p-max", "1"],
    ["moments", "--k-max", "5"],
    ["moments", "--cutoffs", "50,abc"],
    ["moments", "--cutoffs", "50,100,150,200"],
    ["verify", "--eps-list", ""],
    ["converge", "--schedule", "20:80:4"],
    ["converge", "--schedule", "20:80"],
    ["nonsense"],
])
def test_usage_errors(tmp_path, args):
    assert run(tmp_path, *args) == cli.EXIT_USAGE


def test_momdist(tmp_path):
    assert run(tmp_path, "momdist", "--n", "1", "--samples", "11") == cli.EXIT_OK
    rows = read_csv(tmp_path / "momdist.csv")
    assert len(rows) == 11
    assert float(rows[0]["p"]) == pytest.approx(-5 * math.pi)
    mid = rows[5]
    assert float(mid["density"]) == pytest.approx(4 / math.pi**3, rel=1e-12)
    # p = +-p0 sits exactly on a removable point of n = 1
    on_point = rows[4]
    assert float(on_point["p"]) == pytest.approx(-math.pi)
    assert float(on_point["density"]) == pytest.approx(1 / (4 * math.pi), rel=1e-9)


def test_moments(tmp_path):
    assert run(tmp_path, "moments", "--n", "1", "--k-max", "2") == cli.EXIT_OK
    k1 = json.loads((tmp_path / "moments_k1.json").read_text())
    k2 = json.loads((tmp_path / "moments_k2.json").read_text())
    assert k1["verdict"] == "converged"
    assert k1["value"] == pytest.approx(math.pi**2, rel=1e-5)
    assert k2["verdict"] == "diverges"
    assert k2["fit"]["exponent"] == pytest.approx(1.0, abs=0.05)
    assert (tmp_path / "moments.manifest.json").exists()


def test_moments_norm_only(tmp_path):
    assert run(tmp_path, "moments", "--k-max", "0") == cli.EXIT_OK
    assert (tmp_path / "moments_k0.json").exists()
    assert not (tmp_path / "moments_k1.json").exists()


def test_verify_default(tmp_path):
    assert run(tmp_path, "verify") == cli.EXIT_OK
    rows = read_csv(tmp_path / "verify.csv")
    # 2 modes x 3 widths x 2 variants x 5 test functions
    assert len(rows) == 60
    assert {r["variant"] for r in rows} == {"HM", "HMprime"}
    eq = read_csv(tmp_path / "equivalence.csv")
    assert len(eq) == 30
    for r in eq:
        if r["testfn_id"].startswith("interior"):
            assert float(r["difference"]) <= 1e-10


def test_verify_single_variant(tmp_path):
    assert run(tmp_path, "verify", "--n-max", "1", "--eps-list", "0.02,0.01",
               "--variant", "HMprime") == cli.EXIT_OK
    assert not (tmp_path / "equivalence.csv").exists()


def test_converge_with_svg(tmp_path):
    assert run(tmp_path, "converge", "--n-max", "2", "--svg") == cli.EXIT_OK
    rows = read_csv(tmp_path / "convergence.csv")
    assert len(rows) == 6
    errs = [float(r["rel_error"]) for r in rows if r["n"] == "1"]
    assert errs == sorted(errs, reverse=True)
    root = ET.parse(tmp_path / "convergence.svg").getroot()
    lines = root.findall("{http://www.w3.org/2000/svg}polyline")
    assert len(lines) == 2


def test_config_file_and_env(tmp_path, monkeypatch):
    cfgfile = tmp_path / "box.cfg"
    cfgfile.write_text("m = 1\nhbar = 1\nL = 2\n")
    out = tmp_path / "env_out"
    monkeypatch.setenv(cli.OUTPUT_ENV, str(out))
    assert cli.main(["momdist", "--config", str(cfgfile), "--samples", "3"]) == cli.EXIT_OK
    manifest = json.loads((out / "momdist.manifest.json").read_text())
    assert manifest["config"]["L"] == 2.0
    assert (out / "momdist.csv").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "boxwall", "momdist", "--samples", "5",
                           "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "momdist.csv" in proc.stdout


@pytest.mark.xfail(strict=True, reason="an integer cutoff in units of p0 maximizes the kernel "
                                       "truncation error; n=1 lands at 3.5e-3")
def test_spectrum_at_integer_cutoff(tmp_path):
    assert run(tmp_path, "spectrum", "--n-max", "3", "--cutoff-p0", "60", "--panels", "64",
               "--order", "8") == cli.EXIT_OK
    for r in read_csv(tmp_path / "spectrum.csv"):
        assert float(r["rel_error"]) <= 1e-3
