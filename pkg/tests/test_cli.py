from __future__ import annotations

import json
import subprocess
import sys

import pytest

from kitaev_mi import __version__
from kitaev_mi.cli import coupling, main


def run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_text(out):
    return dict(line.split("=", 1) for line in out.splitlines() if "=" in line)


def test_coupling_parser():
    assert coupling("1/3") == pytest.approx(1 / 3)
    assert coupling("0.25") == 0.25
    for bad in ("abc", "1/0", "inf"):
        with pytest.raises(Exception):
            coupling(bad)


def test_spectrum_dimer(capsys):
    code, out, _ = run(["spectrum", "--jz", "1", "--L", "10"], capsys)
    report = parse_text(out)
    assert code == 0
    assert float(report["gap"]) == 2.0
    assert float(report["ground_energy"]) == -100.0
    assert report["phase"] == "GappedAz"


def test_spectrum_fractions_json(capsys):
    code, out, _ = run(["spectrum", "--jx", "1/3", "--jy", "1/3", "--jz", "1/3", "--L", "99",
                        "--format", "json"], capsys)
    assert code == 0
    assert json.loads(out)["phase"] == "GaplessB"


@pytest.mark.parametrize("argv", [
    ["spectrum", "--jx", "abc", "--jy", "0", "--jz", "1", "--L", "4"],
    ["spectrum", "--jx", "0.5", "--jz", "1", "--L", "4"],
    ["spectrum", "--jx", "0", "--jy", "0", "--jz", "0", "--L", "4"],
    ["spectrum", "--jz", "1", "--L", "1"],
    ["scan", "mi2", "--L", "10", "--jz-min", "0.8", "--jz-max", "0.2"],
    ["fit", "dmi2"],
])
def test_usage_errors_exit_2_without_output(argv, capsys, tmp_path):
    target = tmp_path / "out.txt"
    code, _, err = run(argv + ["--output", str(target)], capsys)
    assert code == 2
    assert err
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []


def test_scan_csv_schema(capsys):
    code, out, _ = run(["scan", "mi2", "--L", "10", "--points", "11"], capsys)
    assert code == 0
    lines = out.splitlines()
    header = [ln for ln in lines if ln.startswith("#")]
    assert header[0] == f"# kitaev-mi {__version__}"
    assert "# L: 10" in header and "# num_points: 11" in header
    body = [ln for ln in lines if not ln.startswith("#")]
    assert body[0] == "jz,value,floored_points"
    rows = [r.split(",") for r in body[1:]]
    assert len(rows) == 11
    assert float(rows[0][1]) == pytest.approx(0.0, abs=1e-9)
    assert float(rows[-1][1]) == pytest.approx(1.0, abs=1e-9)


def test_scan_json_mirrors_csv(capsys):
    _, csv_out, _ = run(["scan", "mi4", "--L", "8", "--points", "5"], capsys)
    _, json_out, _ = run(["scan", "mi4", "--L", "8", "--points", "5", "--format", "json"], capsys)
    doc = json.loads(json_out)
    rows = [r.split(",") for r in csv_out.splitlines() if not r.startswith("#")][1:]
    assert doc["version"] == __version__ and doc["config"]["L"] == 8
    assert [float(r[1]) for r in rows] == doc["value"]
    assert [int(r[2]) for r in rows] == doc["floored_points"]


def test_scan_writes_file(capsys, tmp_path):
    target = tmp_path / "mi2.csv"
    code, out, _ = run(["scan", "dmi2", "--L", "6", "--points", "9", "-o", str(target)], capsys)
    assert code == 0 and out == ""
    assert target.read_text().startswith("# kitaev-mi")


def test_scan_bytes_independent_of_workers(capsys, tmp_path, monkeypatch):
    outputs = []
    for workers in ("1", "3"):
        monkeypatch.setenv("KITAEV_MI_WORKERS", workers)
        target = tmp_path / f"w{workers}.csv"
        assert run(["scan", "mi4", "--L", "10", "--points", "31", "-o", str(target)], capsys)[0] == 0
        outputs.append(target.read_bytes())
    assert outputs[0] == outputs[1]


def test_fit_from_data_file(capsys, tmp_path):
    data = tmp_path / "peaks.csv"
    sizes = range(10, 61, 10)
    data.write_text("# synthetic\nL,peak\n" + "".join(f"{L},{5 + 2 ** (-0.1 * L - 3)!r}\n" for L in sizes))
    code, out, _ = run(["fit", "--data", str(data), "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["asymptote"] == pytest.approx(5.0, abs=1e-6)
    assert doc["slope"] == pytest.approx(-0.1, abs=1e-6)
    assert doc["intercept"] == pytest.approx(-3.0, abs=1e-6)


def test_fit_fixed_asymptote_and_bad_data(capsys, tmp_path):
    data = tmp_path / "peaks.csv"
    data.write_text("L,peak\n10,2.5\n20,2.25\n30,2.125\n")
    code, out, _ = run(["fit", "--data", str(data), "--asymptote", "2"], capsys)
    assert code == 0 and "mode=fixed-asymptote" in out
    data.write_text("L,peak\n10,1\n20,3\n30,2\n")
    assert run(["fit", "--data", str(data)], capsys)[0] == 2
    data.write_text("size,value\n10,1\n")
    assert run(["fit", "--data", str(data)], capsys)[0] == 2


def test_fit_scans_sizes(capsys):
    code, out, _ = run(["fit", "mi4", "--L", "8", "10", "12", "--points", "21",
                        "--window", "0.3", "0.7", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["sizes"] == [8, 10, 12] and len(doc["peak_jz"]) == 3


def test_oracle_check_pass_and_json(capsys):
    code, out, _ = run(["oracle-check", "--samples", "4", "--report", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] is True
    assert {c["name"] for c in doc["checks"]} >= {"z-pair-correlator-sparsity", "hermitian"}


def test_oracle_check_corrupted_links_exit_1(capsys, tmp_path):
    links = tmp_path / "links.json"
    links.write_text(json.dumps({"x_links": [[5, 3], [6, 4], [7, 1], [8, 2]],
                                 "y_links": [[3, 6], [5, 4], [8, 1], [7, 2]],
                                 "z_links": [[3, 7], [4, 8], [5, 1], [5, 2]]}))
    code, out, _ = run(["oracle-check", "--links", str(links), "--samples", "3"], capsys)
    assert code == 1
    assert "FAIL link-coloring" in out
    links.write_text("{not json")
    assert run(["oracle-check", "--links", str(links)], capsys)[0] == 2


def test_phase_diagram(capsys):
    code, out, _ = run(["phase-diagram", "--resolution", "2", "--L", "10"], capsys)
    assert code == 0
    rows = [r.split(",") for r in out.splitlines() if not r.startswith("#")][1:]
    assert len(rows) == 6
    corners = {tuple(map(float, r[:3])): r[4] for r in rows}
    assert corners[(1.0, 0.0, 0.0)] == "GappedAx"
    assert corners[(0.0, 1.0, 0.0)] == "GappedAy"
    assert corners[(0.0, 0.0, 1.0)] == "GappedAz"
    code, out, _ = run(["phase-diagram", "--resolution", "3", "--L", "12"], capsys)
    center = [r for r in out.splitlines() if r.startswith("0.3333333333333333,0.3333333333333333")]
    assert center and center[0].endswith("GaplessB")


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kitaev_mi.cli", "spectrum", "--jz", "1", "--L", "4"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "phase=GappedAz" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "kitaev_mi.cli", "spectrum"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2
