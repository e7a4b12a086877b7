import json
import subprocess
import sys

import numpy as np
import pytest

from rectfree.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, EXIT_USAGE, main, parse_grid
from rectfree.conv import convolve_lambda1_free


@pytest.fixture
def files(tmp_path):
    b = tmp_path / "bernoulli.json"
    b.write_text(json.dumps({"type": "atomic", "atoms": [[-1, 0.5], [1, 0.5]]}))
    d = tmp_path / "dirac0.json"
    d.write_text(json.dumps({"type": "atomic", "atoms": [[0, 1]]}))
    t = tmp_path / "three.json"
    t.write_text(json.dumps({"type": "atomic", "atoms": [[-2, 0.25], [-0.5, 0.25], [0.5, 0.25], [2, 0.25]]}))
    return tmp_path, b, d, t


def run(argv):
    return main([str(a) for a in argv])


def test_convolve_bernoulli(files):
    tmp, b, _, _ = files
    out = tmp / "m.json"
    assert run(["convolve", b, b, "--lambda", "0.5", "--order", "4", "--out", out]) == EXIT_OK
    res = json.loads(out.read_text())
    assert res["even_moments"] == [2.0, 5.0, 14.0, 41.75]
    assert res["config"]["lambda"] == 0.5


def test_convolve_dirac_neutral(files):
    tmp, _, d, t = files
    out = tmp / "m.json"
    assert run(["convolve", t, d, "--lambda", "0.3", "--order", "3", "--out", out]) == EXIT_OK
    m = json.loads(out.read_text())["even_moments"]
    assert np.allclose(m, [(4 + 0.25) / 2, (16 + 0.0625) / 2, (64 + 0.25 ** 3) / 2])


def test_convolve_ratio_one_matches_free_route(files):
    tmp, b, _, t = files
    out = tmp / "m.json"
    run(["convolve", b, t, "--lambda", "1", "--order", "5", "--out", out])
    from rectfree.measure import load_measure

    ref = convolve_lambda1_free(load_measure(b), load_measure(t), 5)
    assert np.allclose(json.loads(out.read_text())["even_moments"], ref)


def test_convolve_with_density(files):
    tmp, b, _, _ = files
    out = tmp / "conv.json"
    assert run(["convolve", b, b, "--lambda", "0.5", "--grid=-2.2:2.2:221", "--out", out]) == EXIT_OK
    res = json.loads(out.read_text())
    csv = tmp / "conv.density.csv"
    assert res["density_csv"] == str(csv)
    data = np.loadtxt(csv, delimiter=",", comments="#", skiprows=2)
    assert abs(np.trapezoid(data[:, 1], data[:, 0]) - 1) < 2e-2


def test_cumulants_from_moment_list(capsys):
    assert main(["cumulants", "--moments", "1,1,1", "--lambda", "0.3"]) == EXIT_OK
    c = json.loads(capsys.readouterr().out)["cumulants"]
    assert np.allclose(c, [1, -0.3, 0.18])


def test_moments_of_file(files, capsys):
    _, _, _, t = files
    assert run(["moments", t, "--order", "2"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["even_moments"] == [2.125, 8.03125]


def test_density_gaussian_integrates_to_one(tmp_path):
    out = tmp_path / "g.csv"
    argv = ["density", "--family", "rect_gaussian", "--param", "sigma2=1", "--lambda", "0.5",
            "--grid=-2:2:801", "--out", str(out)]
    assert main(argv) == EXIT_OK
    data = np.loadtxt(out, delimiter=",", comments="#", skiprows=2)
    assert abs(np.trapezoid(data[:, 1], data[:, 0]) - 1) < 1e-4
    meta = json.loads((tmp_path / "g.json").read_text())
    assert meta["config"]["extra"]["family"] == "rect_gaussian"
    first = out.read_bytes()
    main(argv)
    assert out.read_bytes() == first


def test_catalog(capsys):
    assert main(["catalog", "--lambda", "0.25"]) == EXIT_OK
    listing = json.loads(capsys.readouterr().out)
    assert len(listing["families"]) == 5


def test_mc_reproducible(files):
    tmp, b, _, _ = files
    out = tmp / "mc.json"
    argv = ["mc", b, b, "--q1", "30", "--q2", "60", "--trials", "6", "--seed", "42", "--out", out,
            "--grid=-3:3:31"]
    assert run(argv) == EXIT_OK
    first = out.read_bytes()
    assert run(argv) == EXIT_OK
    assert out.read_bytes() == first
    rep = json.loads(first)
    assert rep["config"]["seed"] == 42 and rep["lam"] == 0.5
    assert (tmp / "mc.hist.csv").read_text().startswith("bin_center,mass")


def test_error_exit_codes(files, capsys):
    tmp, b, _, _ = files
    assert run(["moments", tmp / "missing.json"]) == EXIT_INPUT
    bad = tmp / "bad.json"
    bad.write_text("{not json")
    assert run(["moments", bad]) == EXIT_INPUT
    asym = tmp / "asym.json"
    asym.write_text(json.dumps({"type": "atomic", "atoms": [[1, 1.0]]}))
    assert run(["moments", asym]) == EXIT_FAILED
    for argv in (["convolve", b, b, "--lambda", "1.5"],
                 ["mc", b, b, "--q1", "50", "--q2", "10"],
                 ["density", "--lambda", "0.5", "--grid", "1:0:5", "--family", "rect_gaussian"],
                 ["cumulants", "--lambda", "0.5"],
                 ["density", "--lambda", "0.5", "--grid", "0:1:5", "--family", "rect_gaussian",
                  "--param", "sigma=1"]):
        with pytest.raises(SystemExit) as exc:
            run(argv)
        assert exc.value.code == EXIT_USAGE


def test_parse_grid():
    assert np.allclose(parse_grid("-1:1:3"), [-1, 0, 1])


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rectfree.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "rectfree" in proc.stdout
