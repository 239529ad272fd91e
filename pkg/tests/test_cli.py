import csv
import json

import numpy as np
import pytest

from minrep import checks
from minrep import cli


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr().out


def test_config_parsing():
    pairs = checks.parse_config_text("p = 4\nq=2  # comment\n\ntol.cauchy.W_norm = 1e-3\nsuites = geometry,flat\n")
    cfg = checks.config_from_pairs(pairs)
    assert (cfg.p, cfg.q) == (4, 2)
    assert cfg.tol("cauchy.W_norm") == 1e-3
    assert cfg.suites == ("geometry", "flat")
    with pytest.raises(ValueError):
        checks.parse_config_text("no equals sign")
    with pytest.raises(ValueError):
        checks.config_from_pairs({"colour": "red"})


def test_show_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("p = 5\nq = 3\nseed = 4\n")
    code, out = run(["verify", "--config", str(cfg), "--q", "3", "--seed", "9", "--show-config"], capsys)
    assert code == 0
    assert "p = 5" in out and "seed = 9" in out and "tol.geometry.metric_psi" in out


@pytest.mark.parametrize("argv", [["verify", "--p", "2", "--q", "3"], ["synth", "--p", "2", "--q", "2"],
                                  ["constants", "--p", "1", "--q", "3"], ["verify", "--suite", "nosuch"]])
def test_invalid_input_exits_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2


def test_synth_without_probes_writes_header(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _ = run(["synth", "--p", "4", "--q", "2", "-o", str(out)], capsys)
    assert code == 0
    rows = list(csv.reader(open(out)))
    assert rows == [["z1", "z2", "z3", "z4", "re", "im"]]


def test_synth_compare_f0(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _ = run(["synth", "--line", "2:-1:1:5", "--compare-f0", "-o", str(out)], capsys)
    assert code == 0
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 5
    for r in rows:
        assert float(r["re"]) == pytest.approx(float(r["closed_form"]), rel=1e-8)
        assert abs(float(r["im"])) < 1e-12


def test_synth_probe_file(tmp_path, capsys):
    probes = tmp_path / "p.csv"
    probes.write_text("z1,z2,z3,z4\n0.1,0.2,0.3,0.4\n# skipped\n0,0,0,0\n")
    out = tmp_path / "s.csv"
    code, _ = run(["synth", "--data", "gaussian", "--probes", str(probes), "-o", str(out)], capsys)
    assert code == 0
    assert len(list(csv.reader(open(out)))) == 3
    probes.write_text("0.1,0.2,0.3\n")
    with pytest.raises(SystemExit):
        cli.main(["synth", "--probes", str(probes), "-o", str(out)])


def test_constants_json(capsys):
    code, out = run(["constants", "--p", "4", "--q", "2"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["signature"] == [4, 2] and doc["n"] == 4
    assert doc["values"]["c1c3"] == pytest.approx(0.25)
    assert set(doc["values"]) >= {"eps", "delta", "c1", "c2", "c3"}


def test_report_is_deterministic(tmp_path, capsys):
    out = tmp_path / "r"
    argv = ["verify", "--p", "4", "--q", "2", "--suite", "geometry", "--out", str(out), "--quiet", "--timings"]
    assert run(argv, capsys)[0] == 0
    first = (out / "report.json").read_bytes()
    assert run(argv, capsys)[0] == 0
    assert (out / "report.json").read_bytes() == first
    doc = json.loads(first)
    assert doc["summary"]["hard_failed"] == 0
    assert all("runtime" not in r for r in doc["records"])
    assert (out / "timings.csv").exists() and (out / "checks.csv").exists()


def test_exit_code_on_failure(tmp_path, capsys):
    out = tmp_path / "r"
    code, _ = run(["verify", "--suite", "geometry", "--tol-scale", "1e-30", "--out", str(out), "--quiet"], capsys)
    assert code == 1
    doc = json.loads((out / "report.json").read_text())
    assert doc["summary"]["hard_failed"] > 0


def test_out_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    assert run(["verify", "--suite", "geometry", "--quiet"], capsys)[0] == 0
    assert (tmp_path / "env" / "report.json").exists()


def test_crash_becomes_failing_record():
    def broken(cfg):
        raise RuntimeError("boom")
    recs = checks.run_checks(checks.RunConfig(), [broken])
    assert len(recs) == 1 and recs[0].check_id == "crash.broken"
    assert not recs[0].passed and "boom" in recs[0].computed["error"]
    assert checks.summarize(recs)["hard_failed"] == 1


def test_plot_data(tmp_path, capsys):
    code, out = run(["plot-data", "--p", "3", "--q", "3", "--out", str(tmp_path)], capsys)
    assert code == 0
    for name in ("f0_line", "ktype_spectrum", "box_convergence"):
        assert (tmp_path / f"{name}.csv").stat().st_size > 0
        assert (tmp_path / f"{name}.png").read_bytes()[:4] == b"\x89PNG"
    rows = list(csv.DictReader(open(tmp_path / "f0_line.csv")))
    synth = np.array([float(r["synthesized"]) for r in rows])
    closed = np.array([float(r["closed_form"]) for r in rows])
    np.testing.assert_allclose(synth, closed, rtol=1e-7)
