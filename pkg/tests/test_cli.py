import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from offspread import cli


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_preset_writes_csv_and_svg(tmp_path, capsys):
    code, out, _ = run(["run", "--preset", "fig3", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert (tmp_path / "fig3.csv").read_text().startswith("t,U,O,Q,S,G1,G2,inflow,z_state\n")
    ET.parse(tmp_path / "fig3.svg")


def test_run_horizon_override(tmp_path, capsys):
    code, _, _ = run(["run", "--preset", "fig2", "--out", str(tmp_path), "--horizon", "1"], capsys)
    assert code == 0
    assert len((tmp_path / "fig2.csv").read_text().splitlines()) == 3


def test_run_scenario_file_and_svg_flag(tmp_path, capsys):
    scn = tmp_path / "mine.scn"
    scn.write_text("name = mine\nN = 1000\nO0 = 10\nhorizon = 5\n")
    code, _, _ = run(["run", "--scenario", str(scn), "--out", str(tmp_path / "o"), "--svg"], capsys)
    assert code == 0
    assert (tmp_path / "o" / "mine.csv").exists() and (tmp_path / "o" / "mine.svg").exists()


def test_sweep_writes_series(tmp_path, capsys):
    code, _, _ = run(["sweep", "--preset", "fig5", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert (tmp_path / "fig5.csv").read_text().startswith("value,retweets_per_tweet,extinction_time,peak_O,peak_Q\n")
    assert (tmp_path / "fig5_series.csv").exists()


def test_sweep_requires_section(tmp_path, capsys):
    code, _, err = run(["sweep", "--preset", "fig2", "--out", str(tmp_path)], capsys)
    assert code == 1 and "[sweep]" in err


def test_config_error_exit_code(tmp_path, capsys):
    scn = tmp_path / "bad.scn"
    scn.write_text("N = 100\nalpha = 2\n")
    code, _, err = run(["run", "--scenario", str(scn), "--out", str(tmp_path)], capsys)
    assert code == 1 and "bad.scn:2:" in err


def test_missing_scenario_is_config_error(capsys):
    code, _, err = run(["run"], capsys)
    assert code == 1 and "--preset" in err
    code, _, _ = run(["run", "--preset", "fig2", "--scenario", "x.scn"], capsys)
    assert code == 1


def test_io_error_exit_code(tmp_path, capsys):
    code, _, _ = run(["run", "--scenario", str(tmp_path / "absent.scn")], capsys)
    assert code == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(["run", "--preset", "fig2", "--out", str(blocker / "sub")], capsys)
    assert code == 2 and "I/O error" in err


def test_bad_horizon(capsys):
    code, _, _ = run(["run", "--preset", "fig2", "--horizon", "0"], capsys)
    assert code == 1


def test_invariant_violation_exit_code(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "trajectory_violations", lambda traj: ["S decreased"])
    code, _, err = run(["run", "--preset", "fig2", "--out", str(tmp_path)], capsys)
    assert code == 3 and "S decreased" in err


def _kv(text):
    return dict(line.split(": ", 1) for line in text.splitlines() if ": " in line)


def test_analyze_defaults(capsys):
    code, out, _ = run(["analyze"], capsys)
    kv = _kv(out)
    assert code == 0
    assert kv["lambda_critical"] == "0.99"
    assert kv["z_global"] == "undefined"
    assert kv["verdict.offender-only"] == "unstable"
    assert kv["jury_applicable.offender-free"] == "false"


def test_analyze_quarantine_writes_eigenvalues(tmp_path, capsys):
    code, out, _ = run(["analyze", "--preset", "fig3", "--out", str(tmp_path)], capsys)
    kv = _kv(out)
    assert code == 0 and kv["decline_guaranteed"] == "true"
    rows = (tmp_path / "fig3_eigenvalues.csv").read_text().splitlines()
    assert rows[0] == "equilibrium,jacobian,index,real,imag,analytic"
    assert len(rows) == 1 + 4 + 3


def test_analyze_infeasible(tmp_path, capsys):
    scn = tmp_path / "a.scn"
    scn.write_text("model = quarantine\nalpha = 0.5\nlambda = 0.3\n")
    code, out, _ = run(["analyze", "--scenario", str(scn)], capsys)
    kv = _kv(out)
    assert code == 0 and kv["decline_guaranteed"] == "false" and kv["lambda_critical"] == "undefined"


def test_calibrate_bundled(tmp_path, capsys):
    code, out, _ = run(["calibrate", "--out", str(tmp_path)], capsys)
    kv = _kv(out)
    assert code == 0
    assert kv["total_tweets"] == "884" and kv["original_tweets"] == "478"
    assert float(kv["alpha"]) == pytest.approx(1 - 478 / 275960, rel=1e-15)
    assert "alpha," in (tmp_path / "calibration.csv").read_text()


def test_calibrate_empty_corpus(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text("tweet_id,created_at,screen_name,follower_count,friend_count,is_retweet,original_id\n")
    code, out, err = run(["calibrate", str(path)], capsys)
    assert code == 1
    assert "total_tweets: 0" in out and "alpha" in err


def test_calibrate_reports_bad_rows(tmp_path, capsys):
    path = tmp_path / "c.csv"
    path.write_text(
        "tweet_id,created_at,screen_name,follower_count,friend_count,is_retweet,original_id\n"
        "o1,2013-07-06T00:00:00Z,a,1,1000,false,\n"
        "r1,2013-07-06T00:00:00Z,b,1,5,true,o1\n"
        "r2,yesterday,b,1,5,true,o1\n"
    )
    code, out, err = run(["calibrate", str(path)], capsys)
    assert code == 0 and "malformed_rows: 1" in out and "line 4" in err
    assert _kv(out)["alpha"] == repr(0.999)


def test_fit_s0(tmp_path, capsys):
    code, out, _ = run(["fit-s0", "--out", str(tmp_path)], capsys)
    assert code == 0 and _kv(out)["s0_frac"] == "0.07"
    assert len((tmp_path / "fit_s0.csv").read_text().splitlines()) == 101


def test_cli_outputs_are_byte_identical(tmp_path, capsys):
    for sub in ("a", "b"):
        for cmd in (["run", "--preset", "fig2"], ["run", "--preset", "fig3"],
                    ["sweep", "--preset", "fig4"], ["sweep", "--preset", "fig5"]):
            assert cli.main(cmd + ["--out", str(tmp_path / sub)]) == 0
    capsys.readouterr()
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "offspread", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "offspread" in res.stdout
