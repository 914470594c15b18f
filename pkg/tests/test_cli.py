"""Command-line driver tests: config resolution, outputs, determinism."""

import argparse
import os

import pytest

from rwcrdc import cli


def _run(argv):
    return cli.main(argv)


def _read(path):
    with open(path) as fh:
        return fh.read()


def test_figures_flag_prints_one_ok_line_per_scenario(capsys):
    assert _run(["--figures"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 3
    assert all(line.startswith("scenario ") and line.endswith(": ok")
               for line in out)


def test_smoke_run_writes_all_csvs(tmp_path, capsys):
    out = tmp_path / "run"
    rc = _run(["--ops", "60", "--trials", "1", "--crdc", "rmv_win",
               "--dcs", "2", "--replicas-per-dc", "1",
               "--out", str(out)])
    assert rc == 0
    for name in ("trials.csv", "summary.csv", "overhead.csv", "probes.csv"):
        text = _read(os.path.join(str(out), name))
        assert text.startswith("# config:")
        assert "# scale_factor:" in text
    # one trial row, one summary row, plus the column headers
    trials = [l for l in _read(str(out / "trials.csv")).splitlines()
              if not l.startswith("#")]
    assert len(trials) == 2
    assert trials[1].split(",")[:3] == ["default", "rmv_win", "0"]


def test_config_file_sets_values_and_flags_win(tmp_path):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text(
        "# comment line\n"
        "rate = 2500\n"
        "crdc = add_win\n"
        "inter-delay = 30,6\n")
    args = cli.build_parser().parse_args(
        ["--config", str(cfg_file), "--rate", "4000"])
    cfg = cli.resolve_config(args)
    assert cfg["crdc"] == "add_win"        # from file
    assert cfg["rate"] == 4000.0           # flag overrides file
    assert cfg["inter_delay"] == (30.0, 6.0)
    assert cfg["ops"] == cli.DEFAULTS["ops"]


def test_unknown_config_key_is_fatal(tmp_path):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("opss = 10\n")
    args = cli.build_parser().parse_args(["--config", str(cfg_file)])
    with pytest.raises(SystemExit):
        cli.resolve_config(args)


@pytest.mark.parametrize("argv", [
    ["--crdc", "bogus"],
    ["--inter-delay", "50"],
    ["--sweep", "ops=1,2"],
    ["--sweep", "rate=a,b"],
])
def test_bad_flags_exit(argv):
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(argv)


def test_nonpositive_values_rejected():
    args = cli.build_parser().parse_args(["--ops", "0"])
    with pytest.raises(SystemExit):
        cli.resolve_config(args)


def test_sweep_points_scale_delay_together():
    args = cli.build_parser().parse_args(["--sweep", "delay=100"])
    cfg = cli.resolve_config(args)
    (value, overrides), = cli._sweep_points(cfg)
    assert value == 100
    assert overrides["inter_delay"] == (100.0, 20.0)
    assert overrides["intra_delay"] == (20.0, 4.0)


def test_reruns_are_byte_identical(tmp_path, capsys):
    argv = ["--ops", "80", "--trials", "1", "--crdc", "add_win",
            "--dcs", "2", "--replicas-per-dc", "1", "--seed", "7"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(argv + ["--out", str(a)]) == 0
    assert _run(argv + ["--out", str(b)]) == 0
    for name in ("trials.csv", "summary.csv", "overhead.csv", "probes.csv"):
        assert _read(str(a / name)) == _read(str(b / name))
