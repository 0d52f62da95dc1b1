import json
import subprocess
import sys

import pytest

from celldim.cli import main
from celldim.dimensioning import CSV_COLUMNS


def run(*args):
    return main(list(args))


def test_unknown_flag_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        run("dimension", "--bogus")
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_console_entry_point_usage_error():
    proc = subprocess.run([sys.executable, "-m", "celldim.cli", "sweep", "--preset", "fig99"],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "fig" in proc.stderr


def test_dimension_single_row(capsys):
    assert run("dimension", "--preset", "urban", "--mode", "broadcast", "--samples", "10000") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 2 and lines[1].startswith("500.0,broadcast,4x1,")


def test_seed_env_fallback(monkeypatch, capsys):
    monkeypatch.setenv("CELLDIM_SEED", "11")
    run("dimension", "--preset", "urban", "--samples", "10000")
    env = capsys.readouterr().out
    run("dimension", "--preset", "urban", "--samples", "10000", "--seed", "11")
    assert capsys.readouterr().out == env
    run("dimension", "--preset", "urban", "--samples", "10000", "--seed", "12")
    assert capsys.readouterr().out != env
    monkeypatch.setenv("CELLDIM_SEED", "x")
    assert run("dimension", "--preset", "urban") == 2


def test_out_writes_manifest(tmp_path):
    out = tmp_path / "r.csv"
    assert run("dimension", "--preset", "urban", "--samples", "10000", "--seed", "3",
               "--out", str(out), "--dump-layout", str(tmp_path / "l.csv"),
               "--dump-sinr", str(tmp_path / "s.csv")) == 0
    man = json.loads(out.with_suffix(".manifest.json").read_text())
    assert man["seed"] == 3 and len(man["config_hash"]) == 64
    assert len(man["point_runtimes_s"]) == 1
    assert (tmp_path / "l.csv").read_text().startswith("site,ring")
    assert (tmp_path / "s.csv").read_text().startswith("sinr_db,cdf")


def test_strict_flags_infeasible(tmp_path):
    args = ["dimension", "--preset", "rural", "--isd", "16000", "--samples", "10000",
            "--out", str(tmp_path / "x.csv")]
    assert run(*args) == 0
    assert run(*args, "--strict") == 1


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[preset]\nmorphology = urban\n[scenario]\nisd = 300\n")
    assert run("dimension", "--config", str(cfg), "--samples", "10000") == 0
    assert capsys.readouterr().out.splitlines()[1].startswith("300.0,")
    cfg.write_text("[scenario]\nisd = -3\n")
    assert run("dimension", "--config", str(cfg)) == 2
    assert run("dimension", "--config", str(tmp_path / "missing.ini")) == 2


def test_custom_sweep(capsys):
    assert run("sweep", "--preset", "urban", "--axis", "antennas", "--values", "4x1,8x8",
               "--samples", "10000") == 0
    lines = capsys.readouterr().out.splitlines()
    assert [l.split(",")[0] for l in lines[1:]] == ["4x1", "8x8"]
    assert run("sweep", "--preset", "urban") == 2
    assert run("sweep", "--preset", "fig5", "--axis", "isd", "--values", "1") == 2


def test_dump_subcommands(tmp_path, capsys):
    assert run("dump", "config", "--preset", "rural") == 0
    assert "[scenario]" in capsys.readouterr().out
    assert run("dump", "layout", "--preset", "urban", "--out", str(tmp_path / "l.csv")) == 0
    assert run("dump", "classes", "--preset", "urban", "--unicast-samples", "4000",
               "--out", str(tmp_path / "c.csv")) == 0
    assert (tmp_path / "c.csv").read_text().startswith("k,family")


def test_validate_quick(capsys):
    assert run("validate", "--quick") == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "0 failure(s)" in out
