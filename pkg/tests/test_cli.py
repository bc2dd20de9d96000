import csv
import subprocess
import sys
from pathlib import Path

import pytest

from ctrlinterlace.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, load_config, main

BASE = Path(__file__).resolve().parents[1] / "configs" / "paper.cfg"


def make_config(tmp_path, name="case.cfg", **replace):
    """Copy of the reference config with ``key = value`` lines replaced."""
    lines = BASE.read_text().splitlines()
    out = []
    for line in lines:
        key = line.split("=")[0].strip()
        if key in replace:
            value = replace[key]
            if value is None:
                continue
            line = f"{key} = {value}"
        out.append(line)
    path = tmp_path / name
    path.write_text("\n".join(out) + "\n")
    return path


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def run(cmd, cfg, out, *extra):
    return main([cmd, "--config", str(cfg), "--out", str(out), *extra])


def test_reference_config_loads():
    cfg = load_config(BASE)
    assert cfg.T == 0.1 and cfg.N == 3 and cfg.threshold == 0.85
    assert cfg.controller.den.degree == 6
    assert cfg.plant.n_states == 2


@pytest.mark.parametrize("cmd", ["decompose", "interlace", "bode", "margins", "simulate"])
def test_every_command_succeeds(tmp_path, cmd):
    assert run(cmd, BASE, tmp_path) == EXIT_OK


def test_decompose_output(tmp_path, capsys):
    run("decompose", BASE, tmp_path)
    text = capsys.readouterr().out
    assert "1 fast group(s), 3 slow group(s)" in text
    rows = read_csv(tmp_path / "blocks.csv")
    assert rows[0] == ["block", "role", "num_desc", "den_desc", "period"]
    assert [r[1] for r in rows[1:]] == ["fast", "slow", "slow", "slow"]


def test_threshold_zero_everything_slow(tmp_path, capsys):
    cfg = make_config(tmp_path, threshold="0")
    assert run("decompose", cfg, tmp_path) == EXIT_OK
    assert "0 fast group(s), 4 slow group(s)" in capsys.readouterr().out
    # four slow groups do not fit into three phases
    assert run("margins", cfg, tmp_path) == EXIT_CONFIG


def test_interlace_output(tmp_path):
    run("interlace", BASE, tmp_path)
    prof = read_csv(tmp_path / "load_profile.csv")
    assert prof[0] == ["order", "phase", "monolithic_mac", "interlaced_mac"]
    assert [r[2] for r in prof[1:]] == ["12"] * 3
    assert len(read_csv(tmp_path / "slow_blocks.csv")) == 4


def test_all_orders(tmp_path):
    assert run("margins", BASE, tmp_path, "--all-orders") == EXIT_OK
    rows = read_csv(tmp_path / "margins.csv")
    assert len(rows) == 7
    assert {r[0] for r in rows[1:]} == {f"i1o1_{''.join(p)}" for p in
                                       ("012", "021", "102", "120", "201", "210")}
    assert run("simulate", BASE, tmp_path, "--all-orders") == EXIT_OK
    assert len(list(tmp_path.glob("sim_interlaced_i1o1_*.csv"))) == 6


def test_every_strategy_and_override(tmp_path):
    assert run("bode", BASE, tmp_path, "--every-strategy") == EXIT_OK
    assert len(list(tmp_path.glob("bode_open_*.csv"))) == 4
    assert run("margins", BASE, tmp_path, "--strategy", "i2o2", "--order", "0,1,2") == EXIT_OK
    rows = read_csv(tmp_path / "margins.csv")
    assert [r[0] for r in rows[1:]] == ["i2o2"]


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("bode", BASE, out) == EXIT_OK
        assert run("simulate", BASE, out) == EXIT_OK
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_zero_steps_header_only(tmp_path):
    cfg = make_config(tmp_path, steps="0")
    assert run("simulate", cfg, tmp_path) == EXIT_OK
    for name in ("sim_interlaced_i1o1.csv", "sim_single_fast.csv", "sim_single_slow.csv"):
        rows = read_csv(tmp_path / name)
        assert rows == [["t_seconds", "reference", "output", "control", "mac_count"]]


def test_single_point_grid(tmp_path):
    cfg = make_config(tmp_path, points=None, decades=None)
    text = cfg.read_text().replace("[sweep]", "[sweep]\nomega = 2.0")
    cfg.write_text(text)
    assert run("bode", cfg, tmp_path) == EXIT_OK
    assert len(read_csv(tmp_path / "bode_open_i1o1.csv")) == 2


def test_n_equal_one_is_classical(tmp_path, capsys):
    cfg = make_config(tmp_path, N="1", threshold="1.5", order=None)
    assert run("margins", cfg, tmp_path) == EXIT_OK
    text = capsys.readouterr().out
    row = read_csv(tmp_path / "margins.csv")[1]
    assert float(row[1]) == pytest.approx(41.98, abs=0.05)
    assert "singular" not in text


def test_missing_config_exit_2(tmp_path, capsys):
    assert run("decompose", tmp_path / "nope.cfg", tmp_path) == EXIT_CONFIG
    assert "nope.cfg" in capsys.readouterr().err


def test_malformed_list_names_field(tmp_path, capsys):
    cfg = make_config(tmp_path, den="1, two, 1.5")
    assert run("decompose", cfg, tmp_path) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "[plant] den" in err


def test_bad_arguments_exit_2(tmp_path):
    assert main(["decompose"]) == EXIT_CONFIG
    assert main(["frobnicate", "--config", str(BASE)]) == EXIT_CONFIG
    assert run("margins", BASE, tmp_path, "--order", "0,1,2", "--all-orders") == EXIT_CONFIG
    assert run("margins", BASE, tmp_path, "--order", "0,0,1") == EXIT_CONFIG
    assert run("margins", BASE, tmp_path, "--strategy", "i9o9") == EXIT_CONFIG


def test_unstable_loop_exit_3(tmp_path, capsys):
    cfg = make_config(tmp_path, gain="20")
    assert run("margins", cfg, tmp_path) == EXIT_NUMERIC
    assert "UNSTABLE" in capsys.readouterr().out
    assert run("simulate", cfg, tmp_path) == EXIT_NUMERIC


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "ctrlinterlace", "interlace", "--config",
                          str(BASE), "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0
    assert "MAC per phase" in res.stdout
