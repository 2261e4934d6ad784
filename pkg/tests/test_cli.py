import csv
import json
import statistics
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from hesim.cli import main
from hesim.cli.bench import BENCH_OPS, BenchSpec, run_bench
from hesim.cli.config import ConfigError, load_config, merge
from hesim.cli.report import BENCH_HEADER
from hesim.solvers import OPS_PER_STEP

SMALL = ["--ring-dim", "2048", "--lmax", "8", "--lrefresh", "5"]


def rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def run(args, tmp_path, name="out"):
    out = tmp_path / name
    assert main([*args, "--out", str(out)]) == 0
    return out


def test_convergence_table_and_manifest_round_trip(tmp_path):
    out = run(["convergence", "--sizes", "32,64,128"], tmp_path)
    table = rows(out / "convergence.csv")
    assert list(table[0]) == ["N", "error", "eoc"]
    assert float(table[0]["error"]) == pytest.approx(1.07e-2, rel=0.02)
    assert [round(float(r["eoc"]), 2) for r in table[1:]] == [2.0, 2.0]
    ET.parse(out / "convergence.svg")
    again = run(["convergence", "--config", str(out / "manifest.json")], tmp_path, "again")
    assert (again / "convergence.csv").read_bytes() == (out / "convergence.csv").read_bytes()


def test_toml_config_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('scheme = "upwind"\nsizes = [16, 32]\nt_end = 0.25\n')
    out = run(["convergence", "--config", str(cfg), "--sizes", "32,64"], tmp_path)
    table = rows(out / "convergence.csv")
    assert [r["N"] for r in table] == ["32", "64"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["scheme"] == "upwind"
    assert manifest["config"]["t_end"] == 0.25


def test_merge_rules():
    d = {"a": 1, "b": 2}
    assert merge(d, {"a": 5}, {"a": None, "b": 7}) == {"a": 5, "b": 7}
    with pytest.raises(ConfigError):
        merge(d, {"c": 1}, {})


@pytest.mark.parametrize("text", ["[table]\nx = 1\n", "scheme = \n", "bogus_key = 1\n"])
def test_bad_config_exits_2(tmp_path, text, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(text)
    assert main(["convergence", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_error_exit_codes(tmp_path):
    out = str(tmp_path / "o")
    assert main(["bench", "--ops", "add_cc,frobnicate", "--out", out]) == 2
    assert main(["bench", "--repetitions", "3", "--out", out]) == 2
    assert main(["convergence", "--sizes", "64,32", "--out", out]) == 2
    assert main(["sweep-refresh", "--l-refresh-list", "2,40", "--out", out]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["convergence", "--out", str(blocker / "sub")]) == 2
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    # sub-capacity Lax-Wendroff needs two levels per step; two levels in total is not enough
    assert main(["solve", "--n", "48", "--lmax", "2", "--lrefresh", "2", "--out", out]) == 3


def test_solve_outputs_and_counter_trace(tmp_path):
    lw = run(["solve", "--n", "64", "--t-end", "1.0"], tmp_path, "lw")
    up = run(["solve", "--n", "64", "--t-end", "1.0", "--scheme", "upwind"], tmp_path, "up")
    u_lw = np.array([float(r["u"]) for r in rows(lw / "final.csv")])
    u_up = np.array([float(r["u"]) for r in rows(up / "final.csv")])
    assert np.abs(u_up).max() / np.abs(u_lw).max() < 0.9
    trace = rows(lw / "trace.csv")
    manifest = json.loads((lw / "manifest.json").read_text())
    assert len(trace) == manifest["steps"] == 128
    add, mul, rot = OPS_PER_STEP[(1, "lax_wendroff", True)]
    assert manifest["totals"] == {"add": add * 128, "mul": mul * 128, "rot": rot * 128,
                                  "refresh": len(manifest["bootstrap_steps"])}
    assert [int(r["step"]) for r in trace if r["refreshed"] == "1"] == manifest["bootstrap_steps"]
    assert manifest["t_final"] == pytest.approx(1.0)


def test_solve_2d_field_layout(tmp_path):
    out = run(["solve", "--dim", "2", "--n", "8", "--t-end", "0.1"], tmp_path)
    field = rows(out / "final.csv")
    assert list(field[0]) == ["i", "j", "x", "y", "u", "u_exact"]
    assert len(field) == 64


def test_encrypted_solve_is_byte_identical(tmp_path):
    args = ["solve", "--backend", "encrypted", "--n", "16", "--t-end", "0.5", *SMALL, "--seed", "4"]
    a = run(args, tmp_path, "a")
    b = run(args, tmp_path, "b")
    for name in ("final.csv", "trace.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    c = run([*args[:-1], "5"], tmp_path, "c")
    assert (a / "final.csv").read_bytes() != (c / "final.csv").read_bytes()
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["bootstrap_steps"]
    gaps = [float(r["twin_error"]) for r in rows(a / "trace.csv")]
    assert max(gaps) < 1e-4


def test_bench_schema_and_determinism(tmp_path):
    args = ["bench", "--depths", "3,5", "--ops", "encode,add_cc,mul_cs,rotate_-1,rotate_5,rotate_-25,refresh",
            "--ring-dim", "2048", "--no-timing", "--seed", "2"]
    a = run(args, tmp_path, "a")
    b = run(args, tmp_path, "b")
    assert (a / "bench.csv").read_bytes() == (b / "bench.csv").read_bytes()
    table = rows(a / "bench.csv")
    assert tuple(table[0]) == BENCH_HEADER
    assert len(table) == 7 * 2 * 5
    summary = json.loads((a / "bench_summary.json").read_text())
    assert summary["mul_cs"]["5"]["levels"] == 1
    assert summary["add_cc"]["3"]["levels"] == 0
    assert summary["refresh"]["5"]["levels"] == 0
    for depth in ("3", "5"):
        errs = [summary[f"rotate_{k}"][depth]["median_error"] for k in (-1, 5, -25)]
        assert max(errs) / min(errs) < 10
    ET.parse(a / "bench_error.svg")


def test_bench_spec_validation():
    assert BenchSpec().ops == BENCH_OPS
    with pytest.raises(ValueError):
        BenchSpec(repetitions=4)
    with pytest.raises(ValueError):
        BenchSpec(correlation="partial")
    with pytest.raises(ValueError):
        BenchSpec(depths=())


def test_bench_correlated_mode():
    rows_ = run_bench(BenchSpec(ops=("add_cc",), depths=(3,), correlation="correlated"),
                      ring_dim=2048, seed=1, timing=False)
    assert all(r.error < 1e-6 for r in rows_)


@pytest.mark.slow
def test_scalar_add_is_cheaper_than_ciphertext_add():
    rows_ = run_bench(BenchSpec(ops=("add_cc", "add_cs"), depths=(33,), repetitions=15), seed=0)
    med = {op: statistics.median(r.seconds for r in rows_ if r.op == op) for op in ("add_cc", "add_cs")}
    assert med["add_cs"] < med["add_cc"]


def test_noise_command(tmp_path):
    out = run(["noise", "--op", "add", "--counts", "2,4,8,16,32", "--noise-ring-dim", "2048",
               "--lmax", "3", "--lrefresh", "2"], tmp_path)
    summary = json.loads((out / "noise_summary.json").read_text())
    assert abs(summary["slopes"]["correlated"] - 1.0) < 0.2
    assert len(rows(out / "noise.csv")) == 10


def test_sweep_refresh(tmp_path):
    out = run(["sweep-refresh", "--l-refresh-list", "3,5,9,13,17,21,25"], tmp_path)
    table = rows(out / "sweep_refresh.csv")
    counts = [int(r["refreshes"]) for r in table]
    assert all(a > b for a, b in zip(counts, counts[1:]))
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["cheapest_l_refresh"] not in (3, 25)
    gaps = [float(r["twin_error"]) for r in table]
    assert gaps[-1] < gaps[0]
    ops = {(r["add"], r["mul"], r["rot"]) for r in table}
    assert len(ops) == 1
