"""Command-line harness: ``hesim bench|noise|convergence|solve|sweep-refresh``.

Exit codes: 0 success, 2 bad configuration or output location, 3 a ciphertext
ran out of levels.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import asdict
from pathlib import Path

from hesim.ckks import CkksContext, FormatError, LevelExhaustedError
from hesim.cli import report
from hesim.cli.bench import (
    BENCH_LENGTH, BENCH_OPS, BenchSpec, addition_growth, loglog_slope, multiplication_growth,
    run_bench, summarize,
)
from hesim.cli.config import ConfigError, int_list, load_config, merge, str_list
from hesim.cli.studies import BackendSpec, convergence, make_grid, solve, sweep_refresh
from hesim.solvers import AdvectionConfig, exact_solution, l2_error
from hesim.version import __version__

COMMON = {"backend": "exact", "seed": 0, "eps_boot": None, "l_max": 33, "l_refresh": 25,
          "ring_dim": 2**13, "scale_bits": 40, "mode": "standard", "plots": True}
PROBLEM = {"scheme": "lax_wendroff", "dim": 1, "cfl": 0.5, "t_end": 1.0, "a_x": 1.0, "a_y": 1.0,
           "dt_rule": "sum"}
DEFAULTS = {
    "bench": {**COMMON, "ops": ",".join(BENCH_OPS), "depths": "33", "repetitions": 5,
              "correlation": "uncorrelated", "timing": True},
    "noise": {**COMMON, "op": "add", "counts": None, "noise_ring_dim": None},
    "convergence": {**COMMON, **PROBLEM, "t_end": 0.5, "sizes": "32,64,128,256"},
    "solve": {**COMMON, **PROBLEM, "n": 64},
    "sweep_refresh": {**COMMON, **PROBLEM, "n": 64, "l_refresh_list": "3,5,7,9,11,13,17,21,25,29",
                      "reserve": 4, "refresh_weight": 20.0, "eps_boot": 1e-6},
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hesim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat TOML file (or a JSON manifest); flags win")
    common.add_argument("--out", default="hesim-out", help="output directory")
    common.add_argument("--backend", choices=("exact", "encrypted"))
    common.add_argument("--seed", type=int)
    common.add_argument("--eps-boot", type=float)
    common.add_argument("--lmax", dest="l_max", type=int)
    common.add_argument("--lrefresh", dest="l_refresh", type=int)
    common.add_argument("--ring-dim", type=int)
    common.add_argument("--scale-bits", type=int)
    common.add_argument("--mode", choices=("standard", "iterative"))
    common.add_argument("--no-plots", dest="plots", action="store_const", const=False)

    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument("--scheme", choices=("upwind", "lax_wendroff"))
    problem.add_argument("--dim", type=int, choices=(1, 2))
    problem.add_argument("--cfl", type=float)
    problem.add_argument("--t-end", type=float)
    problem.add_argument("--a-x", type=float)
    problem.add_argument("--a-y", type=float)
    problem.add_argument("--dt-rule", choices=("sum", "min"))

    b = sub.add_parser("bench", parents=[common], help="primitive-operation error and timing")
    b.add_argument("--ops", help="comma list from: " + ", ".join(BENCH_OPS))
    b.add_argument("--depths", help="comma list of l_max values")
    b.add_argument("--repetitions", type=int)
    b.add_argument("--correlation", choices=("correlated", "uncorrelated"))
    b.add_argument("--no-timing", dest="timing", action="store_const", const=False,
                   help="write 0 for seconds so whole files are reproducible")

    n = sub.add_parser("noise", parents=[common], help="error growth under repeated operations")
    n.add_argument("--op", choices=("add", "mul"))
    n.add_argument("--counts", help="comma list of operation counts")
    n.add_argument("--noise-ring-dim", type=int)

    c = sub.add_parser("convergence", parents=[common, problem], help="error and EOC over grids")
    c.add_argument("--sizes", help="ascending powers of two, e.g. 32,64,128")

    s = sub.add_parser("solve", parents=[common, problem], help="one full simulation")
    s.add_argument("--n", type=int, help="nodes per direction")

    r = sub.add_parser("sweep-refresh", parents=[common, problem], help="cost and error vs l_refresh")
    r.add_argument("--n", type=int)
    r.add_argument("--l-refresh-list", help="comma list of l_refresh values")
    r.add_argument("--reserve", type=int, help="levels kept free below l_max")
    r.add_argument("--refresh-weight", type=float)
    return p


def _settings(args) -> dict:
    key = args.command.replace("-", "_")
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "out")}
    return merge(DEFAULTS[key], load_config(args.config), flags)


def _backend(cfg: dict) -> BackendSpec:
    return BackendSpec(kind=cfg["backend"], l_max=int(cfg["l_max"]), l_refresh=int(cfg["l_refresh"]),
                       ring_dim=int(cfg["ring_dim"]), scale_bits=int(cfg["scale_bits"]),
                       eps_boot=cfg["eps_boot"], mode=cfg["mode"], seed=int(cfg["seed"]))


def _problem(cfg: dict) -> AdvectionConfig:
    return AdvectionConfig(a_x=float(cfg["a_x"]), a_y=float(cfg["a_y"]), cfl=float(cfg["cfl"]),
                           t_end=float(cfg["t_end"]), scheme=cfg["scheme"], dt_rule=cfg["dt_rule"])


def _outdir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _manifest(out: Path, command: str, cfg: dict, started: float, **extra) -> Path:
    data = {"command": command, "config": cfg, "version": __version__,
            "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime(started)),
            "wall_seconds": time.time() - started, **extra}
    return report.write_json(out / "manifest.json", data)


# -- commands ---------------------------------------------------------------

def cmd_bench(cfg: dict, out: Path) -> list[Path]:
    spec = BenchSpec(ops=tuple(str_list(cfg["ops"])), depths=tuple(int_list(cfg["depths"])),
                     repetitions=int(cfg["repetitions"]), correlation=cfg["correlation"])
    rows = run_bench(spec, ring_dim=int(cfg["ring_dim"]), scale_bits=int(cfg["scale_bits"]),
                     l_refresh=int(cfg["l_refresh"]), seed=int(cfg["seed"]),
                     eps_boot=cfg["eps_boot"], timing=bool(cfg["timing"]))
    files = [report.write_csv(out / "bench.csv", report.BENCH_HEADER, (r.as_tuple() for r in rows)),
             report.write_json(out / "bench_summary.json", summarize(rows))]
    if cfg["plots"] and len(spec.depths) > 1:
        summ = summarize(rows)
        for metric, label in (("median_error", "Linf error"), ("median_seconds", "seconds")):
            series = {op: ([int(d) for d in cells], [c[metric] for c in cells.values()])
                      for op, cells in summ.items()}
            files.append(report.svg_plot(out / f"bench_{metric.split('_')[1]}.svg", series,
                                         f"{label} vs depth", "l_max", label, logy=True))
    return files


def cmd_noise(cfg: dict, out: Path) -> list[Path]:
    op = cfg["op"]
    if cfg["counts"] is None:
        counts = [2, 4, 8, 16, 32, 64, 128] if op == "add" else list(range(2, 17))
    else:
        counts = int_list(cfg["counts"])
    if min(counts) < (2 if op == "add" else 1):
        raise ConfigError("operation counts too small")
    ring_dim = int(cfg["noise_ring_dim"] or cfg["ring_dim"])
    l_max = int(cfg["l_max"]) if op == "add" else max(int(cfg["l_max"]), max(counts))
    ctx = CkksContext(ring_dim=ring_dim, l_max=l_max, l_refresh=min(int(cfg["l_refresh"]), l_max),
                      batch_size=BENCH_LENGTH, scale_bits=int(cfg["scale_bits"]))
    growth = addition_growth if op == "add" else multiplication_growth
    rows, slopes, series = [], {}, {}
    for mode, corr in (("correlated", True), ("uncorrelated", False)):
        errs = growth(ctx, counts, corr, seed=int(cfg["seed"]))
        rows.extend((op, mode, n, e) for n, e in zip(counts, errs))
        slopes[mode] = loglog_slope(counts, errs)
        series[mode] = (counts, errs)
    files = [report.write_csv(out / "noise.csv", report.NOISE_HEADER, rows),
             report.write_json(out / "noise_summary.json", {"op": op, "slopes": slopes})]
    if cfg["plots"]:
        files.append(report.svg_plot(out / "noise.svg", series, f"{op} error growth", "n",
                                     "Linf error", logx=True, logy=True))
    return files


def cmd_convergence(cfg: dict, out: Path) -> list[Path]:
    rows = convergence(_problem(cfg), int(cfg["dim"]), int_list(cfg["sizes"]), _backend(cfg))
    files = [report.write_csv(out / "convergence.csv", report.CONVERGENCE_HEADER,
                              ((r["N"], r["error"], r["eoc"]) for r in rows)),
             report.write_json(out / "convergence.json", {"rows": rows})]
    if cfg["plots"]:
        files.append(report.svg_plot(out / "convergence.svg",
                                     {cfg["scheme"]: ([r["N"] for r in rows], [r["error"] for r in rows])},
                                     "L2 error vs N", "N", "error", logx=True, logy=True))
    return files


def cmd_solve(cfg: dict, out: Path) -> tuple[list[Path], dict]:
    problem, grid = _problem(cfg), make_grid(int(cfg["dim"]), int(cfg["n"]))
    result, backend = solve(problem, grid, _backend(cfg))
    exact = exact_solution(grid, problem, result.t_final)
    if grid.dim == 1:
        field = ((i, x, u, e) for i, (x, u, e) in enumerate(zip(grid.nodes(), result.final, exact)))
        header = report.SOLVE_FIELD_HEADER_1D
    else:
        x, y = grid.nodes()
        field = ((i, j, x[i, j], y[i, j], result.final[i, j], exact[i, j])
                 for i in range(grid.nx) for j in range(grid.ny))
        header = report.SOLVE_FIELD_HEADER_2D
    boots = set(result.bootstrap_steps)
    t, trace = 0.0, []
    for n, (c, lv) in enumerate(zip(result.counters.per_step, result.levels), start=1):
        t = min(problem.t_end, n * result.dt)
        gap = result.twin_error[n - 1] if result.twin_error else float("nan")
        trace.append((n, t, lv, n in boots, c.add, c.mul, c.rot, gap))
    files = [report.write_csv(out / "final.csv", header, field),
             report.write_csv(out / "trace.csv", report.SOLVE_TRACE_HEADER, trace)]
    summary = {"steps": result.steps, "dt": result.dt, "t_final": result.t_final,
               "l_step": result.l_step, "bootstrap_steps": result.bootstrap_steps,
               "l2_error": l2_error(result.final, exact),
               "totals": asdict(result.counters.total),
               "step_seconds": result.step_seconds, "setup_seconds": result.setup_seconds,
               "backend": backend.name}
    if cfg["plots"] and grid.dim == 1:
        xs = list(grid.nodes())
        files.append(report.svg_plot(out / "final.svg", {"computed": (xs, list(result.final)),
                                                         "exact": (xs, list(exact))},
                                     f"u at t = {result.t_final:g}", "x", "u"))
    return files, summary


def cmd_sweep_refresh(cfg: dict, out: Path) -> tuple[list[Path], dict]:
    lst = int_list(cfg["l_refresh_list"])
    be = _backend({**cfg, "l_refresh": min(int(cfg["l_refresh"]), int(cfg["l_max"]))})
    rows = sweep_refresh(_problem(cfg), make_grid(int(cfg["dim"]), int(cfg["n"])), lst, be,
                         reserve=int(cfg["reserve"]), refresh_weight=float(cfg["refresh_weight"]))
    files = [report.write_csv(out / "sweep_refresh.csv", report.SWEEP_HEADER,
                              ([r[k] for k in report.SWEEP_HEADER] for r in rows))]
    best = min(rows, key=lambda r: r["cost"])["l_refresh"]
    if cfg["plots"]:
        files.append(report.svg_plot(out / "sweep_refresh.svg",
                                     {"cost": (lst, [r["cost"] for r in rows])},
                                     "level-weighted cost vs l_refresh", "l_refresh", "cost"))
    return files, {"rows": rows, "cheapest_l_refresh": best}


COMMANDS = {"bench": cmd_bench, "noise": cmd_noise, "convergence": cmd_convergence,
            "solve": cmd_solve, "sweep_refresh": cmd_sweep_refresh}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    started = time.time()
    try:
        cfg = _settings(args)
        out = _outdir(args.out)
        result = COMMANDS[args.command.replace("-", "_")](cfg, out)
        files, extra = result if isinstance(result, tuple) else (result, {})
        _manifest(out, args.command, cfg, started, outputs=[f.name for f in files], **extra)
    except LevelExhaustedError as exc:
        print(f"hesim: out of levels: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, FormatError, ValueError, KeyError) as exc:
        print(f"hesim: {exc}", file=sys.stderr)
        return 2
    for f in files:
        print(out / f.name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
