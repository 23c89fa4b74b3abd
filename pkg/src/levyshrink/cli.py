"""Command line interface: simulate, estimate, experiment, check.

Exit codes: 0 success, 1 failed statistical check, 2 configuration or
schema error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import risk as risk_mod
from .config import AppConfig, ConfigError, RunManifest, bundled_config_path, parse_config, write_csv
from .noise import SamplePath, conditional_gram, simulate_path
from .selection import pinsker_grid, select, sigma_from_coeffs
from .shrinkage import WeightVector, estimate_fourier, shrink_coeffs, shrink_threshold

ENV_THREADS = "LEVYSHRINK_THREADS"


class SchemaError(ValueError):
    """Malformed input data file; maps to exit code 2."""


def _resolve_config(arg: str) -> Path:
    p = Path(arg)
    if p.is_file():
        return p
    if "/" not in arg and not arg.endswith(".cfg"):
        return bundled_config_path(arg + ".cfg")
    if "/" not in arg:
        return bundled_config_path(arg)
    raise ConfigError(f"configuration file not found: {arg}")


def _load(args) -> AppConfig:
    cfg = parse_config(_resolve_config(args.config))
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "replicates", None) is not None:
        cfg.replicates = args.replicates
    return cfg


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = simulate_path(cfg.noise, cfg.signal, cfg.n, cfg.dt, seed=cfg.seed)
    manifest = RunManifest(digest=cfg.digest, seed=cfg.seed)
    t = path.times
    write_csv(out / "path.csv", manifest, "t,y",
              (f"{float(ti)!r},{float(yi)!r}" for ti, yi in zip(t, path.values)))
    write_csv(out / "jumps.csv", manifest, "time,size,source_index",
              (f"{float(tt)!r},{float(ss)!r},{int(kk)}" for tt, ss, kk in
               zip(path.jump_times, path.jump_sizes, path.jump_sources)))
    _say(args, f"wrote {out / 'path.csv'} and {out / 'jumps.csv'}")
    return 0


def read_path_csv(file: Path, dt_hint: float) -> SamplePath:
    """Rebuild a SamplePath from a t,y CSV; raises SchemaError with a row number."""
    ts, ys = [], []
    with open(file) as fh:
        header_seen = False
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                if line.replace(" ", "") != "t,y":
                    raise SchemaError(f"{file}:{lineno}: expected header 't,y'")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise SchemaError(f"{file}:{lineno}: expected two columns")
            try:
                ts.append(float(parts[0]))
                ys.append(float(parts[1]))
            except ValueError:
                raise SchemaError(f"{file}:{lineno}: non-numeric value")
    if len(ts) < 3:
        raise SchemaError(f"{file}: path is too short ({len(ts)} rows)")
    t = np.array(ts)
    y = np.array(ys)
    dt = t[1] - t[0]
    if t[0] != 0.0 or np.max(np.abs(np.diff(t) - dt)) > 1e-9:
        raise SchemaError(f"{file}: times must form a uniform grid starting at 0")
    if y[0] != 0.0:
        raise SchemaError(f"{file}: first observation must be 0")
    p = round(1.0 / dt)
    if p < 1 or abs(p * dt - 1.0) > 1e-6:
        raise SchemaError(f"{file}: step {dt!r} does not divide the unit interval")
    dt = 1.0 / p
    n, rem = divmod(len(t) - 1, p)
    if rem or n < 2:
        raise SchemaError(f"{file}: path must cover an integer horizon >= 2")
    return SamplePath(n=int(n), dt=dt, values=y)


def cmd_estimate(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = read_path_csv(Path(args.path), cfg.dt)
    n = path.n
    est = estimate_fourier(path)
    sigma_hat = sigma_from_coeffs(est.coeffs, n)
    grid = pinsker_grid(n, cfg.experiment().grid_for(n))
    shr = cfg.experiment().shrinkage_for(n)
    delta = cfg.experiment().delta_for(n)
    outcome = select(est, grid, shr, sigma_hat, delta, shrink=True)
    wv = outcome.chosen
    star = shrink_coeffs(est, wv, outcome.threshold)
    manifest = RunManifest(digest=cfg.digest, seed=cfg.seed)
    write_csv(out / "coefficients.csv", manifest, "j,theta_hat,theta_star,lambda",
              (f"{j + 1},{float(est.coeffs[j])!r},{float(star[j])!r},{float(wv.weights[j])!r}"
               for j in range(n)))
    summary = [
        f"sigma_hat = {sigma_hat!r}",
        f"beta = {wv.beta}",
        f"r = {wv.r!r}",
        f"omega = {wv.omega!r}",
        f"head_d = {wv.head}",
        f"c_n = {outcome.threshold!r}",
        f"cost = {float(outcome.costs[outcome.index])!r}",
        f"delta = {delta!r}",
        f"config_digest = {cfg.digest}",
    ]
    (out / "summary.txt").write_text("\n".join(summary) + "\n")
    _say(args, f"selected (beta={wv.beta}, r={wv.r:.4g}), sigma_hat={sigma_hat:.4g}")
    return 0


def cmd_experiment(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = risk_mod.run_experiment(cfg.experiment(), n_jobs=args.threads)
    manifest = RunManifest(digest=cfg.digest, seed=cfg.seed)
    write_csv(out / "risk_report.csv", manifest, report.CSV_HEADER, report.csv_rows())
    table = report.format_table()
    (out / "table.txt").write_text(
        "\n".join(manifest.header_lines()) + "\n" + table + "\n")
    for n, fig in report.figures.items():
        write_csv(out / f"figure_n{n}.csv", manifest, "t,truth,lse,improved",
                  (f"{float(a)!r},{float(b)!r},{float(c)!r},{float(d)!r}"
                   for a, b, c, d in fig.T))
    _say(args, table)
    return 0


def cmd_check(args) -> int:
    cfg = _load(args)
    n = cfg.n
    reps = cfg.replicates
    failures = 0
    exp = cfg.experiment()

    def report(name: str, ok: bool, detail: str) -> None:
        nonlocal failures
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        if not ok:
            failures += int(not ok)

    checks = risk_mod.check_integral_identities(
        cfg.noise, t=min(n, 50), replicates=max(reps, 100), dt=cfg.dt, seed=cfg.seed)
    for chk in checks:
        report(f"isometry ({chk.f},{chk.g})", chk.isometry_ok,
               f"mean={chk.isometry_mean:.4g} target={chk.isometry_target:.4g} "
               f"se={chk.isometry_se:.3g}")
        report(f"fourth-moment ({chk.f},{chk.g})", chk.fourth_ok,
               f"|mean|={abs(chk.fourth_mean):.4g} bound={chk.fourth_bound:.4g} "
               f"se={chk.fourth_se:.3g}")

    # conditional Gram inequality over simulated jump records
    d = min(10, n)
    slack = []
    for l in range(min(reps, 200)):
        path = simulate_path(cfg.noise, None, n=max(d, 10), dt=0.01,
                             seed=risk_mod.replicate_seed(cfg.seed + 1, d, l))
        g = conditional_gram(path, cfg.noise, d)
        eig = float(np.linalg.eigvalsh(g)[-1])
        slack.append(np.trace(g) - eig - (d - 1) * cfg.noise.sigma1**2)
    ok = all(s >= -1e-10 for s in slack)
    report("gram trace inequality", ok, f"min slack={min(slack):.4g} over {len(slack)} records")

    # improvement at a head of length >= 2 (grid head if possible, else synthetic)
    grid = pinsker_grid(n, exp.grid_for(n))
    wv = grid.largest_head_vector()
    if wv.head < 2:
        d_syn = max(2, int(math.isqrt(n)))
        w = np.zeros(n)
        w[:d_syn] = 1.0
        wv = WeightVector(weights=w, head=d_syn)
    imp = risk_mod.check_improvement(cfg.noise, cfg.signal, wv, exp.shrinkage_for(n),
                                     n, replicates=max(reps, 200), dt=cfg.dt,
                                     seed=cfg.seed, n_jobs=args.threads)
    report("risk improvement", imp.improved and imp.margin_vs_bound <= 0,
           f"d={imp.head} delta_hat={imp.delta_hat:.4g} se={imp.se:.3g} "
           f"c^2={imp.threshold_sq:.4g}")

    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levyshrink")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--config", required=True,
                       help="config file path or bundled name (e.g. 'reference')")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int,
                       default=int(os.environ.get(ENV_THREADS, "1")))
        p.add_argument("--replicates", type=int, default=None)
        p.add_argument("--quiet", action="store_true")
        if out:
            p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="simulate one observation path")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="run model selection on a stored path")
    common(p)
    p.add_argument("--path", required=True, help="path CSV produced by 'simulate'")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("experiment", help="run the Monte Carlo risk study")
    common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("check", help="run the statistical property suite")
    common(p, out=False)
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
