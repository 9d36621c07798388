"""Reproducible experiment runner.

Usage:
    fvselect <experiment> --config cfg.json [--seed S] [--out DIR]
    fvselect verify <run_dir>

Each run writes a manifest.json (resolved config, derived seeds, CSV schemas)
plus experiment CSVs. Identical config+seed give byte-identical CSVs. Replica
r of experiment tag T derives its stream from
SeedSequence(root_seed, spawn_key=(crc32(T), r)); worker scheduling therefore
cannot affect results, and merged outputs are ordered by replica index.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import math
import os
import sys
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernel, killed, nbbm, qsd
from .fleming_viot import estimate_stationary, green_identity_check
from .measures import w1

TOOL_VERSION = "0.1.0"

EXPERIMENTS = ("fv-stationary", "fv-sweep", "yaglom", "survival", "nbbm-speed",
               "nbbm-profile", "qsd-table", "validate-kernel", "green-check")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    n_particles: list[int] = field(default_factory=lambda: [100])
    dt: float = 1e-3
    horizon: float = 500.0
    burn_in: float = 50.0
    initial: dict = field(default_factory=lambda: {"qsd": 0.5})
    seed: int = 12345
    replicas: int = 1
    output_dir: str = "fvselect-out"
    # experiment-specific knobs (all optional)
    t_grid: list[float] = field(default_factory=lambda: [2.0, 5.0, 10.0])
    lambdas: list[float] = field(default_factory=lambda: [0.125, 0.25, 0.375, 0.5])
    n_samples: int = 1_000_000
    fit_fraction: float = 0.05
    fit_window: float = 100.0
    record_interval: float = 0.1
    x_grid: list[float] = field(default_factory=lambda: [0.5, 1.0, 2.0])

    @staticmethod
    def from_dict(d: dict, experiment: str) -> "ExperimentConfig":
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {experiment!r}; "
                              f"choose one of {', '.join(EXPERIMENTS)}")
        known = set(ExperimentConfig.__dataclass_fields__)
        for key in d:
            if key not in known:
                raise ConfigError(f"unknown config field {key!r}")
        cfg = ExperimentConfig(experiment=experiment,
                               **{k: v for k, v in d.items() if k != "experiment"})
        if isinstance(cfg.n_particles, int):
            cfg.n_particles = [cfg.n_particles]
        cfg.n_particles = [int(n) for n in cfg.n_particles]
        if any(n < 2 for n in cfg.n_particles):
            raise ConfigError("n_particles entries must be >= 2")
        if cfg.dt <= 0:
            raise ConfigError("dt must be positive")
        if not (cfg.horizon > cfg.burn_in >= 0):
            raise ConfigError("need horizon > burn_in >= 0")
        if cfg.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if not isinstance(cfg.seed, int):
            raise ConfigError("seed must be an integer")
        keys = set(cfg.initial)
        if not (keys <= {"qsd", "point", "positions"}) or len(keys) != 1:
            raise ConfigError("initial must be exactly one of "
                              '{"qsd": lam}, {"point": x}, {"positions": [...]}')
        return cfg

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def initial_sampler(spec: dict):
    if "qsd" in spec:
        q = qsd.make_qsd(float(spec["qsd"]))
        return lambda n, rng: qsd.qsd_sample(q, n, rng)
    if "point" in spec:
        x = float(spec["point"])
        if x <= 0:
            raise ConfigError("point initial condition must be positive")
        return lambda n, rng: np.full(n, x)
    pos = np.asarray(spec["positions"], dtype=float)
    if np.any(pos <= 0):
        raise ConfigError("explicit initial positions must be positive")
    return lambda n, rng: np.resize(pos, n)


def replica_rng(root_seed: int, tag: str, replica: int) -> np.random.Generator:
    key = zlib.crc32(tag.encode())
    return np.random.default_rng(np.random.SeedSequence(root_seed,
                                                        spawn_key=(key, replica)))


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        # repr round-trips exactly, keeping reruns byte-identical
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _max_workers(replicas: int) -> int:
    cap = os.environ.get("FVSELECT_THREADS")
    cap = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(replicas, cap))


def _pimin_law():
    return qsd.qsd_law(qsd.make_qsd(0.5))


# ---------------------------------------------------------------------------
# experiment runners: each returns {csv_name: (header, rows)}

def _run_qsd_table(cfg: ExperimentConfig, replica: int) -> dict:
    rng = replica_rng(cfg.seed, "qsd-table", replica)
    rows = []
    for lam in cfg.lambdas:
        q = qsd.make_qsd(lam)
        samples = qsd.qsd_sample(q, cfg.n_samples, rng)
        rows.append([replica, lam, q.beta, q.norm_const, q.mean(),
                     float(samples.mean()),
                     qsd.tail_rate(samples, cfg.fit_fraction)])
    header = ["replica", "lambda", "beta", "norm_const", "mean",
              "sample_mean", "tail_rate"]
    return {"qsd_table.csv": (header, rows)}


def _run_validate_kernel(cfg: ExperimentConfig, replica: int) -> dict:
    rng = replica_rng(cfg.seed, "validate-kernel", replica)
    n_paths = cfg.n_samples
    rows = []
    analytic = qsd.survival_prob(1.0, 1.0)
    est, se = kernel.stepped_survival(1.0, 1.0, cfg.dt, n_paths, rng)
    rows.append([replica, "stepped_survival_x1_t1", est, analytic, se,
                 int(abs(est - analytic) <= 3 * se)])
    analytic_half = qsd.survival_prob(0.5, 1.0)
    raw, raw_se = kernel.stepped_survival(0.5, 1.0, 1e-2, n_paths, rng,
                                          bridge_correction=False)
    rows.append([replica, "uncorrected_bias_x0.5_t1_dt1e-2", raw, analytic_half,
                 raw_se, int(raw - analytic_half > 3 * raw_se)])
    taus = kernel.sample_hitting_times(1.0, n_paths, rng)
    mean_se = float(taus.std(ddof=1) / math.sqrt(n_paths))
    rows.append([replica, "hitting_time_mean_x1", float(taus.mean()), 1.0,
                 mean_se, int(abs(taus.mean() - 1.0) <= 3 * mean_se)])
    v = float(taus.var(ddof=1))
    sq = (taus - taus.mean()) ** 2
    var_se = float(sq.std(ddof=1) / math.sqrt(n_paths))
    rows.append([replica, "hitting_time_var_x1", v, 1.0, var_se,
                 int(abs(v - 1.0) <= 3 * var_se)])
    header = ["replica", "check", "value", "expected", "std_error", "passed"]
    return {"kernel_checks.csv": (header, rows)}


def _run_survival(cfg: ExperimentConfig, replica: int) -> dict:
    rows = []
    for x in cfg.x_grid:
        for t in cfg.t_grid:
            rows.append([replica, x, t, qsd.survival_prob(x, t)])
    return {"survival.csv": (["replica", "x", "t", "survival"], rows)}


def _run_yaglom(cfg: ExperimentConfig, replica: int) -> dict:
    rng = replica_rng(cfg.seed, "yaglom", replica)
    sampler = initial_sampler(cfg.initial)
    pimin = _pimin_law()
    init_law = None
    if "qsd" in cfg.initial:
        init_law = qsd.qsd_law(qsd.make_qsd(float(cfg.initial["qsd"])))
    ensembles = killed.flow_theta_grid(sampler, cfg.t_grid, cfg.n_samples,
                                      cfg.dt, rng)
    rows = []
    for e in ensembles:
        m = e.measure()
        w_init = w1(m, init_law) if init_law is not None else float("nan")
        rows.append([replica, e.time, e.survivor_count, e.log_survival,
                     e.log_survival / e.time if e.time > 0 else float("nan"),
                     w1(m, pimin), w_init])
    header = ["replica", "t", "survivors", "log_survival", "decay_rate",
              "w1_to_pimin", "w1_to_initial"]
    return {"yaglom.csv": (header, rows)}


def _fv_summary_rows(cfg: ExperimentConfig, replica: int, n: int, rng):
    sampler = initial_sampler(cfg.initial)
    summary = estimate_stationary(n, sampler, cfg.dt, cfg.horizon, cfg.burn_in, rng)
    lam = summary.lambda_hat
    w1_pimin = w1(summary.xi_hat, _pimin_law())
    # interjump identity: lambda * N * E[tau_1] = 1
    prod = lam.estimate * n * summary.mean_interjump.estimate
    prod_se = math.hypot(lam.std_error * n * summary.mean_interjump.estimate,
                         lam.estimate * n * summary.mean_interjump.std_error)
    interjump_z = (prod - 1.0) / max(prod_se, 1e-300)
    # varpi identity: lambda * varpi(G1) = 1 with G1(x) = x
    _, _, varpi_z = green_identity_check(
        summary, f=lambda x: np.ones_like(x), gf=lambda x: x)
    _, _, green_z = green_identity_check(
        summary, f=lambda x: np.exp(-x),
        gf=lambda x: (2.0 / 3.0) * (-np.expm1(-x)))
    row = [replica, n, lam.estimate, lam.std_error, lam.ci_low, lam.ci_high,
           w1_pimin, summary.mean_interjump.estimate,
           summary.mean_interjump.std_error, summary.n_events,
           interjump_z, varpi_z, green_z]
    return row, summary


FV_HEADER = ["replica", "n_particles", "lambda_hat", "lambda_se", "lambda_ci_low",
             "lambda_ci_high", "w1_to_pimin", "mean_interjump", "interjump_se",
             "n_events", "interjump_z", "varpi_z", "green_z"]


def _run_fv_stationary(cfg: ExperimentConfig, replica: int) -> dict:
    n = cfg.n_particles[0]
    rng = replica_rng(cfg.seed, "fv-stationary", replica)
    row, summary = _fv_summary_rows(cfg, replica, n, rng)
    event_rows = [[replica, t] for t in summary.varpi_times]
    snap_rows = []
    for t, posvec in zip(summary.xi_times, summary.xi_positions):
        for p in posvec:
            snap_rows.append([replica, float(t), float(p)])
    return {
        "fv_summary.csv": (FV_HEADER, [row]),
        "fv_events.csv": (["replica", "time"], event_rows),
        "fv_snapshots.csv": (["replica", "time", "position"], snap_rows),
    }


def _run_fv_sweep(cfg: ExperimentConfig, replica: int) -> dict:
    rows = []
    for n in cfg.n_particles:
        rng = replica_rng(cfg.seed, f"fv-sweep-N{n}", replica)
        row, _ = _fv_summary_rows(cfg, replica, n, rng)
        rows.append(row)
    return {"fv_sweep.csv": (FV_HEADER, rows)}


def _run_green_check(cfg: ExperimentConfig, replica: int) -> dict:
    n = cfg.n_particles[0]
    rng = replica_rng(cfg.seed, "green-check", replica)
    sampler = initial_sampler(cfg.initial)
    summary = estimate_stationary(n, sampler, cfg.dt, cfg.horizon,
                                  cfg.burn_in, rng)
    rows = []
    for name, f, gf in [
        ("one", lambda x: np.ones_like(x), lambda x: x),
        ("exp_neg", lambda x: np.exp(-x), lambda x: (2.0 / 3.0) * (-np.expm1(-x))),
    ]:
        lhs, rhs, z = green_identity_check(summary, f=f, gf=gf)
        rows.append([replica, n, name, lhs, rhs, z])
    header = ["replica", "n_particles", "f", "lhs", "rhs", "z_score"]
    return {"green_check.csv": (header, rows)}


def _run_nbbm_speed(cfg: ExperimentConfig, replica: int) -> dict:
    speed_rows = []
    traj_rows = []
    for n in cfg.n_particles:
        rng = replica_rng(cfg.seed, f"nbbm-speed-N{n}", replica)
        state = nbbm.nbbm_init(n, initial_sampler(cfg.initial), rng)
        state, times, mins, medians = nbbm.nbbm_run(
            state, cfg.horizon, cfg.dt, rng, cfg.record_interval)
        res = nbbm.front_speed(times, mins, cfg.fit_window)
        speed_rows.append([replica, n, res.estimate, res.std_error,
                           state.branch_count])
        stride = max(len(times) // 500, 1)
        for t, mn, md in zip(times[::stride], mins[::stride], medians[::stride]):
            traj_rows.append([replica, n, float(t), float(mn), float(md)])
    return {
        "nbbm_speed.csv": (["replica", "n_particles", "speed", "speed_se",
                            "branch_count"], speed_rows),
        "nbbm_trajectory.csv": (["replica", "n_particles", "t", "min_pos",
                                 "median_pos"], traj_rows),
    }


def _run_nbbm_profile(cfg: ExperimentConfig, replica: int) -> dict:
    n = cfg.n_particles[0]
    rng = replica_rng(cfg.seed, "nbbm-profile", replica)
    state = nbbm.nbbm_init(n, initial_sampler(cfg.initial), rng)
    state, *_ = nbbm.nbbm_run(state, cfg.burn_in, cfg.dt, rng)
    snapshots = []
    seg = max((cfg.horizon - cfg.burn_in) / 50.0, cfg.dt)
    t = cfg.burn_in
    while t < cfg.horizon - 1e-9:
        state, *_ = nbbm.nbbm_run(state, seg, cfg.dt, rng)
        t += seg
        snapshots.append(state.positions.copy())
    profile = nbbm.pooled_centered_profile(snapshots)
    dist = w1(profile, nbbm.wave_profile(nbbm.C_MIN))
    prof_rows = [[replica, float(p), float(wt)]
                 for p, wt in zip(profile.points, profile.weights)]
    return {
        "nbbm_profile_summary.csv": (["replica", "n_particles", "w1_to_wave",
                                      "n_snapshots"],
                                     [[replica, n, dist, len(snapshots)]]),
        "nbbm_profile.csv": (["replica", "centered_position", "weight"],
                             prof_rows),
    }


RUNNERS = {
    "qsd-table": _run_qsd_table,
    "validate-kernel": _run_validate_kernel,
    "survival": _run_survival,
    "yaglom": _run_yaglom,
    "fv-stationary": _run_fv_stationary,
    "fv-sweep": _run_fv_sweep,
    "green-check": _run_green_check,
    "nbbm-speed": _run_nbbm_speed,
    "nbbm-profile": _run_nbbm_profile,
}


def _replica_job(args):
    cfg_dict, experiment, replica = args
    cfg = ExperimentConfig.from_dict(cfg_dict, experiment)
    return replica, RUNNERS[experiment](cfg, replica)


def run(cfg: ExperimentConfig) -> Path:
    """Execute the experiment; returns the output directory."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg.to_dict(), cfg.experiment, r) for r in range(cfg.replicas)]
    results = []
    workers = _max_workers(cfg.replicas)
    if workers > 1 and cfg.replicas > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replica_job, jobs))
    else:
        results = [_replica_job(j) for j in jobs]
    results.sort(key=lambda pair: pair[0])
    merged: dict[str, tuple[list, list]] = {}
    for _, tables in results:
        for name, (header, rows) in tables.items():
            if name not in merged:
                merged[name] = (header, [])
            merged[name][1].extend(rows)
    schemas = {}
    for name, (header, rows) in merged.items():
        write_csv(out / name, header, rows)
        schemas[name] = header
    manifest = {
        "tool": "fvselect",
        "version": TOOL_VERSION,
        "config": cfg.to_dict(),
        "replica_seed_rule": "SeedSequence(seed, spawn_key=(crc32(tag), replica))",
        "csv_schemas": schemas,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


# ---------------------------------------------------------------------------
# verification

def _read_csv(path: Path) -> tuple[list[str], list[dict]]:
    with open(path) as fh:
        reader = csv.DictReader(fh)
        return list(reader.fieldnames or []), list(reader)


def _iota(n: int) -> float:
    return -n * math.log(1.0 - 1.0 / n)


def verify(run_dir) -> dict:
    """Re-evaluate the acceptance predicates bound to a run directory."""
    run_dir = Path(run_dir)
    manifest_path = run_dir / "manifest.json"
    report = {"run_dir": str(run_dir), "checks": [], "passed": True,
              "missing_files": []}

    def check(name, ok, detail=""):
        report["checks"].append({"name": name, "passed": bool(ok),
                                 "detail": detail})
        if not ok:
            report["passed"] = False

    if not manifest_path.exists():
        report["missing_files"].append("manifest.json")
        report["passed"] = False
        return report
    manifest = json.loads(manifest_path.read_text())
    experiment = manifest["config"]["experiment"]
    for name in manifest["csv_schemas"]:
        if not (run_dir / name).exists():
            report["missing_files"].append(name)
    if report["missing_files"]:
        report["passed"] = False
        return report

    if experiment in ("fv-sweep", "fv-stationary"):
        name = "fv_sweep.csv" if experiment == "fv-sweep" else "fv_summary.csv"
        _, rows = _read_csv(run_dir / name)
        by_n = {}
        for r in rows:
            by_n.setdefault(int(r["n_particles"]), []).append(r)
        ns = sorted(by_n)
        lam, se, w1s = {}, {}, {}
        for n in ns:
            lam[n] = float(np.mean([float(r["lambda_hat"]) for r in by_n[n]]))
            se[n] = float(np.mean([float(r["lambda_se"]) for r in by_n[n]]))
            w1s[n] = float(np.mean([float(r["w1_to_pimin"]) for r in by_n[n]]))
        for n in ns:
            bound = 0.5 / _iota(n) - 3 * se[n]
            check(f"rate_lower_bound_N{n}", lam[n] >= bound,
                  f"lambda_hat={lam[n]:.5f} bound={bound:.5f}")
        for a, b in zip(ns, ns[1:]):
            gap = 3 * math.hypot(se[a], se[b])
            check(f"lambda_monotone_{a}_to_{b}",
                  abs(lam[b] - 0.5) <= abs(lam[a] - 0.5) + gap,
                  f"{lam[a]:.5f} -> {lam[b]:.5f}")
            check(f"w1_decreasing_{a}_to_{b}", w1s[b] <= w1s[a] + 0.01,
                  f"{w1s[a]:.4f} -> {w1s[b]:.4f}")
        n_top = ns[-1]
        if n_top >= 200:
            check("lambda_near_half_at_N200", abs(lam[n_top] - 0.5) < 0.05,
                  f"lambda_hat={lam[n_top]:.5f}")
            check("w1_small_at_N200", w1s[n_top] < 0.1, f"w1={w1s[n_top]:.4f}")
        for r in rows:
            for col in ("interjump_z", "varpi_z", "green_z"):
                check(f"identity_{col}_N{r['n_particles']}_r{r['replica']}",
                      abs(float(r[col])) <= 3, f"z={float(r[col]):.3f}")
    elif experiment == "yaglom":
        _, rows = _read_csv(run_dir / "yaglom.csv")
        dists = [float(r["w1_to_pimin"]) for r in rows]
        initial = manifest["config"]["initial"]
        if "point" in initial:
            check("yaglom_w1_decreasing",
                  all(b < a for a, b in zip(dists, dists[1:])),
                  f"dists={dists}")
            check("yaglom_w1_final", dists[-1] < 0.05, f"final={dists[-1]:.4f}")
        elif "qsd" in initial and float(initial["qsd"]) < 0.5:
            winit = [float(r["w1_to_initial"]) for r in rows]
            check("qsd_fixed_point", max(winit) < 0.02, f"max={max(winit):.4f}")
            check("away_from_pimin", min(dists) > 0.1, f"min={min(dists):.4f}")
    elif experiment == "nbbm-speed":
        _, rows = _read_csv(run_dir / "nbbm_speed.csv")
        by_n = {}
        for r in rows:
            by_n.setdefault(int(r["n_particles"]), []).append(r)
        ns = sorted(by_n)
        sp = {n: float(np.mean([float(r["speed"]) for r in by_n[n]])) for n in ns}
        sse = {n: float(np.mean([float(r["speed_se"]) for r in by_n[n]]))
               for n in ns}
        for a, b in zip(ns, ns[1:]):
            check(f"speed_monotone_{a}_to_{b}",
                  sp[b] >= sp[a] - 3 * math.hypot(sse[a], sse[b]),
                  f"{sp[a]:.4f} -> {sp[b]:.4f}")
        for n in ns:
            check(f"speed_below_cmin_N{n}", sp[n] < nbbm.C_MIN + 3 * sse[n],
                  f"speed={sp[n]:.4f}")
        check("speed_above_one_at_top", sp[ns[-1]] > 1.0, f"{sp[ns[-1]]:.4f}")
    elif experiment == "nbbm-profile":
        _, rows = _read_csv(run_dir / "nbbm_profile_summary.csv")
        for r in rows:
            check(f"profile_w1_r{r['replica']}", float(r["w1_to_wave"]) < 0.15,
                  f"w1={float(r['w1_to_wave']):.4f}")
    elif experiment == "validate-kernel":
        _, rows = _read_csv(run_dir / "kernel_checks.csv")
        for r in rows:
            check(f"{r['check']}_r{r['replica']}", r["passed"] == "1",
                  f"value={r['value']} expected={r['expected']}")
    elif experiment == "green-check":
        _, rows = _read_csv(run_dir / "green_check.csv")
        for r in rows:
            check(f"green_{r['f']}_r{r['replica']}",
                  abs(float(r["z_score"])) <= 3, f"z={float(r['z_score']):.3f}")
    elif experiment == "qsd-table":
        _, rows = _read_csv(run_dir / "qsd_table.csv")
        for r in rows:
            lam = float(r["lambda"])
            beta = float(r["beta"])
            check(f"qsd_mean_lam{lam}",
                  abs(float(r["sample_mean"]) - 1.0 / lam) < 0.05,
                  f"sample_mean={r['sample_mean']}")
            check(f"qsd_tail_lam{lam}",
                  abs(float(r["tail_rate"]) + (1.0 - beta)) < 0.15,
                  f"tail_rate={r['tail_rate']}")
    elif experiment == "survival":
        _, rows = _read_csv(run_dir / "survival.csv")
        check("survival_in_unit_interval",
              all(0.0 <= float(r["survival"]) <= 1.0 for r in rows))
    with open(run_dir / "verify.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fvselect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None,
                       help="JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
    pv = sub.add_parser("verify")
    pv.add_argument("run_dir", type=str)
    args = parser.parse_args(argv)

    if args.command == "verify":
        report = verify(args.run_dir)
        for c in report["checks"]:
            print(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['name']} {c['detail']}")
        for m in report["missing_files"]:
            print(f"[FAIL] missing file: {m}")
        print("OVERALL:", "PASS" if report["passed"] else "FAIL")
        return 0 if report["passed"] else 1

    raw = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {args.config}: {exc}",
                  file=sys.stderr)
            return 2
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["output_dir"] = args.out
    try:
        cfg = ExperimentConfig.from_dict(raw, args.command)
        out = run(cfg)
    except (ConfigError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
