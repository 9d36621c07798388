"""CSV -> figure rendering for fvselect run directories."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIG_KW = {"figsize": (6.0, 4.0), "dpi": 120}


class SchemaMismatchError(ValueError):
    def __init__(self, name: str, missing: list[str], found: list[str]):
        super().__init__(
            f"{name}: missing columns {sorted(missing)}; found {found}")
        self.missing = missing


class EmptyDataError(ValueError):
    pass


# required columns per CSV this tool knows how to plot
SCHEMAS = {
    "fv_sweep.csv": ["n_particles", "lambda_hat", "lambda_se", "w1_to_pimin"],
    "fv_summary.csv": ["n_particles", "lambda_hat", "lambda_se", "w1_to_pimin"],
    "qsd_table.csv": ["lambda", "beta", "norm_const"],
    "yaglom.csv": ["t", "w1_to_pimin", "w1_to_initial"],
    "nbbm_speed.csv": ["n_particles", "speed", "speed_se"],
}


def read_table(path: Path) -> dict[str, np.ndarray]:
    """Load a CSV as float columns, validating against the known schema."""
    with open(path) as fh:
        reader = csv.DictReader(fh)
        found = list(reader.fieldnames or [])
        rows = list(reader)
    required = SCHEMAS[path.name]
    missing = [c for c in required if c not in found]
    if missing:
        raise SchemaMismatchError(path.name, missing, found)
    if not rows:
        raise EmptyDataError(f"{path.name} has a header but no data rows")
    out = {}
    for c in required:
        out[c] = np.array([float(r[c]) for r in rows])
    return out


def _group_mean(keys: np.ndarray, *values: np.ndarray):
    uniq = np.unique(keys)
    outs = [np.array([v[keys == k].mean() for k in uniq]) for v in values]
    return (uniq, *outs)


def plot_lambda_vs_n(table, out_path: Path) -> None:
    n, lam, se = _group_mean(table["n_particles"], table["lambda_hat"],
                             table["lambda_se"])
    fig, ax = plt.subplots(**FIG_KW)
    ax.errorbar(n, lam, yerr=3 * se, fmt="o-", capsize=3, label="estimate")
    ax.axhline(0.5, color="k", ls="--", lw=1, label="limit 1/2")
    grid = np.linspace(n.min(), n.max(), 200)
    bound = 0.5 / (-grid * np.log1p(-1.0 / grid))
    ax.plot(grid, bound, color="gray", ls=":", label="lower bound")
    ax.set_xscale("log")
    ax.set_xlabel("number of particles N")
    ax.set_ylabel("long-run jump rate per particle")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def plot_w1_vs_n(table, out_path: Path) -> None:
    n, d = _group_mean(table["n_particles"], table["w1_to_pimin"])
    fig, ax = plt.subplots(**FIG_KW)
    ax.plot(n, d, "o-")
    ax.set_xscale("log")
    ax.set_xlabel("number of particles N")
    ax.set_ylabel("W1 to the minimal stationary profile")
    ax.set_ylim(bottom=0.0)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def _density(lam: float, beta: float, norm: float, x: np.ndarray) -> np.ndarray:
    if beta == 0.0:
        return norm * x * np.exp(-x)
    return 0.5 * norm * (np.exp(-(1 - beta) * x) - np.exp(-(1 + beta) * x))


def plot_qsd_densities(table, out_path: Path) -> None:
    x = np.linspace(0.0, 12.0, 600)
    fig, ax = plt.subplots(**FIG_KW)
    for lam, beta, norm in sorted(zip(table["lambda"], table["beta"],
                                      table["norm_const"])):
        ax.plot(x, _density(lam, beta, norm, x),
                label=f"eigenvalue {lam:g}")
    ax.set_xlabel("position")
    ax.set_ylabel("density")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def plot_yaglom(table, out_path: Path) -> None:
    t, to_min, to_init = _group_mean(table["t"], table["w1_to_pimin"],
                                     table["w1_to_initial"])
    fig, ax = plt.subplots(**FIG_KW)
    ax.plot(t, to_min, "o-", label="to the minimal profile")
    if not np.all(np.isnan(to_init)):
        ax.plot(t, to_init, "s--", label="to the initial law")
    ax.set_xlabel("time")
    ax.set_ylabel("W1 distance of the conditioned law")
    ax.set_ylim(bottom=0.0)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def plot_speed_vs_n(table, out_path: Path) -> None:
    n, sp, se = _group_mean(table["n_particles"], table["speed"],
                            table["speed_se"])
    fig, ax = plt.subplots(**FIG_KW)
    ax.errorbar(n, sp, yerr=3 * se, fmt="o-", capsize=3, label="front speed")
    ax.axhline(math.sqrt(2.0), color="k", ls="--", lw=1, label="limit sqrt(2)")
    ax.set_xscale("log")
    ax.set_xlabel("number of particles N")
    ax.set_ylabel("front speed")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


PANELS = {
    "fv_sweep.csv": [("lambda_vs_n.png", plot_lambda_vs_n),
                     ("w1_vs_n.png", plot_w1_vs_n)],
    "fv_summary.csv": [("lambda_vs_n.png", plot_lambda_vs_n)],
    "qsd_table.csv": [("qsd_densities.png", plot_qsd_densities)],
    "yaglom.csv": [("yaglom_convergence.png", plot_yaglom)],
    "nbbm_speed.csv": [("speed_vs_n.png", plot_speed_vs_n)],
}


def render_run(run_dir, out_dir) -> list[Path]:
    """Render every panel supported by the CSVs present; returns the files."""
    run_dir = Path(run_dir)
    out_dir = Path(out_dir)
    manifest = run_dir / "manifest.json"
    if not manifest.exists():
        raise FileNotFoundError(f"{manifest} not found: not a run directory")
    json.loads(manifest.read_text())  # must at least be valid JSON
    sources = [p for p in sorted(run_dir.glob("*.csv")) if p.name in PANELS]
    if not sources:
        raise EmptyDataError(
            f"no plottable CSVs in {run_dir}; know about {sorted(PANELS)}")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for src in sources:
        table = read_table(src)
        for out_name, fn in PANELS[src.name]:
            path = out_dir / out_name
            fn(table, path)
            written.append(path)
    return written
