import json
import subprocess
import sys

import pytest

from fvplots import EmptyDataError, SchemaMismatchError, render_run


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def make_run(root):
    """A small run directory covering every CSV this tool knows about."""
    root.mkdir(exist_ok=True)
    (root / "manifest.json").write_text(json.dumps({"experiment": "fv-sweep"}))
    fv_header = ["replica", "n_particles", "lambda_hat", "lambda_se",
                 "lambda_ci_low", "lambda_ci_high", "w1_to_pimin",
                 "mean_interjump", "interjump_se", "n_events",
                 "interjump_z", "varpi_z", "green_z"]
    write_csv(root / "fv_sweep.csv", fv_header, [
        [0, 20, 0.71, 0.02, 0.67, 0.75, 0.51, 0.0704, 0.002, 2841, 0.3, 0.5, -0.2],
        [0, 50, 0.63, 0.015, 0.60, 0.66, 0.38, 0.0317, 0.001, 6301, -0.1, 0.4, 0.1],
        [1, 20, 0.70, 0.02, 0.66, 0.74, 0.52, 0.0714, 0.002, 2803, 0.1, -0.3, 0.6],
        [1, 50, 0.64, 0.015, 0.61, 0.67, 0.37, 0.0312, 0.001, 6402, 0.2, 0.2, -0.4],
    ])
    write_csv(root / "qsd_table.csv",
              ["replica", "lambda", "beta", "norm_const", "mean"], [
                  [0, 0.5, 0.0, 1.0, 2.0],
                  [0, 0.375, 0.5, 1.5, 8.0 / 3.0],
              ])
    write_csv(root / "yaglom.csv",
              ["replica", "t", "survivors", "log_survival", "decay_rate",
               "w1_to_pimin", "w1_to_initial"], [
                  [0, 2.0, 1145245, -2.167, -1.084, 0.813, "nan"],
                  [0, 5.0, 98847, -4.617, -0.923, 0.550, "nan"],
                  [0, 10.0, 3504, -7.957, -0.796, 0.368, "nan"],
              ])
    write_csv(root / "nbbm_speed.csv",
              ["replica", "n_particles", "speed", "speed_se"], [
                  [0, 50, 1.21, 0.01],
                  [0, 200, 1.28, 0.008],
              ])
    return root


def test_renders_every_known_panel(tmp_path):
    run = make_run(tmp_path / "run")
    out = tmp_path / "figs"
    written = render_run(run, out)
    names = sorted(p.name for p in written)
    assert names == ["lambda_vs_n.png", "qsd_densities.png", "speed_vs_n.png",
                     "w1_vs_n.png", "yaglom_convergence.png"]
    for p in written:
        assert p.exists() and p.stat().st_size > 1000
        assert p.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_rendering_is_byte_stable(tmp_path):
    run = make_run(tmp_path / "run")
    first = render_run(run, tmp_path / "a")
    second = render_run(run, tmp_path / "b")
    for pa, pb in zip(first, second):
        assert pa.read_bytes() == pb.read_bytes(), pa.name


def test_missing_column_reports_the_column(tmp_path):
    run = make_run(tmp_path / "run")
    text = (run / "fv_sweep.csv").read_text()
    (run / "fv_sweep.csv").write_text(
        text.replace("lambda_hat", "lambda_estimate"))
    with pytest.raises(SchemaMismatchError) as exc:
        render_run(run, tmp_path / "figs")
    assert "lambda_hat" in str(exc.value)
    assert exc.value.missing == ["lambda_hat"]


def test_header_only_csv_is_rejected(tmp_path):
    run = make_run(tmp_path / "run")
    header = (run / "yaglom.csv").read_text().splitlines()[0]
    (run / "yaglom.csv").write_text(header + "\n")
    with pytest.raises(EmptyDataError):
        render_run(run, tmp_path / "figs")
    # no blank yaglom image may be left behind
    assert not (tmp_path / "figs" / "yaglom_convergence.png").exists()


def test_directory_without_manifest_is_rejected(tmp_path):
    (tmp_path / "stuff").mkdir()
    with pytest.raises(FileNotFoundError):
        render_run(tmp_path / "stuff", tmp_path / "figs")


def test_run_with_no_plottable_csv_is_rejected(tmp_path):
    run = tmp_path / "run"
    run.mkdir()
    (run / "manifest.json").write_text("{}")
    with pytest.raises(EmptyDataError):
        render_run(run, tmp_path / "figs")


def test_command_line_entry_point(tmp_path):
    run = make_run(tmp_path / "run")
    out = tmp_path / "figs"
    proc = subprocess.run(
        [sys.executable, "-m", "fvplots", "--run-dir", str(run),
         "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "lambda_vs_n.png" in proc.stdout
    assert (out / "lambda_vs_n.png").exists()


def test_command_line_reports_errors(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "fvplots", "--run-dir", str(tmp_path),
         "--out", str(tmp_path / "figs")], capture_output=True, text=True)
    assert proc.returncode == 2
    assert "error:" in proc.stderr


def test_renders_a_real_run_directory(tmp_path):
    """End-to-end against the producing CLI, consuming only its CSV output."""
    run = tmp_path / "run"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lambdas": [0.125, 0.25, 0.375, 0.5],
                               "n_samples": 10_000, "seed": 7, "replicas": 1}))
    proc = subprocess.run(
        [sys.executable, "-m", "fvselect.cli", "qsd-table",
         "--config", str(cfg), "--out", str(run)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    written = render_run(run, tmp_path / "figs")
    assert [p.name for p in written] == ["qsd_densities.png"]
