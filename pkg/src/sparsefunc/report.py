"""Report rendering: runs a small standard experiment battery and writes the
CSV outputs together with matplotlib figures.

This is the only module that touches matplotlib; the data-emitting CLI
subcommands stay plot-free.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .estimators import NoiseModel, Variant
from .harness import ExperimentConfig, risk_sweep
from .model import SparsityClass
from .rates import Functional
from .testing import chebyshev_risk_bound

DEFAULT_A_GRID = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0]


def default_sweep_grid(seed: int, reps: int) -> list[ExperimentConfig]:
    """A compact grid: linear and l2-norm functionals across dimensions."""
    grid = []
    for d in (64, 256):
        for s in (1, max(1, int(d**0.25)), max(1, int(d**0.5))):
            for functional in (Functional.LINEAR, Functional.L2_NORM):
                grid.append(
                    ExperimentConfig(
                        functional=functional,
                        class_name="b0",
                        d=d,
                        s=s,
                        sigma=1.0,
                        n_reps=reps,
                        seed=seed,
                        noise=NoiseModel.KNOWN,
                        variant=Variant.EXACT_RATE,
                    )
                )
    return grid


def render_risk_figure(rows: list[dict], path: str):
    """Max risk/rate ratio per config, grouped by functional, versus (d, s)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    markers = {"L": "o", "Q": "s", "sqrtQ": "^"}
    seen: dict[str, tuple[list, list]] = {}
    for row in rows:
        label = row["functional"]
        xs, ys = seen.setdefault(label, ([], []))
        xs.append(f"d={row['d']},s={row['s']}")
        ys.append(float(row["config_max_ratio"]))
    for label, (xs, ys) in seen.items():
        ax.plot(xs, ys, marker=markers.get(label, "o"), linestyle="--", label=label)
    ax.set_yscale("log")
    ax.set_ylabel("max MSE / rate over witnesses")
    ax.set_xlabel("configuration")
    ax.tick_params(axis="x", rotation=45)
    ax.legend(title="functional")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_power_figure(rows: list[dict], c_star: float, path: str):
    """Total testing risk versus A, with the Chebyshev envelope."""
    a_values = [float(r["A"]) for r in rows]
    totals = [float(r["total"]) for r in rows]
    errs = [float(r["stderr_total"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.errorbar(a_values, totals, yerr=errs, marker="o", label="empirical total risk")
    envelope = [chebyshev_risk_bound(a, c_star) for a in a_values]
    ax.plot(a_values, envelope, linestyle=":", label=f"min(1, {c_star:.2g}/A^2)")
    ax.set_xscale("log")
    ax.set_xlabel("separation multiplier A")
    ax.set_ylabel("type I + max type II error")
    ax.set_ylim(-0.05, 1.1)
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report(out_dir: str, seed: int, reps: int, c_star: float) -> list[str]:
    """Run the default battery; write CSVs and figures side by side."""
    from .cli import POWER_COLUMNS, power_curve_rows  # deferred: cli imports this module lazily

    os.makedirs(out_dir, exist_ok=True)
    paths = []

    sweep = risk_sweep(default_sweep_grid(seed, reps))
    sweep_csv = os.path.join(out_dir, "risk_sweep.csv")
    sweep.write_csv(sweep_csv)
    paths.append(sweep_csv)
    risk_png = os.path.join(out_dir, "risk_ratios.png")
    render_risk_figure(sweep.rows, risk_png)
    paths.append(risk_png)

    alternative = SparsityClass.theta_qu(0.0, 8, delta=1.0)
    rows = power_curve_rows(alternative, d=256, sigma=1.0, a_grid=DEFAULT_A_GRID, reps=reps, seed=seed)
    power_csv = os.path.join(out_dir, "test_power.csv")
    with open(power_csv, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=POWER_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    paths.append(power_csv)
    power_png = os.path.join(out_dir, "power_curve.png")
    render_power_figure(rows, c_star, power_png)
    paths.append(power_png)
    return paths
