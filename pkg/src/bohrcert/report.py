"""Run reports: delimited tables and rendered figures for a pipeline run.

CSV carries both the exact rational strings and float renderings; the
floats are display-only. Figures are drawn with the Agg backend so report
generation works headless.
"""

from __future__ import annotations

import csv
import os
from fractions import Fraction

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .pipeline import PipelineRun, emit_report


def write_stage_csv(run: PipelineRun, path: str) -> str:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([
            "k", "size", "witness_N", "density", "density_float",
            "prime", "tower_d", "epsilon", "eta_float", "rho_float",
            "mode", "chain_delta_float", "worst_margin_upper", "threshold",
        ])
        for rec in run.stages:
            spec = rec.tower.spec if rec.tower else None
            worst = max((r.upper for _, r in rec.margins), default=Fraction(0))
            w.writerow([
                rec.k, len(rec.S), rec.witness.N,
                str(rec.witness.density), f"{float(rec.witness.density):.6f}",
                spec.p if spec else "", spec.d if spec else "",
                str(spec.epsilon) if spec else "",
                f"{float(spec.eta):.3e}" if spec else "",
                f"{float(spec.rho):.3e}" if spec else "",
                spec.mode if spec else "",
                f"{float(rec.chain_delta):.6f}" if rec.chain_delta is not None else "",
                str(worst), str(rec.threshold),
            ])
    return path


def write_margin_csv(run: PipelineRun, path: str) -> str:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "m", "lower", "upper", "lower_float", "upper_float", "stopped"])
        for rec in run.stages:
            for m, r in rec.margins:
                w.writerow([
                    rec.k, m, str(r.lower), str(r.upper),
                    f"{float(r.lower):.6f}", f"{float(r.upper):.6f}", r.stopped,
                ])
    return path


def render_margin_figure(run: PipelineRun, path: str) -> str:
    fig, ax = plt.subplots(figsize=(7, 4))
    ticks, labels = [], []
    x = 0
    for rec in run.stages:
        ms = [m for m, _ in rec.margins]
        uppers = [float(r.upper) for _, r in rec.margins]
        lowers = [float(r.lower) for _, r in rec.margins]
        xs = list(range(x, x + len(ms)))
        ax.bar(xs, uppers, color="#3b6fb6", alpha=0.7, label=f"stage {rec.k} upper" if x == 0 else None)
        ax.plot(xs, lowers, "k.", markersize=4)
        ax.hlines(float(rec.threshold), xs[0] - 0.4, xs[-1] + 0.4,
                  colors="#c85a4e", linestyles="dashed")
        ticks.extend(xs)
        labels.extend(f"k{rec.k} m={m}" for m in ms)
        x += len(ms) + 1
    ax.set_xticks(ticks)
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("translate margin")
    ax.set_title("margin enclosures per translate (dashed: stage threshold)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_density_figure(run: PipelineRun, path: str) -> str:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ks = [rec.k for rec in run.stages]
    dens = [float(rec.witness.density) for rec in run.stages]
    ax.plot(ks, dens, "o-", color="#3b6fb6", label="stage witness density")
    ax.axhline(float(run.config.delta_prime), color="#c85a4e",
               linestyle="--", label="delta'")
    ax.axhline(float(run.config.delta), color="#56904f",
               linestyle=":", label="delta")
    ax.set_xticks(ks)
    ax.set_xlabel("stage")
    ax.set_ylabel("density")
    ax.set_ylim(0, 0.6)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_report(run: PipelineRun, outdir: str) -> dict[str, str]:
    """All report artifacts into outdir; returns the paths by name."""
    os.makedirs(outdir, exist_ok=True)
    _, text = emit_report(run.stages, run.selection, run.config)
    paths = {
        "stages_csv": write_stage_csv(run, os.path.join(outdir, "stages.csv")),
        "margins_csv": write_margin_csv(run, os.path.join(outdir, "margins.csv")),
        "margins_png": render_margin_figure(run, os.path.join(outdir, "margins.png")),
        "densities_png": render_density_figure(run, os.path.join(outdir, "densities.png")),
    }
    table = os.path.join(outdir, "report.txt")
    with open(table, "w") as fh:
        fh.write(text)
    paths["table"] = table
    return paths
