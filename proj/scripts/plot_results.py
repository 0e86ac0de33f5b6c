#!/usr/bin/env python3
"""Render figures from habcov run directories.

Reads the CSV artifacts only; no simulation is run here.

  plot_results.py curve RUN_DIR [...]       learning curves (curve.csv)
  plot_results.py scatter DIR_A DIR_B       metric scatter plots (metrics.csv)
  plot_results.py heatmap HEATMAP_FILE      render a saved heatmap grid

Figures land next to the inputs as PNG files.
"""

import argparse
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def plot_curves(run_dirs):
    fields = [
        ("mean_reward", "Mean reward"),
        ("mean_group_twr", "Mean group TWR"),
        ("mean_separation_ratio", "Mean separation ratio"),
    ]
    fig, axes = plt.subplots(len(fields), 1, figsize=(7, 9), sharex=True)
    for run in run_dirs:
        rows = read_csv(os.path.join(run, "curve.csv"))
        steps = [int(r["step"]) for r in rows]
        for ax, (field, label) in zip(axes, fields):
            ax.plot(steps, [float(r[field]) for r in rows], label=os.path.basename(run.rstrip("/")))
            ax.set_ylabel(label)
            ax.grid(True, alpha=0.3)
    axes[-1].set_xlabel("environment steps")
    axes[0].legend()
    out = os.path.join(run_dirs[0], "learning_curves.png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(out)


def plot_scatter(dir_a, dir_b):
    label_a = os.path.basename(dir_a.rstrip("/"))
    label_b = os.path.basename(dir_b.rstrip("/"))
    rows_a = read_csv(os.path.join(dir_a, "metrics.csv"))
    rows_b = read_csv(os.path.join(dir_b, "metrics.csv"))
    pairs = [
        ("mean_separation_ratio", "Mean normalized separation ratio"),
        ("percent_area_coverage", "Percent area coverage"),
        ("mean_area_per_agent", "Mean area coverage per agent"),
        ("mean_coverage_over_time", "Mean coverage over time"),
    ]
    fig, axes = plt.subplots(2, 2, figsize=(10, 9))
    for ax, (field, label) in zip(axes.flat, pairs):
        for rows, name, marker in ((rows_a, label_a, "o"), (rows_b, label_b, "^")):
            ax.scatter(
                [float(r["mean_group_twr"]) for r in rows],
                [float(r[field]) for r in rows],
                s=18,
                alpha=0.7,
                marker=marker,
                label=name,
            )
        ax.set_xlabel("Mean group TWR")
        ax.set_ylabel(label)
        ax.set_xlim(0, 1.02)
        ax.grid(True, alpha=0.3)
    axes.flat[0].legend()
    out = os.path.join(dir_a, f"scatter_vs_{label_b}.png")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(out)


def plot_heatmap(path):
    with open(path) as f:
        magic = f.readline().strip()
        if magic != "habcov-heatmap v1":
            sys.exit(f"{path}: not a habcov heatmap")
        header = f.readline().split()
        width, height = int(header[1]), int(header[3])
        cell = float(header[5])
        origin = float(header[7])
        grid = [[int(v) for v in f.readline().split()] for _ in range(height)]
    extent = [origin, origin + width * cell, origin, origin + height * cell]
    fig, ax = plt.subplots(figsize=(7, 6))
    im = ax.imshow(grid, origin="lower", extent=extent, cmap="inferno")
    fig.colorbar(im, ax=ax, label="visits (capped)")
    ax.set_xlabel("x (km)")
    ax.set_ylabel("y (km)")
    out = os.path.splitext(path)[0] + ".png"
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(out)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)
    c = sub.add_parser("curve")
    c.add_argument("run_dirs", nargs="+")
    s = sub.add_parser("scatter")
    s.add_argument("dir_a")
    s.add_argument("dir_b")
    h = sub.add_parser("heatmap")
    h.add_argument("file")
    args = parser.parse_args()
    if args.cmd == "curve":
        plot_curves(args.run_dirs)
    elif args.cmd == "scatter":
        plot_scatter(args.dir_a, args.dir_b)
    else:
        plot_heatmap(args.file)


if __name__ == "__main__":
    main()
