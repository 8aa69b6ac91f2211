"""Render figures and a pivoted summary from a simulation results table."""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _series_label(row: dict) -> str:
    if row["estimator"] == "winsorized":
        return f"winsorized/{row['policy']} C={row['C']} eta={row['eta']}"
    return "clipped"


def load_rows(path) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        rows = list(csv.DictReader(handle))
    for row in rows:
        row["_label"] = _series_label(row)
    return rows


def _group(rows, *fields):
    keys = sorted({tuple(r[f] for f in fields) for r in rows})
    for key in keys:
        yield key, [r for r in rows if tuple(r[f] for f in fields) == key]


def render_report(results_csv, outdir) -> dict:
    """Write one MSE figure and one noise-variance figure per population,
    plus a pivoted summary CSV, into `outdir`. Returns the written paths."""
    rows = load_rows(results_csv)
    if not rows:
        raise ValueError("results file has no rows")
    os.makedirs(outdir, exist_ok=True)
    figures = []
    for metric, stem in (("mse", "mse"), ("noise_var", "noise_var")):
        for (population,), pop_rows in _group(rows, "population"):
            budgets = sorted({r["rho"] for r in pop_rows})
            fig, axes = plt.subplots(
                1,
                len(budgets),
                figsize=(4.0 * len(budgets), 3.2),
                squeeze=False,
                sharey=True,
            )
            for ax, ((rho,), rho_rows) in zip(axes[0], _group(pop_rows, "rho")):
                for (label,), series in _group(rho_rows, "_label"):
                    pts = sorted(
                        (int(r["n"]), float(r[metric]))
                        for r in series
                        if r[metric] not in ("", "nan")
                    )
                    if not pts:
                        continue
                    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
                ax.set_xscale("log")
                ax.set_yscale("log")
                ax.set_xlabel("n")
                ax.set_title(f"{population}, budget {rho}")
                ax.grid(True, which="both", alpha=0.3)
            axes[0][0].set_ylabel(metric)
            axes[0][-1].legend(fontsize=7)
            fig.tight_layout()
            path = os.path.join(outdir, f"{stem}_{population}.png")
            fig.savefig(path, dpi=120)
            plt.close(fig)
            figures.append(path)

    summary_path = os.path.join(outdir, "summary.csv")
    labels = sorted({r["_label"] for r in rows})
    with open(summary_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["population", "rho", "n"] + [f"mse[{label}]" for label in labels])
        for (population, rho, n), cell_rows in _group(rows, "population", "rho", "n"):
            by_label = {r["_label"]: r["mse"] for r in cell_rows}
            writer.writerow(
                [population, rho, n] + [by_label.get(label, "") for label in labels]
            )
    return {"figures": figures, "summary": summary_path}
