"""Matplotlib renderings of the report figures.

These PNG companions to the deterministic SVGs are what the report
path drops next to the delimited output: the projection scatter, the
residual heatmap and the silhouette-by-k selection curve.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .pipeline import AlignmentReport
from .svgfig import PALETTE
from .zones import ZONE_ORDER

_MPL_MARKERS = ("o", "s", "D", "^", "v", "P", "X", "*")
_ZONE_MARKER = {zone.value: _MPL_MARKERS[i] for i, zone in enumerate(ZONE_ORDER)}
_SAVE_KWARGS = {"dpi": 130, "metadata": {"Software": None}}


def scatter_png(report: AlignmentReport, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7.2, 5.4))
    for row in report.rows:
        marker = _ZONE_MARKER.get(row.zone, "o")
        ax.scatter(
            row.x, row.y,
            c=PALETTE[row.cluster % len(PALETTE)],
            marker=marker, s=70, edgecolors="#333333", linewidths=0.6, zorder=3,
        )
        ax.annotate(row.country, (row.x, row.y), fontsize=7,
                    xytext=(4, 4), textcoords="offset points")
    handles = [
        plt.Line2D([], [], linestyle="", marker="o",
                   color=PALETTE[k % len(PALETTE)], label=f"cluster {k}")
        for k in sorted({r.cluster for r in report.rows})
    ]
    handles += [
        plt.Line2D([], [], linestyle="", marker=_ZONE_MARKER[z], color="#999999", label=z)
        for z in report.association.col_labels
    ]
    ax.legend(handles=handles, loc="center left", bbox_to_anchor=(1.01, 0.5), fontsize=8)
    ax.set_xlabel("t-SNE x")
    ax.set_ylabel("t-SNE y")
    ax.set_title("Country music profiles, clustered and shaped by zone")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def residual_heatmap_png(report: AlignmentReport, path: Path) -> None:
    assoc = report.association
    residuals = np.array(assoc.residuals)
    threshold = report.params["residual_threshold"]
    vmax = max(float(np.abs(residuals).max()), threshold)
    fig, ax = plt.subplots(figsize=(1.1 + 0.95 * len(assoc.col_labels), 1.0 + 0.6 * len(assoc.row_labels)))
    image = ax.imshow(residuals, cmap="RdBu_r", vmin=-vmax, vmax=vmax)
    ax.set_xticks(range(len(assoc.col_labels)), assoc.col_labels, rotation=35, ha="right", fontsize=8)
    ax.set_yticks(range(len(assoc.row_labels)), [f"cluster {k}" for k in assoc.row_labels], fontsize=8)
    for i in range(residuals.shape[0]):
        for j in range(residuals.shape[1]):
            value = residuals[i, j]
            color = "white" if abs(value) > 0.62 * vmax else "black"
            ax.text(j, i, f"{value:.2f}", ha="center", va="center", fontsize=7, color=color)
            if abs(value) > threshold:
                ax.add_patch(plt.Rectangle((j - 0.5, i - 0.5), 1, 1,
                                           fill=False, edgecolor="black", linewidth=1.6))
    fig.colorbar(image, ax=ax, label="standardized residual")
    ax.set_title("Cluster vs zone residuals")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def silhouette_curve_png(report: AlignmentReport, path: Path) -> None:
    ks = [s.k for s in report.sweep]
    scores = [s.mean_silhouette for s in report.sweep]
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    ax.plot(ks, scores, marker="o", color=PALETTE[0])
    ax.axvline(report.selected_k, color="#999999", linestyle="--", linewidth=1)
    ax.set_xlabel("k")
    ax.set_ylabel("mean silhouette")
    ax.set_title(f"Silhouette sweep (selected k = {report.selected_k})")
    ax.set_xticks(ks)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def render_report_figures(report: AlignmentReport, outdir: Path) -> list[Path]:
    outdir = Path(outdir)
    written = []
    for name, renderer in (
        ("scatter.png", scatter_png),
        ("residuals.png", residual_heatmap_png),
        ("silhouette.png", silhouette_curve_png),
    ):
        target = outdir / name
        renderer(report, target)
        written.append(target)
    return written
