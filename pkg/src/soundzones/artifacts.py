"""On-disk artifact formats for the staged CLI.

All writers are deterministic: floats are serialized with ``repr`` (so
they round-trip exactly), keys are sorted, and nothing embeds a
timestamp or an absolute path.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .charts import TrackSelection
from .cluster import ClusteringResult
from .embeddings import EMBED_DIM, ContrastiveMatrix
from .pipeline import AlignmentReport
from .svgfig import residual_heatmap_svg, scatter_svg
from .tsne import ProjectionResult
from .zones import ZONE_ORDER

_MATRIX_HEADER = "# soundzones-matrix v1 standardized="


def write_selections(selections: dict[str, list[TrackSelection]], path: Path) -> None:
    lines = ["country,track_id,total_views,max_run"]
    for country in sorted(selections):
        for sel in selections[country]:
            lines.append(f"{country},{sel.track_id},{sel.total_views},{sel.max_run}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_matrix(matrix: ContrastiveMatrix, path: Path) -> None:
    lines = [_MATRIX_HEADER + ("true" if matrix.standardized else "false")]
    lines.append("country," + ",".join(f"d{i:03d}" for i in range(EMBED_DIM)))
    for country, row in zip(matrix.countries, matrix.values):
        lines.append(country + "," + ",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix(path: Path) -> ContrastiveMatrix:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith(_MATRIX_HEADER):
        raise ValueError(f"{Path(path).name}: not a soundzones matrix file")
    standardized = lines[0][len(_MATRIX_HEADER):].strip() == "true"
    countries: list[str] = []
    rows: list[list[float]] = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != EMBED_DIM + 1:
            raise ValueError(f"{Path(path).name}:{lineno}: expected {EMBED_DIM + 1} fields")
        countries.append(parts[0])
        rows.append([float(v) for v in parts[1:]])
    return ContrastiveMatrix(tuple(countries), np.array(rows), standardized=standardized)


def write_clustering(
    selected_k: int,
    results: dict[int, ClusteringResult],
    countries: tuple[str, ...],
    path: Path,
) -> None:
    best = results[selected_k]
    payload = {
        "schema": "soundzones-clustering/1",
        "selected_k": selected_k,
        "seed": best.seed,
        "n_init": best.n_init,
        "sweep": [
            {
                "k": k,
                "inertia": results[k].inertia,
                "mean_silhouette": results[k].mean_silhouette,
            }
            for k in sorted(results)
        ],
        "countries": list(countries),
        "assignments": list(best.assignments),
        "centroids": [[float(v) for v in row] for row in best.centroids],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_clustering(path: Path) -> dict:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("schema") != "soundzones-clustering/1":
        raise ValueError(f"{Path(path).name}: not a soundzones clustering file")
    return payload


def write_projection(projection: ProjectionResult, path: Path) -> None:
    lines = ["country,x,y"]
    for country, (x, y) in zip(projection.countries, projection.coords):
        lines.append(f"{country},{float(x)!r},{float(y)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_projection_coords(path: Path) -> tuple[tuple[str, ...], np.ndarray]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "country,x,y":
        raise ValueError(f"{Path(path).name}: expected header 'country,x,y'")
    countries: list[str] = []
    coords: list[list[float]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"{Path(path).name}:{lineno}: expected 3 fields")
        countries.append(parts[0])
        coords.append([float(parts[1]), float(parts[2])])
    return tuple(countries), np.array(coords)


def write_report_coords(report: AlignmentReport, path: Path) -> None:
    """The published coordinate table: country,x,y,cluster,zone."""
    lines = ["country,x,y,cluster,zone"]
    for row in report.rows:
        zone = row.zone if row.zone is not None else "-"
        lines.append(f"{row.country},{row.x!r},{row.y!r},{row.cluster},{zone}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_report(report: AlignmentReport, path: Path) -> None:
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def load_report(path: Path) -> AlignmentReport:
    return AlignmentReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


_ZONE_INDEX = {zone.value: i for i, zone in enumerate(ZONE_ORDER)}


def emit_scatter_svg(report: AlignmentReport, path: Path) -> None:
    """Projection scatter: fill = cluster, shape = zone, with legend."""
    rows = [
        (
            row.country,
            row.x,
            row.y,
            row.cluster,
            _ZONE_INDEX[row.zone] if row.zone is not None else None,
        )
        for row in report.rows
    ]
    markup = scatter_svg(
        rows,
        zone_names=[z.value for z in ZONE_ORDER],
        cluster_names=report.cluster_labels or None,
    )
    Path(path).write_text(markup, encoding="utf-8")


def emit_residual_heatmap_svg(report: AlignmentReport, path: Path) -> None:
    """Residual grid: clusters as rows, zones as columns."""
    assoc = report.association
    markup = residual_heatmap_svg(
        assoc.residuals,
        row_labels=[f"cluster {k}" for k in assoc.row_labels],
        col_labels=list(assoc.col_labels),
        threshold=report.params["residual_threshold"],
    )
    Path(path).write_text(markup, encoding="utf-8")
