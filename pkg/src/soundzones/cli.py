"""Command-line interface.

Subcommands mirror the pipeline stages so each can run in isolation on
the documented intermediate formats:

    soundzones ingest   -c pipeline.cfg -o out/   # selections + matrix
    soundzones cluster  -c pipeline.cfg -o out/   # clustering.json
    soundzones project  -c pipeline.cfg -o out/   # projection.csv
    soundzones evaluate -c pipeline.cfg -o out/   # report + coords + figures
    soundzones all      -c pipeline.cfg -o out/   # everything above

Every config key can be overridden with a matching flag, e.g.
``--seed 7`` or ``--fixed-k 9``. Exit status is 0 on success and 1 on
any stage failure (the stage name prefixes the diagnostic).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import artifacts
from . import pipeline as pl
from .charts import parse_chart_file, select_tracks
from .figures import render_report_figures

_NO_FLAG = ("charts", "embeddings", "zones", "labels")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-c", "--config", required=True, type=Path, help="pipeline config file")
    parser.add_argument("-o", "--outdir", required=True, type=Path, help="output directory")
    for f in dataclasses.fields(pl.PipelineConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name in _NO_FLAG:
            parser.add_argument(flag, type=Path, default=None, help=f"override {f.name} path")
        elif f.name == "include_global":
            parser.add_argument(flag, action=argparse.BooleanOptionalAction, default=None)
        elif f.name == "fixed_k":
            parser.add_argument(flag, type=int, default=None)
        else:
            parser.add_argument(flag, type=type(f.default), default=None,
                                help=f"override {f.name} (default {f.default})")


def _config_from_args(args: argparse.Namespace) -> pl.PipelineConfig:
    overrides = {}
    for f in dataclasses.fields(pl.PipelineConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    return pl.load_config(args.config, overrides)


def _outdir(args: argparse.Namespace) -> Path:
    args.outdir.mkdir(parents=True, exist_ok=True)
    return args.outdir


def cmd_ingest(args: argparse.Namespace) -> None:
    config = _config_from_args(args)
    out = _outdir(args)
    try:
        with open(config.charts, "rb") as fh:
            entries = parse_chart_file(fh)
        selections = select_tracks(entries, config.min_weeks, config.top_n)
    except (OSError, ValueError) as exc:
        raise pl.PipelineError("ingest", exc) from exc
    artifacts.write_selections(selections, out / "selections.csv")
    matrix = pl.build_standardized_matrix(config)
    artifacts.write_matrix(matrix, out / "matrix.csv")
    print(f"ingest: {len(selections)} charts -> {out / 'selections.csv'}, {out / 'matrix.csv'}")


def _load_matrix(args: argparse.Namespace, config: pl.PipelineConfig):
    if args.matrix is not None:
        return artifacts.read_matrix(args.matrix)
    return pl.build_standardized_matrix(config)


def cmd_cluster(args: argparse.Namespace) -> None:
    config = _config_from_args(args)
    out = _outdir(args)
    matrix = _load_matrix(args, config)
    selected_k, results = pl.run_clustering(config, matrix)
    artifacts.write_clustering(selected_k, results, matrix.countries, out / "clustering.json")
    print(f"cluster: selected k={selected_k} -> {out / 'clustering.json'}")


def cmd_project(args: argparse.Namespace) -> None:
    config = _config_from_args(args)
    out = _outdir(args)
    matrix = _load_matrix(args, config)
    projection = pl.run_projection(config, matrix)
    artifacts.write_projection(projection, out / "projection.csv")
    print(f"project: final KL {projection.final_kl:.4f} -> {out / 'projection.csv'}")


def _write_report_bundle(report, out: Path) -> None:
    artifacts.save_report(report, out / "report.json")
    artifacts.write_report_coords(report, out / "coords.csv")
    artifacts.emit_scatter_svg(report, out / "scatter.svg")
    artifacts.emit_residual_heatmap_svg(report, out / "residuals.svg")
    render_report_figures(report, out)


def cmd_evaluate(args: argparse.Namespace) -> None:
    config = _config_from_args(args)
    out = _outdir(args)
    matrix = _load_matrix(args, config)
    if args.clustering is not None:
        payload = artifacts.read_clustering(args.clustering)
        if tuple(payload["countries"]) != matrix.countries:
            raise pl.PipelineError(
                "evaluate", ValueError("clustering file countries do not match the matrix")
            )
        summary = pl.ClusteringSummary(
            selected_k=payload["selected_k"],
            assignments=tuple(payload["assignments"]),
            sweep=tuple(pl.SweepEntry(**entry) for entry in payload["sweep"]),
        )
    else:
        summary = pl.summarize_clustering(*pl.run_clustering(config, matrix))
    if args.projection is not None:
        countries, coords = artifacts.read_projection_coords(args.projection)
        if countries != matrix.countries:
            raise pl.PipelineError(
                "evaluate", ValueError("projection file countries do not match the matrix")
            )
    else:
        coords = pl.run_projection(config, matrix).coords
    mapping = pl.load_zone_mapping(config)
    report = pl.evaluate(config, matrix, summary, coords, mapping)
    _write_report_bundle(report, out)
    print(
        f"evaluate: k={report.selected_k} V={report.association.cramers_v:.4f} "
        f"ARI={report.ari:.4f} NMI={report.nmi:.4f} -> {out / 'report.json'}"
    )


def cmd_all(args: argparse.Namespace) -> None:
    config = _config_from_args(args)
    out = _outdir(args)
    try:
        with open(config.charts, "rb") as fh:
            entries = parse_chart_file(fh)
        selections = select_tracks(entries, config.min_weeks, config.top_n)
    except (OSError, ValueError) as exc:
        raise pl.PipelineError("ingest", exc) from exc
    artifacts.write_selections(selections, out / "selections.csv")
    matrix = pl.build_standardized_matrix(config)
    artifacts.write_matrix(matrix, out / "matrix.csv")
    selected_k, results = pl.run_clustering(config, matrix)
    artifacts.write_clustering(selected_k, results, matrix.countries, out / "clustering.json")
    projection = pl.run_projection(config, matrix)
    artifacts.write_projection(projection, out / "projection.csv")
    mapping = pl.load_zone_mapping(config)
    report = pl.evaluate(
        config, matrix, pl.summarize_clustering(selected_k, results), projection.coords, mapping
    )
    _write_report_bundle(report, out)
    print(
        f"all: {len(matrix.countries)} countries, k={report.selected_k}, "
        f"V={report.association.cramers_v:.4f}, ARI={report.ari:.4f}, "
        f"NMI={report.nmi:.4f} -> {out}"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soundzones",
        description="Cluster country music profiles and score their cultural-zone alignment",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler, doc in (
        ("ingest", cmd_ingest, "parse charts and build the standardized matrix"),
        ("cluster", cmd_cluster, "k-means sweep with silhouette selection"),
        ("project", cmd_project, "t-SNE projection to 2-D"),
        ("evaluate", cmd_evaluate, "statistics report, coordinates and figures"),
        ("all", cmd_all, "run every stage into one directory"),
    ):
        p = sub.add_parser(name, help=doc)
        _add_config_flags(p)
        if name in ("cluster", "project", "evaluate"):
            p.add_argument("--matrix", type=Path, default=None,
                           help="use a previously written matrix.csv instead of re-ingesting")
        if name == "evaluate":
            p.add_argument("--clustering", type=Path, default=None,
                           help="use a previously written clustering.json")
            p.add_argument("--projection", type=Path, default=None,
                           help="use a previously written projection.csv")
        p.set_defaults(handler=handler)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.handler(args)
    except pl.PipelineError as exc:
        print(f"soundzones: error {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"soundzones: error {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
