"""End-to-end orchestration from input files to an alignment report.

The pipeline runs ingest -> profiles -> contrastive -> standardize ->
cluster -> project -> zones -> evaluate, is fully deterministic given
its configuration (including the seed), and tags every failure with the
stage it came from. Reports carry no timestamps and no paths, so a
rerun with the same config writes byte-identical artifacts.
"""

from __future__ import annotations

import bisect
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import charts as charts_mod
from . import cluster as cluster_mod
from . import embeddings as emb_mod
from . import stats as stats_mod
from . import tsne as tsne_mod
from . import zones as zones_mod

_PATH_FIELDS = ("charts", "embeddings", "zones", "labels")
_CHOICES = {
    "kmeans_init": ("random", "plusplus"),
    "tsne_init": ("gaussian", "pca"),
    "residual_variant": ("pearson", "adjusted"),
    "nmi_normalizer": ("arithmetic", "geometric", "max"),
    "contrastive_sign": ("country-minus-global", "global-minus-country"),
    "manova_space": ("tsne", "embedding"),
}


class PipelineError(RuntimeError):
    """A stage failure; ``stage`` names the pipeline step that raised."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class PipelineConfig:
    """All pipeline inputs and parameters.

    Paths point at the chart CSV, the embedding file, an optional zone
    mapping CSV (bundled 2023 WVS map when omitted) and an optional
    cluster-label CSV. The remaining fields mirror the analysis knobs;
    defaults follow the published protocol (20-week persistence, top
    100 tracks, k swept over 2..14, perplexity 20, residual threshold
    2.5).
    """

    charts: Path
    embeddings: Path
    zones: Path | None = None
    labels: Path | None = None
    week_epoch: str = ""
    min_weeks: int = 20
    top_n: int = 100
    k_min: int = 2
    k_max: int = 14
    fixed_k: int | None = None
    seed: int = 0
    n_init: int = 10
    kmeans_max_iter: int = 300
    kmeans_tol: float = 1e-6
    kmeans_init: str = "random"
    perplexity: float = 20.0
    tsne_iters: int = 1000
    tsne_learning_rate: float = 200.0
    tsne_exaggeration: float = 12.0
    tsne_exaggeration_iters: int = 250
    tsne_momentum_early: float = 0.5
    tsne_momentum_late: float = 0.8
    tsne_init: str = "gaussian"
    residual_threshold: float = 2.5
    residual_variant: str = "pearson"
    nmi_normalizer: str = "arithmetic"
    include_global: bool = False
    contrastive_sign: str = "country-minus-global"
    manova_space: str = "tsne"

    def __post_init__(self):
        object.__setattr__(self, "charts", Path(self.charts))
        object.__setattr__(self, "embeddings", Path(self.embeddings))
        for name in ("zones", "labels"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, Path(value))
        positive = (
            "min_weeks", "top_n", "k_min", "k_max", "n_init", "kmeans_max_iter",
            "tsne_iters", "tsne_exaggeration_iters",
        )
        for name in positive:
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("kmeans_tol", "perplexity", "tsne_learning_rate",
                     "tsne_exaggeration", "residual_threshold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.k_min < 2:
            raise ValueError("k_min must be at least 2")
        if self.k_min > self.k_max:
            raise ValueError("k_min must not exceed k_max")
        if self.fixed_k is not None and self.fixed_k < 1:
            raise ValueError("fixed_k must be positive")
        if not 1.0 < self.perplexity:
            raise ValueError("perplexity must exceed 1")
        for name, choices in _CHOICES.items():
            if getattr(self, name) not in choices:
                raise ValueError(f"{name} must be one of {choices}, got {getattr(self, name)!r}")

    def param_echo(self) -> dict:
        """Analysis parameters only; paths stay out of reports."""
        echo = {}
        for f in dataclasses.fields(self):
            if f.name in _PATH_FIELDS:
                continue
            echo[f.name] = getattr(self, f.name)
        return echo


def _coerce(name: str, text: str):
    fields = {f.name: f for f in dataclasses.fields(PipelineConfig)}
    if name not in fields:
        raise ValueError(f"unknown config key: {name!r}")
    if name in _PATH_FIELDS:
        return Path(text)
    if name == "fixed_k":
        return None if text.lower() in ("", "none") else int(text)
    if name == "include_global":
        if text.lower() not in ("true", "false"):
            raise ValueError(f"include_global must be true or false, got {text!r}")
        return text.lower() == "true"
    default = PipelineConfig.__dataclass_fields__[name].default
    if isinstance(default, bool):
        return text.lower() == "true"
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def load_config(path: Path, overrides: dict | None = None) -> PipelineConfig:
    """Read a ``key = value`` config file; relative paths resolve
    against the config file's directory. ``overrides`` wins over file
    values and is applied as-is."""
    path = Path(path)
    values: dict = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path.name}:{lineno}: expected 'key = value'")
        key, _, text = line.partition("=")
        key = key.strip()
        value = _coerce(key, text.strip())
        if key in _PATH_FIELDS and value is not None and not Path(value).is_absolute():
            value = path.parent / value
        if key in values:
            raise ValueError(f"{path.name}:{lineno}: duplicate key {key!r}")
        values[key] = value
    if overrides:
        values.update(overrides)
    if "charts" not in values or "embeddings" not in values:
        raise ValueError("config must set 'charts' and 'embeddings'")
    return PipelineConfig(**values)


@dataclass(frozen=True)
class CountryRow:
    country: str
    zone: str | None
    cluster: int
    x: float
    y: float


@dataclass(frozen=True)
class SweepEntry:
    k: int
    inertia: float
    mean_silhouette: float


@dataclass(frozen=True)
class ReportManova:
    wilks_lambda: float
    statistic: float
    df: int
    p_value: float


@dataclass(frozen=True)
class ReportAssociation:
    chi2: float
    df: int
    p_value: float
    cramers_v: float
    residual_variant: str
    row_labels: tuple[int, ...]
    col_labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]
    residuals: tuple[tuple[float, ...], ...]
    low_expected: bool


@dataclass(frozen=True)
class AlignmentReport:
    """Full statistics bundle emitted by the pipeline."""

    params: dict
    rows: tuple[CountryRow, ...]
    selected_k: int
    sweep: tuple[SweepEntry, ...]
    manova: ReportManova
    association: ReportAssociation
    ari: float
    nmi: float
    cluster_labels: dict[int, str] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "schema": "soundzones-report/1",
            "params": dict(self.params),
            "countries": [dataclasses.asdict(r) for r in self.rows],
            "clustering": {
                "selected_k": self.selected_k,
                "sweep": [dataclasses.asdict(s) for s in self.sweep],
            },
            "manova": dataclasses.asdict(self.manova),
            "association": {
                **dataclasses.asdict(self.association),
                "row_labels": list(self.association.row_labels),
                "col_labels": list(self.association.col_labels),
                "counts": [list(r) for r in self.association.counts],
                "residuals": [list(r) for r in self.association.residuals],
            },
            "agreement": {"ari": self.ari, "nmi": self.nmi},
            "cluster_labels": {str(k): v for k, v in sorted(self.cluster_labels.items())},
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AlignmentReport":
        if data.get("schema") != "soundzones-report/1":
            raise ValueError(f"unsupported report schema: {data.get('schema')!r}")
        assoc = data["association"]
        return cls(
            params=dict(data["params"]),
            rows=tuple(CountryRow(**r) for r in data["countries"]),
            selected_k=data["clustering"]["selected_k"],
            sweep=tuple(SweepEntry(**s) for s in data["clustering"]["sweep"]),
            manova=ReportManova(**data["manova"]),
            association=ReportAssociation(
                chi2=assoc["chi2"],
                df=assoc["df"],
                p_value=assoc["p_value"],
                cramers_v=assoc["cramers_v"],
                residual_variant=assoc["residual_variant"],
                row_labels=tuple(assoc["row_labels"]),
                col_labels=tuple(assoc["col_labels"]),
                counts=tuple(tuple(r) for r in assoc["counts"]),
                residuals=tuple(tuple(r) for r in assoc["residuals"]),
                low_expected=assoc["low_expected"],
            ),
            ari=data["agreement"]["ari"],
            nmi=data["agreement"]["nmi"],
            cluster_labels={int(k): v for k, v in data["cluster_labels"].items()},
            warnings=tuple(data["warnings"]),
        )


def load_cluster_labels(path: Path) -> dict[int, str]:
    """Optional ``cluster,label`` CSV attaching free text to clusters."""
    labels: dict[int, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        left, _, right = line.partition(",")
        if lineno == 1 and (left.strip(), right.strip()) == ("cluster", "label"):
            continue
        try:
            cluster = int(left)
        except ValueError:
            raise ValueError(f"{Path(path).name}:{lineno}: cluster must be an integer") from None
        if cluster in labels:
            raise ValueError(f"{Path(path).name}:{lineno}: duplicate cluster {cluster}")
        labels[cluster] = right.strip()
    return labels


def build_standardized_matrix(config: PipelineConfig) -> emb_mod.ContrastiveMatrix:
    """Stages ingest, profiles, contrastive and standardize."""
    try:
        with open(config.charts, "rb") as fh:
            entries = charts_mod.parse_chart_file(fh)
        selections = charts_mod.select_tracks(entries, config.min_weeks, config.top_n)
    except (OSError, ValueError) as exc:
        raise PipelineError("ingest", exc) from exc

    try:
        with open(config.embeddings, "rb") as fh:
            records = emb_mod.load_embeddings(fh)
        by_key = {(r.track_id, r.country): r for r in records}
        if "GLOBAL" not in selections:
            raise ValueError("chart data has no GLOBAL rows; the global profile is required")
        empty = sorted(c for c, sel in selections.items() if not sel)
        if empty:
            raise ValueError(
                "no tracks passed the persistence filter for: " + ", ".join(empty)
            )
        missing: list[str] = []
        profiles = {}
        for country in sorted(selections):
            recs = []
            for sel in selections[country]:
                record = by_key.get((sel.track_id, country))
                if record is None:
                    missing.append(f"{country}/{sel.track_id}")
                else:
                    recs.append(record)
            if recs:
                profiles[country] = emb_mod.country_profile(recs)
        if missing:
            raise ValueError("missing embeddings for: " + ", ".join(missing))
    except (OSError, ValueError) as exc:
        raise PipelineError("profiles", exc) from exc

    try:
        global_profile = profiles.pop("GLOBAL")
        matrix = emb_mod.contrastive_matrix(
            profiles.values(), global_profile, sign=config.contrastive_sign
        )
        if config.include_global:
            countries = list(matrix.countries)
            at = bisect.bisect_left(countries, "GLOBAL")
            countries.insert(at, "GLOBAL")
            values = np.insert(matrix.values, at, np.zeros(emb_mod.EMBED_DIM), axis=0)
            matrix = emb_mod.ContrastiveMatrix(tuple(countries), values, standardized=False)
    except ValueError as exc:
        raise PipelineError("contrastive", exc) from exc

    try:
        return emb_mod.standardize(matrix)
    except ValueError as exc:
        raise PipelineError("standardize", exc) from exc


def run_clustering(
    config: PipelineConfig, matrix: emb_mod.ContrastiveMatrix
) -> tuple[int, dict[int, cluster_mod.ClusteringResult]]:
    try:
        if config.fixed_k is not None:
            result = cluster_mod.kmeans(
                matrix, config.fixed_k, config.seed, n_init=config.n_init,
                max_iter=config.kmeans_max_iter, tol=config.kmeans_tol,
                init=config.kmeans_init,
            )
            return config.fixed_k, {config.fixed_k: result}
        return cluster_mod.select_k(
            matrix, config.k_min, config.k_max, config.seed, n_init=config.n_init,
            max_iter=config.kmeans_max_iter, tol=config.kmeans_tol,
            init=config.kmeans_init,
        )
    except ValueError as exc:
        raise PipelineError("cluster", exc) from exc


def run_projection(config: PipelineConfig, matrix: emb_mod.ContrastiveMatrix) -> tsne_mod.ProjectionResult:
    try:
        return tsne_mod.tsne(
            matrix,
            perplexity=config.perplexity,
            seed=config.seed,
            iters=config.tsne_iters,
            learning_rate=config.tsne_learning_rate,
            exaggeration=config.tsne_exaggeration,
            exaggeration_iters=config.tsne_exaggeration_iters,
            momentum_early=config.tsne_momentum_early,
            momentum_late=config.tsne_momentum_late,
            init=config.tsne_init,
        )
    except (ValueError, tsne_mod.ProjectionError) as exc:
        raise PipelineError("project", exc) from exc


def load_zone_mapping(config: PipelineConfig) -> zones_mod.CultureMapping:
    try:
        if config.zones is None:
            return zones_mod.load_default_mapping()
        with open(config.zones, "rb") as fh:
            return zones_mod.load_mapping(fh)
    except (OSError, ValueError) as exc:
        raise PipelineError("zones", exc) from exc


@dataclass(frozen=True)
class ClusteringSummary:
    """What evaluation needs from the clustering stage: the selected k,
    assignments aligned with the matrix rows, and the sweep scores."""

    selected_k: int
    assignments: tuple[int, ...]
    sweep: tuple[SweepEntry, ...]


def summarize_clustering(
    selected_k: int, results: dict[int, cluster_mod.ClusteringResult]
) -> ClusteringSummary:
    return ClusteringSummary(
        selected_k=selected_k,
        assignments=results[selected_k].assignments,
        sweep=tuple(
            SweepEntry(k=k, inertia=results[k].inertia, mean_silhouette=results[k].mean_silhouette)
            for k in sorted(results)
        ),
    )


def evaluate(
    config: PipelineConfig,
    matrix: emb_mod.ContrastiveMatrix,
    clustering: ClusteringSummary,
    coords: np.ndarray,
    mapping: zones_mod.CultureMapping,
) -> AlignmentReport:
    """Stage evaluate: MANOVA, contingency statistics and agreement.

    ``coords`` holds the 2-D projection aligned row-for-row with
    ``matrix.countries``.
    """
    try:
        countries = matrix.countries
        coords = np.asarray(coords, dtype=np.float64)
        if coords.shape != (len(countries), 2):
            raise ValueError(
                f"coords must be {len(countries)} x 2, got {coords.shape}"
            )
        if len(clustering.assignments) != len(countries):
            raise ValueError("clustering assignments do not match the matrix rows")
        selected_k = clustering.selected_k
        assignments = dict(zip(countries, clustering.assignments))
        if config.manova_space == "tsne":
            response = coords
        else:
            # Wilks' Lambda is defined here on a 2-D response, so the
            # embedding-space variant tests the top-2 principal scores
            centred = matrix.values - matrix.values.mean(axis=0)
            u, s, _ = np.linalg.svd(centred, full_matrices=False)
            response = u[:, :2] * s[:2]
        manova = stats_mod.wilks_manova(response, [assignments[c] for c in countries])

        mapped = [c for c in countries if c != "GLOBAL"]
        zone_seq = zones_mod.zone_labels(mapping, mapped)
        zone_by_country = dict(zip(mapped, zone_seq))
        cluster_seq = [assignments[c] for c in mapped]
        zone_names = [z.value for z in zone_seq]
        present_zones = [z.value for z in zones_mod.ZONE_ORDER if z in set(zone_seq)]
        table = stats_mod.crosstab(
            cluster_seq, zone_names,
            row_order=sorted(set(cluster_seq)), col_order=present_zones,
        )
        assoc = stats_mod.chi_squared_independence(table, residual_variant=config.residual_variant)
        ari = stats_mod.adjusted_rand_index(cluster_seq, zone_names)
        nmi = stats_mod.normalized_mutual_information(
            cluster_seq, zone_names, normalizer=config.nmi_normalizer
        )

        warnings: list[str] = []
        if assoc.low_expected:
            warnings.append("chi-squared: at least one expected cell count is below 5")
        singletons = [k for k in table.row_labels if sum(1 for c in cluster_seq if c == k) == 1]
        if singletons:
            warnings.append(
                "clustering: singleton cluster(s): " + ", ".join(str(s) for s in singletons)
            )

        cluster_labels = load_cluster_labels(config.labels) if config.labels else {}

        rows = tuple(
            CountryRow(
                country=c,
                zone=zone_by_country[c].value if c in zone_by_country else None,
                cluster=assignments[c],
                x=float(coords[i][0]),
                y=float(coords[i][1]),
            )
            for i, c in enumerate(countries)
        )
        return AlignmentReport(
            params=config.param_echo(),
            rows=rows,
            selected_k=selected_k,
            sweep=clustering.sweep,
            manova=ReportManova(
                wilks_lambda=manova.wilks_lambda,
                statistic=manova.statistic,
                df=manova.df,
                p_value=manova.p_value,
            ),
            association=ReportAssociation(
                chi2=assoc.chi2,
                df=assoc.df,
                p_value=assoc.p_value,
                cramers_v=assoc.cramers_v,
                residual_variant=assoc.residual_variant,
                row_labels=tuple(int(k) for k in table.row_labels),
                col_labels=tuple(table.col_labels),
                counts=tuple(tuple(int(v) for v in row) for row in table.counts),
                residuals=tuple(tuple(float(v) for v in row) for row in assoc.residuals),
                low_expected=assoc.low_expected,
            ),
            ari=float(ari),
            nmi=float(nmi),
            cluster_labels=cluster_labels,
            warnings=tuple(warnings),
        )
    except (OSError, ValueError) as exc:
        raise PipelineError("evaluate", exc) from exc


def run_pipeline(config: PipelineConfig) -> AlignmentReport:
    """Execute every stage and return the assembled report."""
    matrix = build_standardized_matrix(config)
    selected_k, results = run_clustering(config, matrix)
    projection = run_projection(config, matrix)
    mapping = load_zone_mapping(config)
    return evaluate(
        config, matrix, summarize_clustering(selected_k, results), projection.coords, mapping
    )
