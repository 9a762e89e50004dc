"""Country-level music profile clustering and cultural-zone alignment."""

from .charts import (
    ChartEntry,
    ChartFormatError,
    TrackSelection,
    longest_consecutive_run,
    parse_chart_file,
    select_tracks,
)
from .cluster import ClusteringResult, kmeans, select_k, silhouette
from .embeddings import (
    EMBED_DIM,
    ContrastiveMatrix,
    CountryProfile,
    EmbeddingFormatError,
    EmbeddingRecord,
    contrastive_matrix,
    country_profile,
    load_embeddings,
    standardize,
    write_embeddings,
)
from .pipeline import AlignmentReport, PipelineConfig, PipelineError, load_config, run_pipeline
from .stats import (
    AssociationResult,
    ContingencyTable,
    ManovaResult,
    adjusted_rand_index,
    chi_squared_independence,
    chi_squared_sf,
    crosstab,
    normalized_mutual_information,
    wilks_manova,
)
from .tsne import ProjectionResult, calibrate_affinities, tsne
from .zones import (
    CultureMapping,
    CultureZone,
    ZoneMappingError,
    load_default_mapping,
    load_mapping,
    map_country,
    zone_labels,
)

__version__ = "0.1.0"
