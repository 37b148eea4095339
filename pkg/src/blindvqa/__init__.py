"""Opinion-unaware video quality index: semantic affinity plus spatial and
temporal naturalness, aggregated via gaussian normalization and sigmoid
rescaling, with an SRCC/PLCC benchmark harness."""

__version__ = "0.1.0"

from .aggregate import (
    AggregationStrategy,
    CorpusStats,
    ScoringContext,
    VideoScore,
    compute_corpus_stats,
    rescale,
    score_corpus,
    unified_index,
)
from .bench import BenchmarkReport, DatasetManifest, load_manifest, plcc, run_benchmark, srcc
from .frames import (
    VideoViews,
    ViewConfig,
    make_views,
    resize_bicubic,
    rgb_to_luma,
    sample_uniform_indices,
)
from .niqe import (
    NiqeModel,
    compute_mscn,
    fit_aggd,
    fit_ggd,
    fit_pristine_model,
    load_niqe_model,
    niqe_features,
    niqe_score,
    save_niqe_model,
    spatial_index,
)
from .semantic import (
    EmbeddingProvider,
    FixtureEmbeddingProvider,
    PromptPair,
    TorchScriptEmbeddingProvider,
    affinity,
    differential_affinity,
    frame_key,
    read_embedding_fixture,
    semantic_index,
    text_key,
    write_embedding_fixture,
)
from .temporal import (
    CurvatureSeries,
    lgn_response,
    temporal_index,
    tpqi_score,
    trajectory_curvature,
    v1_response,
    video_tpqi,
)

__all__ = [name for name in dir() if not name.startswith("_")]
