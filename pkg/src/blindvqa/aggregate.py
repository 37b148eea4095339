"""Score aggregation: corpus normalization, sigmoid rescaling, unification.

The semantic index is never corpus-normalized (its sigmoid acts on the raw
prompt-affinity difference); the spatial and temporal raw scores are
z-scored against corpus statistics and remapped with a negative-orientation
sigmoid before the three are combined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import expit

from .errors import DegenerateStatsError, EmptyInputError, ModelFileError
from .frames import VideoViews
from .niqe import NiqeModel, score_frame
from .semantic import EmbeddingProvider, PromptPair, differential_affinity
from .temporal import video_tpqi


class Rescale(str, Enum):
    DIRECT_RAW = "direct"
    LINEAR_NORMALIZE = "linear"
    GAUSSIAN_SIGMOID = "sigmoid"


class Combine(str, Enum):
    ADDITION = "add"
    MULTIPLICATION = "mul"


@dataclass
class AggregationStrategy:
    rescale: Rescale = Rescale.GAUSSIAN_SIGMOID
    combine: Combine = Combine.ADDITION

    @classmethod
    def parse(cls, name: str) -> "AggregationStrategy":
        table = {
            "sigmoid-add": (Rescale.GAUSSIAN_SIGMOID, Combine.ADDITION),
            "sigmoid-mul": (Rescale.GAUSSIAN_SIGMOID, Combine.MULTIPLICATION),
            "linear-add": (Rescale.LINEAR_NORMALIZE, Combine.ADDITION),
            "direct-add": (Rescale.DIRECT_RAW, Combine.ADDITION),
        }
        if name not in table:
            raise ModelFileError(f"unknown aggregation strategy {name!r}")
        r, c = table[name]
        return cls(rescale=r, combine=c)

    @property
    def name(self) -> str:
        return {
            (Rescale.GAUSSIAN_SIGMOID, Combine.ADDITION): "sigmoid-add",
            (Rescale.GAUSSIAN_SIGMOID, Combine.MULTIPLICATION): "sigmoid-mul",
            (Rescale.LINEAR_NORMALIZE, Combine.ADDITION): "linear-add",
            (Rescale.LINEAR_NORMALIZE, Combine.MULTIPLICATION): "linear-mul",
            (Rescale.DIRECT_RAW, Combine.ADDITION): "direct-add",
            (Rescale.DIRECT_RAW, Combine.MULTIPLICATION): "direct-mul",
        }[(self.rescale, self.combine)]


@dataclass
class CorpusStats:
    mean: float
    std: float
    metric_tag: str
    sample_count: int

    def __post_init__(self):
        if self.std <= 0:
            raise DegenerateStatsError(f"{self.metric_tag}: std must be positive")
        if self.sample_count < 2:
            raise DegenerateStatsError(f"{self.metric_tag}: need >= 2 samples")


def compute_corpus_stats(raw_values: list[float], metric_tag: str) -> CorpusStats:
    """Arithmetic mean and population standard deviation of raw scores."""
    vals = np.asarray(raw_values, dtype=np.float64)
    if vals.size < 2:
        raise DegenerateStatsError(f"{metric_tag}: need >= 2 values, got {vals.size}")
    std = float(np.std(vals))  # population (divide by n); fixed for determinism
    if std == 0.0:
        raise DegenerateStatsError(f"{metric_tag}: all values equal")
    return CorpusStats(mean=float(vals.mean()), std=std,
                       metric_tag=metric_tag, sample_count=int(vals.size))


def rescale(x: float, stats: CorpusStats | None, orientation: str,
            strategy: AggregationStrategy) -> float:
    """Remap a raw metric value per the strategy; orientation flips the sign
    for lower-is-better metrics."""
    if orientation not in ("higher-better", "lower-better"):
        raise ValueError(f"bad orientation {orientation!r}")
    sign = 1.0 if orientation == "higher-better" else -1.0
    if strategy.rescale is Rescale.DIRECT_RAW:
        return sign * x
    if stats is None:
        raise DegenerateStatsError("strategy requires corpus statistics")
    z = (x - stats.mean) / stats.std
    if strategy.rescale is Rescale.LINEAR_NORMALIZE:
        return sign * z
    return float(expit(sign * z))


def unified_index(q_a: float, q_s: float, q_t: float,
                  strategy: AggregationStrategy | None = None) -> float:
    strategy = strategy or AggregationStrategy()
    if strategy.combine is Combine.MULTIPLICATION:
        return q_a * q_s * q_t
    return q_a + q_s + q_t


# ---------------------------------------------------------------------------
# Corpus scoring

@dataclass
class VideoScore:
    video_id: str
    q_a: float
    q_s: float
    q_t: float
    q_unified: float
    raw_niqe: float                   # per-video mean of frame scores
    raw_tpqi: float
    da_values: list[float] = field(default_factory=list)
    frame_niqe: list[float] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)


@dataclass
class RawRecord:
    """First-pass (normalization-free) measurements of one video."""

    video_id: str
    q_a: float
    da_values: list[float]
    frame_niqe: list[float]
    raw_tpqi: float
    flags: list[str]


@dataclass
class ScoringContext:
    provider: EmbeddingProvider
    prompt_pairs: list[PromptPair]
    niqe_model: NiqeModel
    strategy: AggregationStrategy = field(default_factory=AggregationStrategy)
    semantic_scale: float = 1.0
    pool_frame_scores: bool = True    # Eq.-style frame pooling vs per-video means


def raw_score_video(video_id: str, views: VideoViews, ctx: ScoringContext) -> RawRecord:
    embeddings = [ctx.provider.embed_image(f) for f in views.aesthetic]
    da_values = [differential_affinity(embeddings, p) for p in ctx.prompt_pairs]
    q_a = float(sum(1.0 / (1.0 + np.exp(-ctx.semantic_scale * da)) for da in da_values))
    frame_niqe = [score_frame(f if f.ndim == 2 else _luma(f), ctx.niqe_model)
                  for f in views.spatial]
    raw, lgn_curv, v1_curv = video_tpqi(views.temporal)
    flags = []
    if raw.clamped:
        flags.append("tpqi-clamped")
    if lgn_curv.degenerate_count or v1_curv.degenerate_count:
        flags.append("static-triplets-skipped")
    return RawRecord(video_id=video_id, q_a=q_a, da_values=da_values,
                     frame_niqe=frame_niqe, raw_tpqi=raw.value, flags=flags)


def _luma(frame):
    from .frames import rgb_to_luma

    return rgb_to_luma(frame)


def corpus_stats_from_records(records: list[RawRecord],
                              pool_frame_scores: bool = True) -> dict[str, CorpusStats]:
    """Normalization statistics over a scored set.

    Spatial scores pool per-frame values across all videos by default; the
    per-video-mean alternative is available via pool_frame_scores=False.
    """
    if pool_frame_scores:
        niqe_vals = [q for r in records for q in r.frame_niqe]
    else:
        niqe_vals = [float(np.mean(r.frame_niqe)) for r in records]
    tpqi_vals = [r.raw_tpqi for r in records]
    return {
        "niqe": compute_corpus_stats(niqe_vals, "niqe"),
        "tpqi": compute_corpus_stats(tpqi_vals, "tpqi"),
    }


def finalize_record(record: RawRecord, stats: dict[str, CorpusStats],
                    strategy: AggregationStrategy) -> VideoScore:
    niqe_stats = stats.get("niqe")
    tpqi_stats = stats.get("tpqi")
    q_s = float(np.mean([rescale(q, niqe_stats, "lower-better", strategy)
                         for q in record.frame_niqe]))
    q_t = rescale(record.raw_tpqi, tpqi_stats, "lower-better", strategy)
    q_u = unified_index(record.q_a, q_s, q_t, strategy)
    return VideoScore(
        video_id=record.video_id,
        q_a=record.q_a, q_s=q_s, q_t=q_t, q_unified=q_u,
        raw_niqe=float(np.mean(record.frame_niqe)),
        raw_tpqi=record.raw_tpqi,
        da_values=list(record.da_values),
        frame_niqe=list(record.frame_niqe),
        flags=list(record.flags),
    )


def score_corpus(videos: list[tuple[str, VideoViews]], ctx: ScoringContext,
                 stats: dict[str, CorpusStats] | None = None,
                 workers: int = 1) -> tuple[list[VideoScore], dict[str, CorpusStats]]:
    """Score a set of videos.

    Two-pass mode (stats=None) derives the normalization statistics from the
    scored set itself; fixed-stats mode applies previously exported stats and
    can therefore score a single video.
    """
    if not videos:
        raise EmptyInputError("empty corpus")
    if stats is None and len(videos) < 2:
        raise DegenerateStatsError(
            "two-pass normalization needs >= 2 videos; use fixed-stats mode for one video"
        )
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        serialize = not getattr(ctx.provider, "reentrant", True)
        if serialize:
            records = [raw_score_video(vid, views, ctx) for vid, views in videos]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(
                    lambda item: raw_score_video(item[0], item[1], ctx), videos))
    else:
        records = [raw_score_video(vid, views, ctx) for vid, views in videos]
    if stats is None:
        stats = corpus_stats_from_records(records, ctx.pool_frame_scores)
    return [finalize_record(r, stats, ctx.strategy) for r in records], stats


# ---------------------------------------------------------------------------
# Stats file format: one line per metric, `metric_tag mean std sample_count`

def save_stats(path: str, stats: dict[str, CorpusStats]) -> None:
    with open(path, "w") as fh:
        for tag, s in sorted(stats.items()):
            fh.write(f"{tag} {s.mean:.12g} {s.std:.12g} {s.sample_count}\n")


def load_stats(path: str) -> dict[str, CorpusStats]:
    stats: dict[str, CorpusStats] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise ModelFileError(f"{path}:{lineno}: expected 4 fields")
            tag = parts[0]
            stats[tag] = CorpusStats(mean=float(parts[1]), std=float(parts[2]),
                                     metric_tag=tag, sample_count=int(parts[3]))
    if not stats:
        raise ModelFileError(f"{path}: empty stats file")
    return stats
