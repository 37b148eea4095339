"""FastAPI service wrapping the scoring pipeline.

Requests reference files by path (the service runs next to the media); the
CLI is a thin client of these endpoints.
"""

from __future__ import annotations

import os
from importlib import resources

from fastapi import FastAPI
from pydantic import BaseModel, Field

from . import __version__
from .aggregate import (
    AggregationStrategy,
    ScoringContext,
    load_stats,
    save_stats,
    score_corpus,
)
from .bench import load_manifest, run_benchmark
from .decode import decode_video
from .errors import BlindVqaError
from .frames import make_views, rgb_to_luma, validate_frame
from .niqe import fit_pristine_model, load_niqe_model, save_niqe_model
from .semantic import (
    FixtureEmbeddingProvider,
    TorchScriptEmbeddingProvider,
    default_prompt_pairs,
    load_prompt_pairs,
)
from .temporal import video_tpqi


def default_model_path() -> str:
    return str(resources.files("blindvqa").joinpath("data/niqe_model.txt"))


def default_prompts_path() -> str:
    return str(resources.files("blindvqa").joinpath("data/prompts.tsv"))


def build_provider(spec: str):
    kind, _, path = spec.partition(":")
    if kind == "fixtures":
        return FixtureEmbeddingProvider(path)
    if kind == "runtime":
        return TorchScriptEmbeddingProvider(path)
    raise BlindVqaError(f"unknown embeddings spec {spec!r}; use fixtures:PATH or runtime:PATH")


class ScoringConfig(BaseModel):
    embeddings: str = Field(description="fixtures:PATH or runtime:BUNDLE_DIR")
    prompts_file: str | None = None
    niqe_model_file: str | None = None
    aggregation: str = "sigmoid-add"
    semantic_scale: float = 1.0
    pool_frame_scores: bool = True
    workers: int = 1


def build_context(cfg: ScoringConfig) -> ScoringContext:
    provider = build_provider(cfg.embeddings)
    if cfg.prompts_file:
        pairs = load_prompt_pairs(cfg.prompts_file, provider)
    else:
        pairs = default_prompt_pairs(provider)
    model = load_niqe_model(cfg.niqe_model_file or default_model_path())
    return ScoringContext(
        provider=provider,
        prompt_pairs=pairs,
        niqe_model=model,
        strategy=AggregationStrategy.parse(cfg.aggregation),
        semantic_scale=cfg.semantic_scale,
        pool_frame_scores=cfg.pool_frame_scores,
    )


class ScoreRequest(BaseModel):
    videos: list[str]
    config: ScoringConfig
    stats_file: str | None = None


class VideoScoreModel(BaseModel):
    video_id: str
    q_a: float
    q_s: float
    q_t: float
    q_unified: float
    raw_niqe: float
    raw_tpqi: float
    da_values: list[float]
    flags: list[str]


class StatsModel(BaseModel):
    mean: float
    std: float
    sample_count: int


class ScoreResponse(BaseModel):
    scores: list[VideoScoreModel]
    stats: dict[str, StatsModel]


class BenchRequest(BaseModel):
    manifest: str
    config: ScoringConfig
    stats_file: str | None = None
    plcc_fit: str = "none"
    skip_undecodable: bool = True


class BenchResponse(BaseModel):
    report: dict


class FitNiqeRequest(BaseModel):
    corpus_dir: str
    out: str
    min_images: int = 10


class FitNiqeResponse(BaseModel):
    out: str
    images_used: int


class ExportStatsRequest(BaseModel):
    videos: list[str]
    config: ScoringConfig
    out: str


class ExportStatsResponse(BaseModel):
    out: str
    stats: dict[str, StatsModel]


class CurvatureRequest(BaseModel):
    video: str


class CurvatureResponse(BaseModel):
    lgn: list[float]
    v1: list[float]
    raw_tpqi: float
    clamped: bool


def _load_videos(paths: list[str]):
    videos = []
    for path in paths:
        frames, fps = decode_video(path)
        videos.append((path, make_views(frames, fps)))
    return videos


def _stats_models(stats) -> dict[str, StatsModel]:
    return {tag: StatsModel(mean=s.mean, std=s.std, sample_count=s.sample_count)
            for tag, s in stats.items()}


def create_app() -> FastAPI:
    app = FastAPI(title="blindvqa", version=__version__)

    @app.exception_handler(BlindVqaError)
    async def _library_error(_, exc: BlindVqaError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(FileNotFoundError)
    async def _missing_file(_, exc: FileNotFoundError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=404, content={"detail": f"file not found: {exc}"})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/score", response_model=ScoreResponse)
    def score(req: ScoreRequest):
        ctx = build_context(req.config)
        stats = load_stats(req.stats_file) if req.stats_file else None
        videos = _load_videos(req.videos)
        rows, used = score_corpus(videos, ctx, stats=stats, workers=req.config.workers)
        return ScoreResponse(
            scores=[VideoScoreModel(
                video_id=r.video_id, q_a=r.q_a, q_s=r.q_s, q_t=r.q_t,
                q_unified=r.q_unified, raw_niqe=r.raw_niqe, raw_tpqi=r.raw_tpqi,
                da_values=r.da_values, flags=r.flags) for r in rows],
            stats=_stats_models(used),
        )

    @app.post("/bench", response_model=BenchResponse)
    def bench(req: BenchRequest):
        ctx = build_context(req.config)
        stats = load_stats(req.stats_file) if req.stats_file else None
        manifest = load_manifest(req.manifest)
        report = run_benchmark(manifest, ctx, stats=stats, plcc_fit=req.plcc_fit,
                               workers=req.config.workers,
                               skip_undecodable=req.skip_undecodable)
        return BenchResponse(report=report.to_dict())

    @app.post("/fit-niqe", response_model=FitNiqeResponse)
    def fit_niqe(req: FitNiqeRequest):
        import cv2

        corpus = []
        if not os.path.isdir(req.corpus_dir):
            raise FileNotFoundError(req.corpus_dir)
        for name in sorted(os.listdir(req.corpus_dir)):
            path = os.path.join(req.corpus_dir, name)
            img = cv2.imread(path, cv2.IMREAD_COLOR)
            if img is None:
                continue
            rgb = validate_frame(img[:, :, ::-1].astype(float))
            corpus.append(rgb_to_luma(rgb))
        model = fit_pristine_model(corpus, min_images=req.min_images)
        save_niqe_model(req.out, model)
        return FitNiqeResponse(out=req.out, images_used=len(corpus))

    @app.post("/export-stats", response_model=ExportStatsResponse)
    def export_stats(req: ExportStatsRequest):
        ctx = build_context(req.config)
        videos = _load_videos(req.videos)
        _, stats = score_corpus(videos, ctx, workers=req.config.workers)
        save_stats(req.out, stats)
        return ExportStatsResponse(out=req.out, stats=_stats_models(stats))

    @app.post("/curvature", response_model=CurvatureResponse)
    def curvature(req: CurvatureRequest):
        frames, fps = decode_video(req.video)
        views = make_views(frames, fps)
        raw, lgn_curv, v1_curv = video_tpqi(views.temporal)
        return CurvatureResponse(
            lgn=lgn_curv.values.tolist(),
            v1=v1_curv.values.tolist(),
            raw_tpqi=raw.value,
            clamped=raw.clamped,
        )

    return app


app = create_app()
