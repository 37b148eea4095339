"""Benchmark harness: manifests, rank correlations, end-to-end runs, reports.

A manifest is a CSV of ``video_path,mos`` rows (optional header). The harness
scores every entry, correlates the unified score against the mean opinion
scores, and also emits the 7-row component-subset ablation grid.
"""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.stats import rankdata

from .aggregate import (
    AggregationStrategy,
    Combine,
    CorpusStats,
    ScoringContext,
    VideoScore,
    score_corpus,
)
from .decode import decode_video
from .errors import (
    BlindVqaError,
    InsufficientDataError,
    ModelFileError,
    UndefinedCorrelationError,
)
from .frames import ViewConfig, make_views


def _check_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.ndim != 1 or xa.shape != ya.shape:
        raise UndefinedCorrelationError(f"length mismatch: {xa.shape} vs {ya.shape}")
    if xa.size < 2:
        raise UndefinedCorrelationError("need at least 2 points")
    if np.ptp(xa) == 0.0 or np.ptp(ya) == 0.0:
        raise UndefinedCorrelationError("constant input has no defined correlation")
    return xa, ya


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    return float(np.dot(xc, yc) / np.sqrt(np.dot(xc, xc) * np.dot(yc, yc)))


def srcc(x, y) -> float:
    """Spearman rank correlation; ties get average (fractional) ranks."""
    xa, ya = _check_pair(x, y)
    return _pearson(rankdata(xa), rankdata(ya))


def _logistic4(x, beta1, beta2, beta3, beta4):
    return beta2 + (beta1 - beta2) / (1.0 + np.exp(-(x - beta3) / np.abs(beta4)))


def plcc(x, y, fit: str = "none") -> float:
    """Pearson linear correlation, optionally after a monotone 4-parameter
    logistic remap of x fitted by least squares (common VQA practice)."""
    xa, ya = _check_pair(x, y)
    if fit == "logistic4":
        from scipy.optimize import curve_fit

        p0 = [ya.max(), ya.min(), xa.mean(), max(np.std(xa), 1e-6)]
        try:
            popt, _ = curve_fit(_logistic4, xa, ya, p0=p0, maxfev=20000)
            xa = _logistic4(xa, *popt)
            if np.ptp(xa) == 0.0:
                raise RuntimeError("degenerate fit")
        except RuntimeError:
            pass  # fall back to the raw values
    elif fit != "none":
        raise ModelFileError(f"unknown plcc fit {fit!r}")
    return _pearson(xa, ya)


# ---------------------------------------------------------------------------
# Manifests

@dataclass
class DatasetManifest:
    name: str
    entries: list[tuple[str, float]]
    mos_scale: tuple[float, float] = (1.0, 5.0)

    def __post_init__(self):
        paths = [p for p, _ in self.entries]
        if len(set(paths)) != len(paths):
            raise ModelFileError(f"{self.name}: duplicate video paths in manifest")
        if any(not np.isfinite(m) for _, m in self.entries):
            raise ModelFileError(f"{self.name}: non-finite MOS value")


def load_manifest(path: str, name: str | None = None) -> DatasetManifest:
    entries = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            if len(row) < 2:
                raise ModelFileError(f"{path}: manifest rows need video_path,mos")
            try:
                mos = float(row[1])
            except ValueError:
                continue  # header row
            entries.append((row[0].strip(), mos))
    if not entries:
        raise ModelFileError(f"{path}: no manifest entries")
    return DatasetManifest(name=name or os.path.splitext(os.path.basename(path))[0],
                           entries=entries)


# ---------------------------------------------------------------------------
# Benchmark runs

_COMPONENTS = ("q_a", "q_s", "q_t")


@dataclass
class BenchmarkReport:
    dataset: str
    rows: list[VideoScore]
    srcc: float
    plcc: float
    ablation: dict[str, dict[str, float]]
    stats: dict[str, CorpusStats]
    config: dict
    mos: list[float] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    elapsed_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "srcc": self.srcc,
            "plcc": self.plcc,
            "scored_count": len(self.rows),
            "skipped": self.skipped,
            "elapsed_seconds": self.elapsed_seconds,
            "config": self.config,
            "stats": {
                tag: {"mean": s.mean, "std": s.std, "sample_count": s.sample_count}
                for tag, s in self.stats.items()
            },
            "ablation": self.ablation,
            "rows": [
                {
                    "video_id": r.video_id,
                    "mos": self.mos[i] if i < len(self.mos) else None,
                    "q_a": r.q_a, "q_s": r.q_s, "q_t": r.q_t,
                    "q_unified": r.q_unified,
                    "raw_niqe": r.raw_niqe, "raw_tpqi": r.raw_tpqi,
                    "da_values": r.da_values,
                    "flags": r.flags,
                }
                for i, r in enumerate(self.rows)
            ],
        }


REPORT_SCHEMA = {
    "type": "object",
    "required": ["dataset", "srcc", "plcc", "scored_count", "ablation", "rows",
                 "stats", "config", "skipped", "elapsed_seconds"],
    "properties": {
        "dataset": {"type": "string"},
        "srcc": {"type": "number", "minimum": -1, "maximum": 1},
        "plcc": {"type": "number", "minimum": -1, "maximum": 1},
        "scored_count": {"type": "integer", "minimum": 0},
        "skipped": {"type": "array", "items": {"type": "string"}},
        "elapsed_seconds": {"type": "number"},
        "config": {"type": "object"},
        "stats": {"type": "object"},
        "ablation": {
            "type": "object",
            "minProperties": 7,
            "additionalProperties": {
                "type": "object",
                "required": ["srcc", "plcc"],
                "properties": {
                    "srcc": {"type": "number"},
                    "plcc": {"type": "number"},
                },
            },
        },
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["video_id", "q_a", "q_s", "q_t", "q_unified"],
            },
        },
    },
}


def ablation_grid(rows: list[VideoScore], mos: list[float],
                  combine: Combine = Combine.ADDITION,
                  plcc_fit: str = "none") -> dict[str, dict[str, float]]:
    """SRCC/PLCC for every non-empty subset of the three components."""
    grid = {}
    for r in range(1, len(_COMPONENTS) + 1):
        for subset in combinations(_COMPONENTS, r):
            vals = []
            for row in rows:
                parts = [getattr(row, c) for c in subset]
                vals.append(float(np.prod(parts)) if combine is Combine.MULTIPLICATION
                            else float(np.sum(parts)))
            key = "+".join(subset)
            grid[key] = {"srcc": srcc(vals, mos), "plcc": plcc(vals, mos, plcc_fit)}
    return grid


def run_benchmark(manifest: DatasetManifest, ctx: ScoringContext,
                  stats: dict[str, CorpusStats] | None = None,
                  view_config: ViewConfig | None = None,
                  plcc_fit: str = "none",
                  workers: int = 1,
                  skip_undecodable: bool = True) -> BenchmarkReport:
    """Score every manifest entry and correlate against MOS."""
    start = time.monotonic()
    videos = []
    mos_by_id = {}
    skipped = []
    for path, mos in manifest.entries:
        try:
            frames, fps = decode_video(path)
            views = make_views(frames, fps, view_config)
        except (BlindVqaError, FileNotFoundError, OSError) as exc:
            if not skip_undecodable:
                raise
            skipped.append(f"{path}: {exc}")
            continue
        videos.append((path, views))
        mos_by_id[path] = mos
    if len(videos) < 2:
        raise InsufficientDataError(
            f"only {len(videos)} of {len(manifest.entries)} entries scored"
        )
    rows, used_stats = score_corpus(videos, ctx, stats=stats, workers=workers)
    mos_list = [mos_by_id[r.video_id] for r in rows]
    unified = [r.q_unified for r in rows]
    return BenchmarkReport(
        dataset=manifest.name,
        rows=rows,
        srcc=srcc(unified, mos_list),
        plcc=plcc(unified, mos_list, plcc_fit),
        ablation=ablation_grid(rows, mos_list, ctx.strategy.combine, plcc_fit),
        stats=used_stats,
        mos=mos_list,
        config={
            "aggregation": ctx.strategy.name,
            "plcc_fit": plcc_fit,
            "semantic_scale": ctx.semantic_scale,
            "pool_frame_scores": ctx.pool_frame_scores,
            "prompt_pairs": [(p.positive_text, p.negative_text) for p in ctx.prompt_pairs],
            "workers": workers,
        },
        skipped=skipped,
        elapsed_seconds=time.monotonic() - start,
    )


def write_report_csv(path: str, report: BenchmarkReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["video_id", "q_a", "q_s", "q_t", "q_unified",
                         "raw_niqe", "raw_tpqi", "flags"])
        for r in report.rows:
            writer.writerow([r.video_id, r.q_a, r.q_s, r.q_t, r.q_unified,
                             r.raw_niqe, r.raw_tpqi, ";".join(r.flags)])


def write_scatter_svg(path: str, unified: list[float], mos: list[float],
                      title: str = "") -> None:
    """Minimal scatter plot of unified score vs MOS, one SVG file."""
    xs = np.array(unified, dtype=np.float64)
    ys = np.array(mos, dtype=np.float64)
    w, h, pad = 480, 360, 40

    def sx(v):
        return pad + (v - xs.min()) / max(np.ptp(xs), 1e-12) * (w - 2 * pad)

    def sy(v):
        return h - pad - (v - ys.min()) / max(np.ptp(ys), 1e-12) * (h - 2 * pad)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
             f'<rect width="{w}" height="{h}" fill="white"/>',
             f'<text x="{w/2}" y="16" text-anchor="middle">{title}</text>']
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" fill="steelblue"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
