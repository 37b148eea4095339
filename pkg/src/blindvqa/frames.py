"""Video ingestion: frame validation, deterministic sampling, resizing, views.

Frames are numpy float64 arrays in [0, 255]: shape (H, W) for luma, (H, W, 3)
for RGB. Every operation here is a pure function, so per-video view
construction can run in parallel without locks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInputError, FrameShapeError

AESTHETIC_FRAMES = 32
AESTHETIC_SIZE = 224          # square, matches the visual encoder input
TEMPORAL_SHORT = 270
TEMPORAL_LONG = 480


def validate_frame(frame: np.ndarray, channels: int | None = None) -> np.ndarray:
    """Check shape/range invariants and return the frame as float64."""
    arr = np.asarray(frame, dtype=np.float64)
    if arr.ndim == 2:
        ch = 1
    elif arr.ndim == 3 and arr.shape[2] == 3:
        ch = 3
    else:
        raise FrameShapeError(f"expected (H,W) or (H,W,3) frame, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise FrameShapeError(f"degenerate frame dimensions {arr.shape}")
    if channels is not None and ch != channels:
        raise FrameShapeError(f"expected {channels}-channel frame, got {ch}")
    if not np.all(np.isfinite(arr)):
        raise FrameShapeError("frame contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 255.0:
        raise FrameShapeError("frame values outside [0, 255]")
    return arr


@dataclass
class ViewConfig:
    aesthetic_frames: int = AESTHETIC_FRAMES
    aesthetic_size: int = AESTHETIC_SIZE
    temporal_short: int = TEMPORAL_SHORT
    temporal_long: int = TEMPORAL_LONG


@dataclass
class VideoViews:
    """The three per-video sampled representations consumed downstream."""

    aesthetic: list[np.ndarray]   # N frames, 224x224 RGB
    spatial: list[np.ndarray]     # one native-resolution frame per second
    temporal: list[np.ndarray]    # all frames, 270x480 luma
    duration_seconds: int = 0
    native_frame_count: int = 0
    spatial_indices: list[int] = field(default_factory=list)


def sample_uniform_indices(total_frames: int, samples: int) -> list[int]:
    """Centered uniform sampling: idx_i = floor((i + 0.5) * M / N).

    Symmetric coverage; never systematically favors the first/last frame.
    Repeats indices when N > M.
    """
    if total_frames < 1 or samples < 1:
        raise EmptyInputError("total_frames and samples must be >= 1")
    idx = np.floor((np.arange(samples) + 0.5) * total_frames / samples).astype(int)
    return np.minimum(idx, total_frames - 1).tolist()


def _cubic_weights(t: np.ndarray, a: float = -0.5) -> np.ndarray:
    """Catmull-Rom cubic kernel weights for the 4 taps at offsets -1..2."""
    # t in [0,1): distance from the left-center tap
    d = np.stack([t + 1.0, t, 1.0 - t, 2.0 - t], axis=-1)
    ad = np.abs(d)
    w = np.where(
        ad <= 1.0,
        (a + 2.0) * ad**3 - (a + 3.0) * ad**2 + 1.0,
        np.where(ad < 2.0, a * ad**3 - 5.0 * a * ad**2 + 8.0 * a * ad - 4.0 * a, 0.0),
    )
    return w


def _resize_matrix(src: int, dst: int) -> np.ndarray:
    """Dense (dst, src) interpolation matrix for 1-D Catmull-Rom resampling."""
    scale = src / dst
    pos = (np.arange(dst) + 0.5) * scale - 0.5
    base = np.floor(pos).astype(int)
    t = pos - base
    w = _cubic_weights(t)  # (dst, 4)
    mat = np.zeros((dst, src))
    for k in range(4):
        cols = np.clip(base - 1 + k, 0, src - 1)
        np.add.at(mat, (np.arange(dst), cols), w[:, k])
    return mat


def resize_bicubic(frame: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    """Separable Catmull-Rom (a = -0.5) resize, clamped to [0, 255]."""
    if target_w < 1 or target_h < 1:
        raise FrameShapeError("target dimensions must be >= 1")
    arr = validate_frame(frame)
    h, w = arr.shape[:2]
    if (h, w) == (target_h, target_w):
        return arr.copy()
    mh = _resize_matrix(h, target_h)
    mw = _resize_matrix(w, target_w)
    if arr.ndim == 2:
        out = mh @ arr @ mw.T
    else:
        out = np.stack([mh @ arr[:, :, c] @ mw.T for c in range(arr.shape[2])], axis=2)
    return np.clip(out, 0.0, 255.0)


def rgb_to_luma(frame: np.ndarray) -> np.ndarray:
    """BT.601 luma: Y = 0.299 R + 0.587 G + 0.114 B, clamped to [0, 255]."""
    arr = validate_frame(frame, channels=3)
    y = arr[:, :, 0] * 0.299 + arr[:, :, 1] * 0.587 + arr[:, :, 2] * 0.114
    return np.clip(y, 0.0, 255.0)


def luma_to_rgb(frame: np.ndarray) -> np.ndarray:
    arr = validate_frame(frame, channels=1)
    return np.repeat(arr[:, :, None], 3, axis=2)


def spatial_frame_indices(total_frames: int, fps: float) -> list[int]:
    """1 fps selection: index floor(k * fps), k = 0 .. ceil(M/fps) - 1.

    Sub-second videos still yield one frame.
    """
    if total_frames < 1:
        raise EmptyInputError("no frames")
    if fps <= 0:
        raise FrameShapeError("fps must be positive")
    seconds = max(1, int(np.ceil(total_frames / fps)))
    return [min(int(np.floor(k * fps)), total_frames - 1) for k in range(seconds)]


def _temporal_dims(h: int, w: int, cfg: ViewConfig) -> tuple[int, int]:
    # landscape -> 270x480; portrait keeps the stated intent by swapping
    if h <= w:
        return cfg.temporal_short, cfg.temporal_long
    return cfg.temporal_long, cfg.temporal_short


def make_views(decoded_frames: list[np.ndarray], fps: float,
               config: ViewConfig | None = None) -> VideoViews:
    """Build the aesthetic / spatial / temporal views of one video."""
    if not decoded_frames:
        raise EmptyInputError("no decoded frames")
    if fps <= 0:
        raise FrameShapeError("fps must be positive")
    cfg = config or ViewConfig()
    frames = [validate_frame(f) for f in decoded_frames]
    m = len(frames)

    aes_idx = sample_uniform_indices(m, cfg.aesthetic_frames)
    aesthetic = []
    for i in aes_idx:
        f = frames[i]
        rgb = f if f.ndim == 3 else luma_to_rgb(f)
        aesthetic.append(resize_bicubic(rgb, cfg.aesthetic_size, cfg.aesthetic_size))

    sp_idx = spatial_frame_indices(m, fps)
    spatial = [frames[i].copy() for i in sp_idx]

    th, tw = _temporal_dims(frames[0].shape[0], frames[0].shape[1], cfg)
    temporal = []
    for f in frames:
        luma = rgb_to_luma(f) if f.ndim == 3 else f
        temporal.append(resize_bicubic(luma, tw, th))

    return VideoViews(
        aesthetic=aesthetic,
        spatial=spatial,
        temporal=temporal,
        duration_seconds=len(sp_idx),
        native_frame_count=m,
        spatial_indices=sp_idx,
    )
