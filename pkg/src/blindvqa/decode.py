"""Narrow decoder boundary: turn a path into (frames, fps) and nothing else.

Two backends: the plain-text raw fixture format used throughout the tests
(header line ``W H C M FPS`` followed by M*W*H*C whitespace-separated values,
row-major per frame), and OpenCV for container formats. The library core
never touches container parsing beyond this module.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import EmptyInputError, ModelFileError
from .frames import validate_frame

RAW_SUFFIXES = (".rawvid", ".raw.txt", ".rawvid.txt")


def read_raw_video(path: str) -> tuple[list[np.ndarray], float]:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 5:
            raise ModelFileError(f"{path}: bad raw-video header {header!r}")
        w, h, c, m = (int(v) for v in header[:4])
        fps = float(header[4])
        if w < 1 or h < 1 or c not in (1, 3) or m < 1 or fps <= 0:
            raise ModelFileError(f"{path}: invalid raw-video dimensions {header!r}")
        data = np.loadtxt(fh).ravel()
    expected = m * w * h * c
    if data.size != expected:
        raise ModelFileError(f"{path}: expected {expected} values, got {data.size}")
    shape = (h, w) if c == 1 else (h, w, 3)
    frames = [validate_frame(f.reshape(shape)) for f in data.reshape(m, -1)]
    return frames, fps


def write_raw_video(path: str, frames: list[np.ndarray], fps: float) -> None:
    if not frames:
        raise EmptyInputError("no frames to write")
    first = validate_frame(frames[0])
    h, w = first.shape[:2]
    c = 1 if first.ndim == 2 else 3
    with open(path, "w") as fh:
        fh.write(f"{w} {h} {c} {len(frames)} {fps}\n")
        for f in frames:
            arr = validate_frame(f)
            if arr.shape != first.shape:
                raise ModelFileError("all frames must share one shape")
            np.savetxt(fh, arr.ravel()[None, :], fmt="%.4f")


def _read_with_opencv(path: str) -> tuple[list[np.ndarray], float]:
    import cv2

    cap = cv2.VideoCapture(path)
    if not cap.isOpened():
        raise ModelFileError(f"cannot open video {path}")
    fps = cap.get(cv2.CAP_PROP_FPS) or 30.0
    frames: list[np.ndarray] = []
    while True:
        ok, bgr = cap.read()
        if not ok:
            break
        frames.append(np.asarray(bgr[:, :, ::-1], dtype=np.float64))
    cap.release()
    if not frames:
        raise EmptyInputError(f"no decodable frames in {path}")
    return frames, float(fps)


def decode_video(path: str) -> tuple[list[np.ndarray], float]:
    """Decode a video file into (frames, fps)."""
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    if path.endswith(RAW_SUFFIXES):
        return read_raw_video(path)
    return _read_with_opencv(path)
