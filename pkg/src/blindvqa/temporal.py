"""Temporal naturalness: perceptual-domain trajectory curvature.

Each frame is mapped through simulated early-visual responses (a retinal/LGN
band-pass stage and a V1 Gabor-energy stage); the video traces a trajectory
in each response space. The raw score is the mean of the two domains'
log mean curvatures; lower means a straighter, more natural trajectory.

Both transforms implement PerceptualDomainTransform, so a different response
simulation can be dropped in without touching curvature or aggregation code.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np
from scipy.ndimage import gaussian_filter, uniform_filter

from .errors import DegenerateStatsError, FrameShapeError
from .frames import validate_frame

CURVATURE_EPS = 1e-8

LGN_CENTER_SIGMA = 1.0
LGN_SURROUND_SIGMA = 2.0
LGN_NORM_WINDOW = 9

V1_ORIENTATIONS = (0.0, 45.0, 90.0, 135.0)
V1_WAVELENGTHS = (4.0, 8.0)


class PerceptualDomainTransform:
    """Maps one luma frame to a flattened response vector."""

    domain_tag: str

    def __call__(self, luma: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class LgnTransform(PerceptualDomainTransform):
    domain_tag = "LGN"

    def __call__(self, luma: np.ndarray) -> np.ndarray:
        return lgn_response(luma)


class V1Transform(PerceptualDomainTransform):
    domain_tag = "V1"

    def __call__(self, luma: np.ndarray) -> np.ndarray:
        return v1_response(luma)


def lgn_response(luma: np.ndarray) -> np.ndarray:
    """Luminance compression, center-surround band-pass, divisive norm."""
    img = validate_frame(luma, channels=1)
    compressed = np.sqrt(img / 255.0)
    bandpass = gaussian_filter(compressed, LGN_CENTER_SIGMA, mode="nearest") - \
        gaussian_filter(compressed, LGN_SURROUND_SIGMA, mode="nearest")
    local_mean = uniform_filter(np.abs(bandpass), LGN_NORM_WINDOW, mode="nearest")
    return (bandpass / (1.0 + local_mean)).ravel()


def _gabor_bank() -> list[np.ndarray]:
    kernels = []
    for wavelength in V1_WAVELENGTHS:
        sigma = 0.56 * wavelength
        ksize = 2 * int(np.ceil(3.0 * sigma)) + 1
        for theta_deg in V1_ORIENTATIONS:
            theta = np.deg2rad(theta_deg)
            even = cv2.getGaborKernel((ksize, ksize), sigma, theta, wavelength, 0.5, psi=0.0)
            odd = cv2.getGaborKernel((ksize, ksize), sigma, theta, wavelength, 0.5,
                                     psi=np.pi / 2.0)
            # remove DC so constant inputs give zero energy
            kernels.append((even - even.mean(), odd - odd.mean()))
    return kernels

_GABOR_BANK = _gabor_bank()


def v1_response(luma: np.ndarray) -> np.ndarray:
    """Gabor energy over 4 orientations x 2 scales with divisive normalization."""
    img = validate_frame(luma, channels=1) / 255.0
    energies = []
    for even, odd in _GABOR_BANK:
        re = cv2.filter2D(img, -1, even, borderType=cv2.BORDER_REPLICATE)
        im = cv2.filter2D(img, -1, odd, borderType=cv2.BORDER_REPLICATE)
        energies.append(np.sqrt(re * re + im * im))
    stack = np.stack(energies)                     # (8, H, W)
    total = stack.sum(axis=0)
    normalized = stack / (1.0 + total)
    return normalized.ravel()


@dataclass
class CurvatureSeries:
    """Per-triplet turning angles in radians, [0, pi]."""

    values: np.ndarray
    degenerate_count: int = 0

    def mean(self) -> float:
        if self.values.size == 0:
            return 0.0
        return float(self.values.mean())


@dataclass
class RawTpqiScore:
    value: float
    clamped: bool = False   # set when a domain's mean curvature hit the floor


def trajectory_curvature(points: list[np.ndarray] | np.ndarray) -> CurvatureSeries:
    """Turning angle between consecutive difference vectors of a trajectory.

    Triplets where either difference vector has near-zero norm (static frames)
    are skipped and counted as degenerate.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise FrameShapeError("trajectory needs >= 3 points of equal dimension")
    diffs = np.diff(pts, axis=0)
    norms = np.linalg.norm(diffs, axis=1)
    angles = []
    degenerate = 0
    for j in range(len(diffs) - 1):
        if norms[j] < CURVATURE_EPS or norms[j + 1] < CURVATURE_EPS:
            degenerate += 1
            continue
        cosine = np.dot(diffs[j], diffs[j + 1]) / (norms[j] * norms[j + 1])
        angles.append(np.arccos(np.clip(cosine, -1.0, 1.0)))
    return CurvatureSeries(values=np.array(angles), degenerate_count=degenerate)


def tpqi_score(lgn_curv: CurvatureSeries, v1_curv: CurvatureSeries) -> RawTpqiScore:
    """Average of the two domains' natural-log mean curvatures."""
    means = [max(c.mean(), CURVATURE_EPS) for c in (v1_curv, lgn_curv)]
    clamped = any(c.mean() <= CURVATURE_EPS for c in (v1_curv, lgn_curv))
    value = float((np.log(means[0]) + np.log(means[1])) / 2.0)
    return RawTpqiScore(value=value, clamped=clamped)


def video_tpqi(temporal_frames: list[np.ndarray],
               lgn: PerceptualDomainTransform | None = None,
               v1: PerceptualDomainTransform | None = None
               ) -> tuple[RawTpqiScore, CurvatureSeries, CurvatureSeries]:
    """Raw temporal score plus both curvature series for one video."""
    lgn = lgn or LgnTransform()
    v1 = v1 or V1Transform()
    lgn_traj = np.stack([lgn(f) for f in temporal_frames])
    v1_traj = np.stack([v1(f) for f in temporal_frames])
    lgn_curv = trajectory_curvature(lgn_traj)
    v1_curv = trajectory_curvature(v1_traj)
    return tpqi_score(lgn_curv, v1_curv), lgn_curv, v1_curv


def temporal_index(raw: float, mean: float, std: float) -> float:
    """Negative-sigmoid remap of the raw temporal score into (0, 1)."""
    if std <= 0:
        raise DegenerateStatsError("std must be positive")
    return float(1.0 / (1.0 + np.exp((raw - mean) / std)))
