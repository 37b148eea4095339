"""Spatial naturalness: natural-scene-statistics features and the pristine
multivariate-Gaussian distance score, reimplemented from scratch.

Per frame: locally normalized luminance (MSCN) coefficients are fitted with a
generalized Gaussian, their four orientation pairwise products with asymmetric
generalized Gaussians, over 96x96 patches at two scales (36 features). The
raw score is the Mahalanobis-style distance between the frame's patch
statistics and a pristine-corpus model; lower is more natural.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate
from scipy.special import gamma as gamma_fn

from .errors import (
    CorpusTooSmallError,
    DegenerateFitError,
    DegenerateFrameError,
    DegenerateStatsError,
    EmptyInputError,
    FrameShapeError,
    ModelFileError,
)
from .frames import validate_frame

WINDOW_SIZE = 7
WINDOW_SIGMA = 7.0 / 6.0
MSCN_C = 1.0                 # stabilizer on the [0, 255] intensity scale
PATCH_SIZE = 96
SHARPNESS_FRACTION = 0.75
ALPHA_GRID = np.arange(0.2, 10.0 + 1e-9, 0.001)
_R_GAM = (gamma_fn(2.0 / ALPHA_GRID) ** 2) / (
    gamma_fn(1.0 / ALPHA_GRID) * gamma_fn(3.0 / ALPHA_GRID)
)
FEATURE_DIM = 36


def _gaussian_window(size: int = WINDOW_SIZE, sigma: float = WINDOW_SIGMA) -> np.ndarray:
    half = size // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    win = np.outer(g, g)
    return win / win.sum()

_WINDOW = _gaussian_window()


def _local_stats(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu = correlate(img, _WINDOW, mode="nearest")
    var = correlate(img * img, _WINDOW, mode="nearest") - mu * mu
    sigma = np.sqrt(np.maximum(var, 0.0))
    return mu, sigma


def compute_mscn(luma: np.ndarray, return_sigma: bool = False):
    """Mean-subtracted contrast-normalized coefficients of a luma frame."""
    img = validate_frame(luma, channels=1)
    if min(img.shape) < WINDOW_SIZE:
        raise FrameShapeError(f"frame {img.shape} smaller than {WINDOW_SIZE}x{WINDOW_SIZE} window")
    mu, sigma = _local_stats(img)
    mscn = (img - mu) / (sigma + MSCN_C)
    if return_sigma:
        return mscn, sigma
    return mscn


def fit_ggd(samples: np.ndarray) -> tuple[float, float]:
    """Moment-matching generalized Gaussian fit: (shape alpha, variance)."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 100:
        raise DegenerateFitError(f"need >= 100 samples, got {x.size}")
    if np.var(x) == 0.0:
        raise DegenerateFitError("zero-variance samples")
    second = np.mean(x**2)
    rhat = np.mean(np.abs(x)) ** 2 / second
    alpha = float(ALPHA_GRID[np.argmin((_R_GAM - rhat) ** 2)])
    return alpha, float(second)


def fit_aggd(samples: np.ndarray) -> tuple[float, float, float, float]:
    """Asymmetric GGD fit: (alpha, mean parameter eta, beta_left, beta_right)."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 100:
        raise DegenerateFitError(f"need >= 100 samples, got {x.size}")
    neg = x[x < 0]
    pos = x[x > 0]
    if neg.size == 0 or pos.size == 0:
        raise DegenerateFitError("one-sided samples")
    left_std = np.sqrt(np.mean(neg**2))
    right_std = np.sqrt(np.mean(pos**2))
    gammahat = left_std / right_std
    rhat = np.mean(np.abs(x)) ** 2 / np.mean(x**2)
    rhatnorm = rhat * (gammahat**3 + 1.0) * (gammahat + 1.0) / (gammahat**2 + 1.0) ** 2
    alpha = float(ALPHA_GRID[np.argmin((_R_GAM - rhatnorm) ** 2)])
    ratio = np.sqrt(gamma_fn(1.0 / alpha) / gamma_fn(3.0 / alpha))
    beta_l = float(left_std * ratio)
    beta_r = float(right_std * ratio)
    eta = float((beta_r - beta_l) * gamma_fn(2.0 / alpha) / gamma_fn(1.0 / alpha))
    return alpha, eta, beta_l, beta_r


_SHIFTS = ((0, 1), (1, 0), (1, 1), (1, -1))  # H, V, D1, D2


def _patch_features(mscn: np.ndarray) -> np.ndarray:
    """18 scale-level features of one MSCN patch (GGD + 4 orientation AGGDs)."""
    feats = list(fit_ggd(mscn))
    for dy, dx in _SHIFTS:
        products = mscn * np.roll(np.roll(mscn, dy, axis=0), dx, axis=1)
        feats.extend(fit_aggd(products))
    return np.array(feats)


def _half_scale(img: np.ndarray) -> np.ndarray:
    h, w = img.shape
    img = img[: h - h % 2, : w - w % 2]
    return 0.25 * (img[0::2, 0::2] + img[1::2, 0::2] + img[0::2, 1::2] + img[1::2, 1::2])


def niqe_features(luma: np.ndarray, patch_size: int = PATCH_SIZE,
                  sharpness_fraction: float = SHARPNESS_FRACTION
                  ) -> tuple[np.ndarray, np.ndarray]:
    """36-dim NSS features of one frame: (mean vector, per-patch matrix).

    Frames whose min dimension is below 2*patch_size fall back to a single
    whole-frame patch.
    """
    img = validate_frame(luma, channels=1)
    h, w = img.shape

    if min(h, w) < 2 * patch_size:
        mscn1 = compute_mscn(img)
        mscn2 = compute_mscn(_half_scale(img))
        row = np.concatenate([_patch_features(mscn1), _patch_features(mscn2)])
        return row.copy(), row[None, :]

    hc, wc = h - h % patch_size, w - w % patch_size
    img = img[:hc, :wc]
    mscn1, sigma = compute_mscn(img, return_sigma=True)
    mscn2 = compute_mscn(_half_scale(img))

    ny, nx = hc // patch_size, wc // patch_size
    sharpness = np.array([
        [sigma[i * patch_size:(i + 1) * patch_size,
               j * patch_size:(j + 1) * patch_size].mean() for j in range(nx)]
        for i in range(ny)
    ])
    threshold = sharpness_fraction * sharpness.max()
    half = patch_size // 2

    rows = []
    for i in range(ny):
        for j in range(nx):
            if sharpness[i, j] < threshold:
                continue
            p1 = mscn1[i * patch_size:(i + 1) * patch_size,
                       j * patch_size:(j + 1) * patch_size]
            p2 = mscn2[i * half:(i + 1) * half, j * half:(j + 1) * half]
            try:
                rows.append(np.concatenate([_patch_features(p1), _patch_features(p2)]))
            except DegenerateFitError:
                continue
    if not rows:
        raise DegenerateFrameError("no selectable patches")
    patch_feats = np.array(rows)
    return patch_feats.mean(axis=0), patch_feats


@dataclass
class NiqeModel:
    mean: np.ndarray        # (36,)
    cov: np.ndarray         # (36, 36), symmetric PSD

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.cov = np.asarray(self.cov, dtype=np.float64)
        validate_model(self.mean, self.cov)


def validate_model(mean: np.ndarray, cov: np.ndarray) -> None:
    if mean.shape != (FEATURE_DIM,) or cov.shape != (FEATURE_DIM, FEATURE_DIM):
        raise ModelFileError(f"bad model shapes {mean.shape}, {cov.shape}")
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
        raise ModelFileError("non-finite model values")
    if np.abs(cov - cov.T).max() > 1e-9:
        raise ModelFileError("covariance not symmetric")
    eigvals = np.linalg.eigvalsh(cov)
    if eigvals.min() < -1e-8:
        raise ModelFileError(f"covariance not PSD (min eigenvalue {eigvals.min():.3g})")


def save_niqe_model(path: str, model: NiqeModel) -> None:
    with open(path, "w") as fh:
        fh.write(f"NIQE-MVG {FEATURE_DIM}\n")
        fh.write(" ".join(f"{v:.12g}" for v in model.mean) + "\n")
        for row in model.cov:
            fh.write(" ".join(f"{v:.12g}" for v in row) + "\n")


def load_niqe_model(path: str) -> NiqeModel:
    with open(path) as fh:
        header = fh.readline().split()
        if header != ["NIQE-MVG", str(FEATURE_DIM)]:
            raise ModelFileError(f"{path}: bad header {header!r}")
        values = np.loadtxt(fh)
    if values.shape != (FEATURE_DIM + 1, FEATURE_DIM):
        raise ModelFileError(f"{path}: expected {FEATURE_DIM + 1} rows of {FEATURE_DIM}")
    # symmetrize away text round-off before validation
    cov = (values[1:] + values[1:].T) / 2.0
    return NiqeModel(mean=values[0], cov=cov)


def niqe_score(patch_features: np.ndarray, model: NiqeModel) -> float:
    """Distance between frame patch statistics and the pristine model."""
    feats = np.asarray(patch_features, dtype=np.float64)
    if feats.ndim == 1:
        feats = feats[None, :]
    if not np.all(np.isfinite(feats)):
        raise DegenerateFrameError("non-finite frame features")
    nu2 = feats.mean(axis=0)
    cov2 = np.cov(feats, rowvar=False) if feats.shape[0] > 1 else np.zeros((FEATURE_DIM, FEATURE_DIM))
    d = model.mean - nu2
    pooled = (model.cov + cov2) / 2.0
    inv = np.linalg.pinv(pooled, rcond=1e-10)
    return float(np.sqrt(max(d @ inv @ d, 0.0)))


def score_frame(luma: np.ndarray, model: NiqeModel) -> float:
    _, patch_feats = niqe_features(luma)
    return niqe_score(patch_feats, model)


def fit_pristine_model(corpus: list[np.ndarray], min_images: int = 10) -> NiqeModel:
    """Fit the pristine mean/covariance from a corpus of luma images."""
    if len(corpus) < min_images:
        raise CorpusTooSmallError(f"need >= {min_images} images, got {len(corpus)}")
    all_rows = []
    usable = 0
    for img in corpus:
        try:
            _, rows = niqe_features(img)
        except (DegenerateFrameError, FrameShapeError):
            continue
        all_rows.append(rows)
        usable += 1
    if usable < min_images:
        raise CorpusTooSmallError(f"only {usable} images yielded selectable patches")
    feats = np.vstack(all_rows)
    if feats.shape[0] < 2:
        raise CorpusTooSmallError("not enough patches for a covariance estimate")
    mean = feats.mean(axis=0)
    # population covariance: duplicating the corpus must not change the model
    cov = np.cov(feats, rowvar=False, bias=True)
    # clip tiny negative eigenvalues from finite-sample round-off
    eigvals, eigvecs = np.linalg.eigh((cov + cov.T) / 2.0)
    cov = (eigvecs * np.maximum(eigvals, 0.0)) @ eigvecs.T
    return NiqeModel(mean=mean, cov=(cov + cov.T) / 2.0)


def spatial_index(raw_scores: list[float], mean: float, std: float) -> float:
    """Negative-sigmoid remap of per-frame raw scores, averaged over frames."""
    if not raw_scores:
        raise EmptyInputError("no frame scores")
    if std <= 0:
        raise DegenerateStatsError("std must be positive")
    z = (np.asarray(raw_scores, dtype=np.float64) - mean) / std
    return float(np.mean(1.0 / (1.0 + np.exp(z))))
