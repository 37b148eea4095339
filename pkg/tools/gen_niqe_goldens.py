"""Independent NSS-feature oracle: recompute the 36-dim frame features and
raw scores for the golden fixtures along a second numerical route
(cv2 filtering, root-finding for the shape parameters, explicit block loops)
and freeze the results into tests/goldens/niqe_goldens.json.

Regenerate with:  python3 tools/gen_niqe_goldens.py
"""

import json
import os
import sys

import cv2
import numpy as np
import skimage.data as data
from scipy.optimize import brentq
from scipy.special import gamma as G

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

FIXTURES = ["immunohistochemistry", "retina", "brick", "grass", "gravel"]
PATCH = 96


def luma_of(name):
    img = np.asarray(getattr(data, name)(), dtype=np.float64)
    if img.ndim == 3:
        img = img[:, :, 0] * 0.299 + img[:, :, 1] * 0.587 + img[:, :, 2] * 0.114
    return np.clip(img, 0, 255)


def gaussian_kernel():
    x = np.arange(-3, 4, dtype=np.float64)
    g = np.exp(-(x**2) / (2 * (7.0 / 6.0) ** 2))
    k = np.outer(g, g)
    return k / k.sum()


def oracle_mscn(img):
    k = gaussian_kernel()
    mu = cv2.filter2D(img, -1, k, borderType=cv2.BORDER_REPLICATE)
    var = cv2.filter2D(img * img, -1, k, borderType=cv2.BORDER_REPLICATE) - mu * mu
    sigma = np.sqrt(np.maximum(var, 0))
    return (img - mu) / (sigma + 1.0), sigma


def ratio(a):
    return G(2.0 / a) ** 2 / (G(1.0 / a) * G(3.0 / a))


def solve_alpha(target):
    lo, hi = 0.2, 10.0
    if target <= ratio(lo):
        return lo
    if target >= ratio(hi):
        return hi
    return brentq(lambda a: ratio(a) - target, lo, hi, xtol=1e-10)


def oracle_ggd(x):
    x = x.ravel()
    alpha = solve_alpha(np.mean(np.abs(x)) ** 2 / np.mean(x**2))
    return [alpha, float(np.mean(x**2))]


def oracle_aggd(x):
    x = x.ravel()
    ls = np.sqrt(np.mean(x[x < 0] ** 2))
    rs = np.sqrt(np.mean(x[x > 0] ** 2))
    gh = ls / rs
    rhat = np.mean(np.abs(x)) ** 2 / np.mean(x**2)
    rnorm = rhat * (gh**3 + 1) * (gh + 1) / (gh**2 + 1) ** 2
    alpha = solve_alpha(rnorm)
    conv = np.sqrt(G(1 / alpha) / G(3 / alpha))
    bl, br = ls * conv, rs * conv
    eta = (br - bl) * G(2 / alpha) / G(1 / alpha)
    return [alpha, float(eta), float(bl), float(br)]


def patch18(mscn):
    feats = oracle_ggd(mscn)
    for dy, dx in ((0, 1), (1, 0), (1, 1), (1, -1)):
        prod = mscn * np.roll(np.roll(mscn, dy, axis=0), dx, axis=1)
        feats += oracle_aggd(prod)
    return feats


def half_scale(img):
    h, w = img.shape
    img = img[: h - h % 2, : w - w % 2]
    out = np.zeros((img.shape[0] // 2, img.shape[1] // 2))
    for i in range(out.shape[0]):
        for j in range(out.shape[1]):
            out[i, j] = img[2 * i:2 * i + 2, 2 * j:2 * j + 2].mean()
    return out


def oracle_features(img):
    h, w = img.shape
    hc, wc = h - h % PATCH, w - w % PATCH
    img = img[:hc, :wc]
    m1, sigma = oracle_mscn(img)
    m2, _ = oracle_mscn(half_scale(img))
    ny, nx = hc // PATCH, wc // PATCH
    sharp = np.zeros((ny, nx))
    for i in range(ny):
        for j in range(nx):
            sharp[i, j] = sigma[i * PATCH:(i + 1) * PATCH, j * PATCH:(j + 1) * PATCH].mean()
    thr = 0.75 * sharp.max()
    rows = []
    half = PATCH // 2
    for i in range(ny):
        for j in range(nx):
            if sharp[i, j] < thr:
                continue
            p1 = m1[i * PATCH:(i + 1) * PATCH, j * PATCH:(j + 1) * PATCH]
            p2 = m2[i * half:(i + 1) * half, j * half:(j + 1) * half]
            rows.append(patch18(p1) + patch18(p2))
    return np.array(rows)


def oracle_score(rows, mean, cov):
    nu = rows.mean(axis=0)
    c2 = np.cov(rows, rowvar=False)
    d = mean - nu
    inv = np.linalg.pinv((cov + c2) / 2.0, rcond=1e-10)
    return float(np.sqrt(max(d @ inv @ d, 0)))


def main():
    from blindvqa.niqe import load_niqe_model
    from blindvqa.service import default_model_path

    model = load_niqe_model(default_model_path())
    goldens = {}
    for name in FIXTURES:
        rows = oracle_features(luma_of(name))
        goldens[name] = {
            "features": rows.mean(axis=0).tolist(),
            "score": oracle_score(rows, model.mean, model.cov),
            "patch_count": int(rows.shape[0]),
        }
        print(name, "patches", rows.shape[0], "score %.4f" % goldens[name]["score"])
    out = os.path.join(os.path.dirname(__file__), "..", "tests", "goldens",
                       "niqe_goldens.json")
    os.makedirs(os.path.dirname(out), exist_ok=True)
    with open(out, "w") as fh:
        json.dump(goldens, fh, indent=1)
    print("wrote", os.path.abspath(out))


if __name__ == "__main__":
    main()
