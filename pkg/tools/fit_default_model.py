"""Fit the packaged pristine NIQE model from the scikit-image photo corpus.

Regenerate with:  python3 tools/fit_default_model.py
"""

import os
import sys

import numpy as np
import skimage.data as data

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from blindvqa.frames import rgb_to_luma, validate_frame
from blindvqa.niqe import fit_pristine_model, save_niqe_model

# sharp, good-quality photographs only; low-contrast / blurry images
# (moon, clock, page) bias the pristine statistics and are excluded
CORPUS_LOADERS = [
    data.astronaut, data.camera, data.coffee, data.chelsea, data.rocket,
    data.hubble_deep_field, data.immunohistochemistry, data.retina,
    data.brick, data.grass, data.gravel, data.coins,
]


def load_corpus():
    corpus = []
    for loader in CORPUS_LOADERS:
        img = np.asarray(loader(), dtype=np.float64)
        if img.ndim == 3:
            img = rgb_to_luma(validate_frame(img[:, :, :3]))
        corpus.append(img)
        corpus.append(img[:, ::-1])  # mirrored copy doubles the patch pool
    return corpus


def main():
    out = os.path.join(os.path.dirname(__file__), "..", "src", "blindvqa",
                       "data", "niqe_model.txt")
    corpus = load_corpus()
    model = fit_pristine_model(corpus, min_images=10)
    save_niqe_model(os.path.abspath(out), model)
    print(f"fitted model from {len(corpus)} images -> {os.path.abspath(out)}")


if __name__ == "__main__":
    main()
