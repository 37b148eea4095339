"""Semantic affinity index: prompt-pair cosine affinity over frame embeddings.

The index is the sum over prompt pairs of sigmoid(positive affinity minus
negative affinity). The raw cosine difference goes into the sigmoid directly;
no corpus normalization is applied to this branch.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEmbeddingError, EmptyInputError, ModelFileError

DEFAULT_PROMPT_PAIRS = [
    ("high quality", "low quality"),
    ("a good photo", "a bad photo"),
]


@dataclass
class PromptPair:
    positive_text: str
    negative_text: str
    positive_embedding: np.ndarray
    negative_embedding: np.ndarray

    def __post_init__(self):
        if not self.positive_text or not self.negative_text:
            raise ModelFileError("prompt texts must be non-empty")
        p = np.asarray(self.positive_embedding, dtype=np.float64)
        n = np.asarray(self.negative_embedding, dtype=np.float64)
        if p.shape != n.shape or p.ndim != 1:
            raise DegenerateEmbeddingError("prompt embeddings must be 1-D with equal dimension")
        self.positive_embedding = p
        self.negative_embedding = n


def _check_embedding(vec: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(vec, dtype=np.float64)
    if v.ndim != 1:
        raise DegenerateEmbeddingError(f"embedding must be 1-D, got shape {v.shape}")
    if dim is not None and v.size != dim:
        raise DegenerateEmbeddingError(f"dimension mismatch: {v.size} != {dim}")
    if not np.all(np.isfinite(v)):
        raise DegenerateEmbeddingError("embedding contains non-finite values")
    if np.linalg.norm(v) == 0.0:
        raise DegenerateEmbeddingError("zero-norm embedding")
    return v


def affinity(frame_embeddings: list[np.ndarray], text_embedding: np.ndarray) -> float:
    """Mean cosine similarity between each frame embedding and the text."""
    if not frame_embeddings:
        raise EmptyInputError("no frame embeddings")
    t = _check_embedding(text_embedding)
    t = t / np.linalg.norm(t)
    cosines = []
    for f in frame_embeddings:
        v = _check_embedding(f, dim=t.size)
        cosines.append(float(np.dot(v, t) / np.linalg.norm(v)))
    # fsum: correctly rounded, so frame order cannot change the result
    return math.fsum(cosines) / len(frame_embeddings)


def differential_affinity(frame_embeddings: list[np.ndarray], pair: PromptPair) -> float:
    """Affinity to the positive prompt minus affinity to its negative acronym."""
    return affinity(frame_embeddings, pair.positive_embedding) - affinity(
        frame_embeddings, pair.negative_embedding
    )


def semantic_index(frame_embeddings: list[np.ndarray], pairs: list[PromptPair],
                   scale: float = 1.0) -> float:
    """Sum of sigmoid-remapped differential affinities over all prompt pairs.

    ``scale`` multiplies each differential affinity before the sigmoid
    (default 1, i.e. the raw cosine difference).
    """
    if not pairs:
        raise EmptyInputError("at least one prompt pair required")
    q = 0.0
    for pair in pairs:
        da = differential_affinity(frame_embeddings, pair)
        q += 1.0 / (1.0 + np.exp(-scale * da))
    return float(q)


# ---------------------------------------------------------------------------
# Embedding providers

class EmbeddingProvider:
    """Deterministic image/text embedding source with a fixed dimension."""

    dimension: int
    reentrant: bool = True

    def embed_image(self, frame: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def embed_text(self, text: str) -> np.ndarray:
        raise NotImplementedError


def frame_key(frame: np.ndarray) -> str:
    """Stable content key for a frame, used by the fixture provider."""
    arr = np.ascontiguousarray(np.round(np.asarray(frame, dtype=np.float64), 3))
    h = hashlib.sha1(arr.tobytes())
    h.update(str(arr.shape).encode())
    return h.hexdigest()


def read_embedding_fixture(path: str) -> dict[str, np.ndarray]:
    """Parse a fixture embedding file: one ``id D v1 .. vD`` record per line."""
    records: dict[str, np.ndarray] = {}
    dim = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 3:
                raise ModelFileError(f"{path}:{lineno}: truncated record")
            rid, d = parts[0], int(parts[1])
            if len(parts) - 2 != d:
                raise ModelFileError(f"{path}:{lineno}: declared dim {d}, got {len(parts) - 2}")
            if dim is None:
                dim = d
            elif d != dim:
                raise ModelFileError(f"{path}:{lineno}: inconsistent dimension {d} != {dim}")
            vec = np.array(parts[2:], dtype=np.float32).astype(np.float64)
            records[rid] = vec
    if not records:
        raise ModelFileError(f"{path}: empty fixture file")
    return records


def write_embedding_fixture(path: str, records: dict[str, np.ndarray]) -> None:
    with open(path, "w") as fh:
        for rid, vec in records.items():
            v = np.asarray(vec, dtype=np.float32)
            vals = " ".join(f"{x:.8g}" for x in v)
            fh.write(f"{rid} {v.size} {vals}\n")


class FixtureEmbeddingProvider(EmbeddingProvider):
    """Looks up precomputed embeddings: frames by content key, texts verbatim."""

    def __init__(self, path: str):
        self.records = read_embedding_fixture(path)
        self.dimension = next(iter(self.records.values())).size

    def _lookup(self, key: str) -> np.ndarray:
        try:
            return self.records[key]
        except KeyError:
            raise ModelFileError(f"no fixture embedding for id {key!r}") from None

    def embed_image(self, frame: np.ndarray) -> np.ndarray:
        return self._lookup(frame_key(frame))

    def embed_text(self, text: str) -> np.ndarray:
        return self._lookup(text_key(text))


def text_key(text: str) -> str:
    """Fixture record id for a prompt string (spaces are not record-safe)."""
    return "text:" + hashlib.sha1(text.encode()).hexdigest()


class TorchScriptEmbeddingProvider(EmbeddingProvider):
    """Runs an exported TorchScript image encoder; texts come from a fixture.

    The export bundle directory holds ``visual.pt``, ``metadata.json``
    (dimension, input resolution, channel normalization constants) and
    ``text_embeddings.txt`` in the fixture format above.
    """

    reentrant = False  # torchscript modules are not guaranteed thread-safe

    def __init__(self, bundle_dir: str):
        import json
        import os

        import torch

        meta_path = os.path.join(bundle_dir, "metadata.json")
        with open(meta_path) as fh:
            meta = json.load(fh)
        self.dimension = int(meta["embedding_dim"])
        self.resolution = int(meta.get("input_resolution", 224))
        self.mean = np.array(meta["normalization_mean"], dtype=np.float64)
        self.std = np.array(meta["normalization_std"], dtype=np.float64)
        self._torch = torch
        self._model = torch.jit.load(os.path.join(bundle_dir, "visual.pt")).eval()
        text_path = os.path.join(bundle_dir, "text_embeddings.txt")
        self._texts = read_embedding_fixture(text_path)
        dims = {v.size for v in self._texts.values()}
        if dims != {self.dimension}:
            raise ModelFileError("text fixture dimension does not match metadata")

    def embed_image(self, frame: np.ndarray) -> np.ndarray:
        from .frames import validate_frame

        arr = validate_frame(frame, channels=3)
        if arr.shape[:2] != (self.resolution, self.resolution):
            raise ModelFileError(
                f"expected {self.resolution}x{self.resolution} input, got {arr.shape[:2]}"
            )
        x = (arr / 255.0 - self.mean) / self.std
        t = self._torch.from_numpy(x.transpose(2, 0, 1)[None]).float()
        with self._torch.no_grad():
            out = self._model(t)
        return out.numpy().ravel().astype(np.float64)

    def embed_text(self, text: str) -> np.ndarray:
        key = text_key(text)
        if key in self._texts:
            return self._texts[key]
        if text in self._texts:
            return self._texts[text]
        raise ModelFileError(f"prompt {text!r} not in exported text embeddings")


def load_prompt_pairs(path: str, provider: EmbeddingProvider) -> list[PromptPair]:
    """Read tab-separated (positive, negative) prompt lines and embed them."""
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ModelFileError(f"{path}:{lineno}: expected two tab-separated prompts")
            pos, neg = parts[0].strip(), parts[1].strip()
            pairs.append(PromptPair(pos, neg, provider.embed_text(pos), provider.embed_text(neg)))
    if not pairs:
        raise ModelFileError(f"{path}: no prompt pairs")
    return pairs


def default_prompt_pairs(provider: EmbeddingProvider) -> list[PromptPair]:
    return [
        PromptPair(pos, neg, provider.embed_text(pos), provider.embed_text(neg))
        for pos, neg in DEFAULT_PROMPT_PAIRS
    ]
