"""Export a pretrained vision-language model to the scoring bundle format.

The bundle directory holds the TorchScript image-encoder graph (visual.pt),
metadata.json (embedding dimension, input resolution, channel normalization
constants), text_embeddings.txt (one fixture record per unique prompt, the
format the scoring package's fixture provider reads) and manifest.txt with
sha256 content hashes for integrity checking.

Only the image encoder is exported as a graph; the text encoder is exercised
once here to precompute the handful of prompt embeddings, so the scoring
runtime never needs a text model or tokenizer.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np
import torch

from blindvqa import text_key, write_embedding_fixture

# channel normalization used by the pretrained joint-embedding models
CLIP_IMAGE_MEAN = (0.48145466, 0.4578275, 0.40821073)
CLIP_IMAGE_STD = (0.26862954, 0.26130258, 0.27577711)

DEFAULT_PROMPTS = [
    ("high quality", "low quality"),
    ("a good photo", "a bad photo"),
]

BUNDLE_FILES = ("visual.pt", "metadata.json", "text_embeddings.txt")


class IntegrityError(ValueError):
    """Weight or bundle content does not match its expected checksum."""


@dataclass
class ExportBundle:
    directory: str
    embedding_dim: int
    input_resolution: int
    prompt_count: int


class _VisualWrapper(torch.nn.Module):
    """Image encoder projected into the joint embedding space."""

    def __init__(self, model):
        super().__init__()
        self.vision_model = model.vision_model
        self.visual_projection = model.visual_projection

    def forward(self, pixel_values):
        pooled = self.vision_model(pixel_values)[1]
        return self.visual_projection(pooled)


def weights_checksum(model: torch.nn.Module) -> str:
    """sha256 over the model's parameters and buffers in state-dict order."""
    h = hashlib.sha256()
    for name, tensor in sorted(model.state_dict().items()):
        h.update(name.encode())
        h.update(tensor.detach().cpu().numpy().tobytes())
    return h.hexdigest()


def _file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def load_prompt_file(path: str) -> list[str]:
    """Flatten a tab-separated (positive, negative) prompt-pair file to unique
    prompt strings, preserving first-seen order."""
    prompts: list[str] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = [p.strip() for p in line.split("\t")]
            if len(parts) != 2 or not all(parts):
                raise ValueError(f"{path}:{lineno}: expected two non-empty "
                                 "tab-separated prompts")
            for p in parts:
                if p not in prompts:
                    prompts.append(p)
    if not prompts:
        raise ValueError(f"{path}: no prompts")
    return prompts


def precompute_prompt_embeddings(prompts: list[str], model, tokenizer,
                                 out_path: str) -> dict[str, np.ndarray]:
    """Embed each unique prompt with the model's text tower and write the
    fixture file consumed by the scoring package."""
    unique: list[str] = []
    for p in prompts:
        if not p or not p.strip():
            raise ValueError("empty prompt")
        if p not in unique:
            unique.append(p)
    records: dict[str, np.ndarray] = {}
    model.eval()
    with torch.no_grad():
        for prompt in unique:
            tokens = tokenizer([prompt], return_tensors="pt", padding=True)
            feats = model.get_text_features(
                input_ids=tokens["input_ids"],
                attention_mask=tokens.get("attention_mask"),
            )
            # newer runtimes return an output object whose pooler_output is
            # the projected joint-space feature
            if not isinstance(feats, torch.Tensor):
                feats = feats.pooler_output
            records[text_key(prompt)] = (
                feats.detach().cpu().numpy().ravel().astype(np.float64))
    write_embedding_fixture(out_path, records)
    return records


def export_encoders(model, tokenizer, out_dir: str,
                    prompts: list[str] | None = None,
                    expected_checksum: str | None = None) -> ExportBundle:
    """Write the full bundle: traced image encoder, metadata, prompt fixture
    and an integrity manifest."""
    if expected_checksum is not None:
        actual = weights_checksum(model)
        if actual != expected_checksum:
            raise IntegrityError(
                f"weight checksum mismatch: expected {expected_checksum}, got {actual}")

    if prompts is None:
        prompts = [p for pair in DEFAULT_PROMPTS for p in pair]

    os.makedirs(out_dir, exist_ok=True)
    model.eval()
    resolution = int(model.config.vision_config.image_size)

    wrapper = _VisualWrapper(model).eval()
    example = torch.zeros(1, 3, resolution, resolution)
    with torch.no_grad():
        traced = torch.jit.trace(wrapper, example, strict=False)
        dim = int(wrapper(example).shape[-1])
    traced.save(os.path.join(out_dir, "visual.pt"))

    metadata = {
        "embedding_dim": dim,
        "input_resolution": resolution,
        "normalization_mean": list(CLIP_IMAGE_MEAN),
        "normalization_std": list(CLIP_IMAGE_STD),
    }
    with open(os.path.join(out_dir, "metadata.json"), "w") as fh:
        json.dump(metadata, fh, indent=2)

    records = precompute_prompt_embeddings(
        prompts, model, tokenizer, os.path.join(out_dir, "text_embeddings.txt"))
    for vec in records.values():
        if vec.size != dim:
            raise IntegrityError(
                f"text embedding dimension {vec.size} != visual dimension {dim}")

    with open(os.path.join(out_dir, "manifest.txt"), "w") as fh:
        for name in BUNDLE_FILES:
            fh.write(f"{_file_sha256(os.path.join(out_dir, name))}  {name}\n")

    return ExportBundle(directory=out_dir, embedding_dim=dim,
                        input_resolution=resolution, prompt_count=len(records))


def verify_bundle(bundle_dir: str) -> None:
    """Recompute the manifest hashes; raise IntegrityError on any mismatch."""
    manifest = os.path.join(bundle_dir, "manifest.txt")
    with open(manifest) as fh:
        for line in fh:
            parts = line.split()
            if len(parts) != 2:
                raise IntegrityError(f"{manifest}: malformed line {line!r}")
            digest, name = parts
            actual = _file_sha256(os.path.join(bundle_dir, name))
            if actual != digest:
                raise IntegrityError(f"{name}: checksum mismatch")
