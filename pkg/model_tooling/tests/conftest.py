import numpy as np
import pytest
import torch


class StubTokenizer:
    """Deterministic stand-in tokenizer for the randomly initialized model."""

    def __init__(self, vocab_size, max_len=16):
        self.vocab_size = vocab_size
        self.max_len = max_len

    def __call__(self, texts, return_tensors="pt", padding=True):
        rows = []
        for text in texts:
            ids = [3 + (7 * i + ord(c)) % (self.vocab_size - 3)
                   for i, c in enumerate(text)]
            rows.append([1] + ids[: self.max_len - 2] + [2])
        width = max(len(r) for r in rows)
        input_ids = torch.zeros(len(rows), width, dtype=torch.long)
        mask = torch.zeros(len(rows), width, dtype=torch.long)
        for i, r in enumerate(rows):
            input_ids[i, : len(r)] = torch.tensor(r)
            mask[i, : len(r)] = 1
        return {"input_ids": input_ids, "attention_mask": mask}


@pytest.fixture(scope="session")
def tiny_clip():
    """Small randomly initialized joint-embedding model (no downloads)."""
    from transformers import CLIPConfig, CLIPModel, CLIPTextConfig, CLIPVisionConfig

    torch.manual_seed(0)
    vision = CLIPVisionConfig(
        hidden_size=64, intermediate_size=128, num_hidden_layers=2,
        num_attention_heads=2, image_size=224, patch_size=32, projection_dim=32,
    )
    text = CLIPTextConfig(
        hidden_size=64, intermediate_size=128, num_hidden_layers=2,
        num_attention_heads=2, vocab_size=512, max_position_embeddings=32,
        projection_dim=32, bos_token_id=1, eos_token_id=2, pad_token_id=0,
    )
    config = CLIPConfig(text_config=text.to_dict(), vision_config=vision.to_dict(),
                        projection_dim=32)
    model = CLIPModel(config).eval()
    tokenizer = StubTokenizer(vocab_size=512)
    return model, tokenizer


@pytest.fixture()
def test_images():
    rng = np.random.default_rng(1)
    return [rng.uniform(0.0, 255.0, (224, 224, 3)) for _ in range(10)]
