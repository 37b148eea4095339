import os

import numpy as np
import pytest
import torch

from model_tooling import (
    DEFAULT_PROMPTS,
    IntegrityError,
    export_encoders,
    load_prompt_file,
    precompute_prompt_embeddings,
    verify_bundle,
    weights_checksum,
)
from model_tooling.export import _VisualWrapper

from blindvqa import TorchScriptEmbeddingProvider, read_embedding_fixture, text_key


@pytest.fixture(scope="module")
def bundle(tiny_clip, tmp_path_factory):
    model, tokenizer = tiny_clip
    out = str(tmp_path_factory.mktemp("bundle"))
    return export_encoders(model, tokenizer, out), model, tokenizer


class TestExport:
    def test_bundle_files_written(self, bundle):
        info, _, _ = bundle
        for name in ("visual.pt", "metadata.json", "text_embeddings.txt", "manifest.txt"):
            assert os.path.exists(os.path.join(info.directory, name))

    def test_metadata_dimension_matches_output(self, bundle):
        info, model, _ = bundle
        loaded = torch.jit.load(os.path.join(info.directory, "visual.pt")).eval()
        x = torch.zeros(1, 3, info.input_resolution, info.input_resolution)
        with torch.no_grad():
            out = loaded(x)
        assert out.shape[-1] == info.embedding_dim

    def test_export_fidelity(self, bundle, test_images):
        # scripted vs original-runtime embeddings on 10 test images
        info, model, _ = bundle
        loaded = torch.jit.load(os.path.join(info.directory, "visual.pt")).eval()
        wrapper = _VisualWrapper(model).eval()
        for img in test_images:
            x = torch.from_numpy(img.transpose(2, 0, 1)[None] / 255.0).float()
            with torch.no_grad():
                a = loaded(x).numpy().ravel()
                b = wrapper(x).numpy().ravel()
            cos = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
            assert cos >= 0.999

    def test_reexport_deterministic(self, bundle, tmp_path, test_images):
        info, model, tokenizer = bundle
        again = export_encoders(model, tokenizer, str(tmp_path / "b2"))
        m1 = torch.jit.load(os.path.join(info.directory, "visual.pt")).eval()
        m2 = torch.jit.load(os.path.join(again.directory, "visual.pt")).eval()
        x = torch.from_numpy(test_images[0].transpose(2, 0, 1)[None] / 255.0).float()
        with torch.no_grad():
            assert torch.equal(m1(x), m2(x))
        t1 = read_embedding_fixture(os.path.join(info.directory, "text_embeddings.txt"))
        t2 = read_embedding_fixture(os.path.join(again.directory, "text_embeddings.txt"))
        for key in t1:
            assert np.array_equal(t1[key], t2[key])

    def test_checksum_gate(self, tiny_clip, tmp_path):
        model, tokenizer = tiny_clip
        good = weights_checksum(model)
        out = str(tmp_path / "b3")
        info = export_encoders(model, tokenizer, out, expected_checksum=good)
        assert info.prompt_count == 4
        with pytest.raises(IntegrityError):
            export_encoders(model, tokenizer, out, expected_checksum="0" * 64)

    def test_manifest_verification(self, bundle):
        info, _, _ = bundle
        verify_bundle(info.directory)

    def test_tampering_detected(self, tiny_clip, tmp_path):
        model, tokenizer = tiny_clip
        out = str(tmp_path / "b4")
        export_encoders(model, tokenizer, out)
        with open(os.path.join(out, "metadata.json"), "a") as fh:
            fh.write("\n")
        with pytest.raises(IntegrityError):
            verify_bundle(out)


class TestPromptEmbeddings:
    def test_default_prompts_give_four_records(self, bundle):
        info, _, _ = bundle
        records = read_embedding_fixture(
            os.path.join(info.directory, "text_embeddings.txt"))
        assert len(records) == 4
        for pos, neg in DEFAULT_PROMPTS:
            assert text_key(pos) in records
            assert text_key(neg) in records

    def test_duplicates_deduplicated(self, tiny_clip, tmp_path):
        model, tokenizer = tiny_clip
        out = str(tmp_path / "dup.txt")
        records = precompute_prompt_embeddings(
            ["high quality", "low quality", "high quality"], model, tokenizer, out)
        assert len(records) == 2

    def test_opposite_prompts_differ(self, bundle):
        info, _, _ = bundle
        records = read_embedding_fixture(
            os.path.join(info.directory, "text_embeddings.txt"))
        a = records[text_key("high quality")]
        b = records[text_key("low quality")]
        cos = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
        assert cos < 1.0 - 1e-6

    def test_empty_prompt_rejected(self, tiny_clip, tmp_path):
        model, tokenizer = tiny_clip
        with pytest.raises(ValueError):
            precompute_prompt_embeddings([""], model, tokenizer,
                                         str(tmp_path / "x.txt"))

    def test_prompt_file_parsing(self, tmp_path):
        p = tmp_path / "prompts.tsv"
        p.write_text("high quality\tlow quality\na good photo\ta bad photo\n"
                     "high quality\tlow quality\n")
        assert load_prompt_file(str(p)) == [
            "high quality", "low quality", "a good photo", "a bad photo"]
        bad = tmp_path / "bad.tsv"
        bad.write_text("only one column\n")
        with pytest.raises(ValueError):
            load_prompt_file(str(bad))


class TestPrimaryInterop:
    def test_bundle_loads_in_scoring_provider(self, bundle, test_images):
        info, model, _ = bundle
        provider = TorchScriptEmbeddingProvider(info.directory)
        assert provider.dimension == info.embedding_dim
        emb = provider.embed_image(test_images[0])
        assert emb.shape == (info.embedding_dim,)
        assert np.all(np.isfinite(emb))
        txt = provider.embed_text("high quality")
        assert txt.shape == (info.embedding_dim,)

    def test_scoring_semantic_branch_end_to_end(self, bundle, test_images):
        from blindvqa import semantic_index
        from blindvqa.semantic import default_prompt_pairs

        info, _, _ = bundle
        provider = TorchScriptEmbeddingProvider(info.directory)
        pairs = default_prompt_pairs(provider)
        frames = [provider.embed_image(img) for img in test_images[:4]]
        q_a = semantic_index(frames, pairs)
        assert 0.0 < q_a < 2.0
