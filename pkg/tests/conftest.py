import pytest

from blindvqa.niqe import load_niqe_model
from blindvqa.service import default_model_path

from synth_helpers import PHOTO_NAMES, build_synth_corpus, photo_luma


@pytest.fixture(scope="session")
def photo_lumas():
    return {name: photo_luma(name) for name in PHOTO_NAMES}


@pytest.fixture(scope="session")
def default_model():
    return load_niqe_model(default_model_path())


@pytest.fixture(scope="session")
def synth_corpus(tmp_path_factory):
    return build_synth_corpus(tmp_path_factory.mktemp("synth_corpus"))
