__version__ = "0.1.0"

from .export import (
    CLIP_IMAGE_MEAN,
    CLIP_IMAGE_STD,
    DEFAULT_PROMPTS,
    ExportBundle,
    IntegrityError,
    export_encoders,
    load_prompt_file,
    precompute_prompt_embeddings,
    verify_bundle,
    weights_checksum,
)

__all__ = [name for name in dir() if not name.startswith("_")]
