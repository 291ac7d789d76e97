"""Segmentation network: configuration, weight IO, and forward pass."""

from .config import ModelConfig, StageSpec, TransformerSpec, load_preset
from .network import (
    Model,
    build_model,
    load_model,
    forward,
    inject_semantics,
    pool_and_concat,
    segmentation_head,
    semantics_extractor,
    token_pyramid,
)
from .weights import (
    WeightBundle,
    count_parameters,
    load_weights,
    parameter_slots,
    random_bundle,
    read_manifest,
    write_weights,
    zero_bundle,
)

__all__ = [
    "Model",
    "ModelConfig",
    "StageSpec",
    "TransformerSpec",
    "WeightBundle",
    "build_model",
    "count_parameters",
    "forward",
    "inject_semantics",
    "load_model",
    "load_preset",
    "load_weights",
    "parameter_slots",
    "pool_and_concat",
    "random_bundle",
    "read_manifest",
    "segmentation_head",
    "semantics_extractor",
    "token_pyramid",
    "write_weights",
    "zero_bundle",
]
