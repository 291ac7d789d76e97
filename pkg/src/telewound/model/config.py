"""Network configuration: stage descriptors, transformer geometry, presets.

The shipped tiny preset lives in ``telewound/data/topformer_tiny.json`` and is
versioned; its parameter count is pinned by tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from ..errors import InvalidArgumentError

STEM_STRIDE = 2
DW_KERNEL = 3  # depthwise kernel size used by every pyramid block


@dataclass(frozen=True)
class StageSpec:
    """One MobileNetV2 stage: ``repeats`` inverted-residual blocks.

    The first block of a stage applies ``stride``; the rest use stride 1.
    """

    expansion: int
    channels: int
    repeats: int
    stride: int

    def __post_init__(self):
        if self.expansion < 1 or self.channels < 1 or self.repeats < 1:
            raise InvalidArgumentError(f"invalid stage descriptor {self}")
        if self.stride not in (1, 2):
            raise InvalidArgumentError(f"stage stride must be 1 or 2, got {self.stride}")


@dataclass(frozen=True)
class TransformerSpec:
    depth: int
    head_count: int
    key_dim: int
    value_dim: int
    mlp_ratio: float

    def __post_init__(self):
        if self.depth < 0:
            raise InvalidArgumentError("transformer depth must be >= 0")
        if self.depth > 0 and (self.head_count < 1 or self.key_dim < 1 or self.value_dim < 1):
            raise InvalidArgumentError("transformer head_count/key_dim/value_dim must be positive")


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters for the segmentation network."""

    name: str
    version: int
    stem_channels: int
    pyramid_stages: tuple[StageSpec, ...]
    scales_emitted: tuple[int, ...]
    pool_divisor: int
    transformer: TransformerSpec
    sim_channels: tuple[int, ...]
    head_channels: int
    num_classes: int
    input_channels: int = 3
    normalization_mean: tuple[float, ...] = (0.485, 0.456, 0.406)
    normalization_std: tuple[float, ...] = (0.229, 0.224, 0.225)

    def __post_init__(self):
        object.__setattr__(self, "pyramid_stages", tuple(self.pyramid_stages))
        object.__setattr__(self, "scales_emitted", tuple(self.scales_emitted))
        object.__setattr__(self, "sim_channels", tuple(self.sim_channels))
        object.__setattr__(self, "normalization_mean", tuple(self.normalization_mean))
        object.__setattr__(self, "normalization_std", tuple(self.normalization_std))
        if self.pool_divisor < 1:
            raise InvalidArgumentError("pool_divisor must be positive")
        if self.num_classes < 1:
            raise InvalidArgumentError("num_classes must be positive")
        if self.sim_channels and len(set(self.sim_channels)) != 1:
            # the head sums the enhanced scales elementwise, so they must agree
            raise InvalidArgumentError(
                f"sim_channels must all be equal for the summing head, got {self.sim_channels}"
            )
        if self.pyramid_stages:
            strides = self.stage_cumulative_strides()
            missing = [s for s in self.scales_emitted if s not in strides]
            if missing:
                raise InvalidArgumentError(
                    f"scales {missing} are not produced by the stage strides {strides}"
                )
            if list(self.scales_emitted) != sorted(self.scales_emitted):
                raise InvalidArgumentError("scales_emitted must be ascending")
            if len(self.sim_channels) != len(self.injected_scales()):
                raise InvalidArgumentError(
                    f"sim_channels has {len(self.sim_channels)} entries but "
                    f"{len(self.injected_scales())} scales receive injection"
                )

    # -- derived geometry ---------------------------------------------------

    def stage_cumulative_strides(self) -> tuple[int, ...]:
        strides = []
        s = STEM_STRIDE
        for stage in self.pyramid_stages:
            s *= stage.stride
            strides.append(s)
        return tuple(strides)

    def emitted_channels(self) -> tuple[int, ...]:
        """Channel count of the token emitted at each scale, in scale order."""
        out = []
        strides = self.stage_cumulative_strides()
        for scale in self.scales_emitted:
            # the token for a scale is the output of the LAST stage at that stride
            idx = max(i for i, s in enumerate(strides) if s == scale)
            out.append(self.pyramid_stages[idx].channels)
        return tuple(out)

    def token_dim(self) -> int:
        return sum(self.emitted_channels())

    def injected_scales(self) -> tuple[int, ...]:
        """The deepest three emitted scales receive semantic injection."""
        return tuple(self.scales_emitted[-3:])

    def chunk_slices(self) -> dict[int, slice]:
        """Channel ranges of the concatenated semantics tensor, per scale."""
        offsets = {}
        off = 0
        for scale, ch in zip(self.scales_emitted, self.emitted_channels()):
            offsets[scale] = slice(off, off + ch)
            off += ch
        return offsets

    def mlp_hidden_dim(self) -> int:
        return int(round(self.token_dim() * self.transformer.mlp_ratio))

    def max_stride(self) -> int:
        strides = self.stage_cumulative_strides()
        return max(strides) if strides else STEM_STRIDE

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "input_channels": self.input_channels,
            "stem_channels": self.stem_channels,
            "pyramid_stages": [
                [s.expansion, s.channels, s.repeats, s.stride] for s in self.pyramid_stages
            ],
            "scales_emitted": list(self.scales_emitted),
            "pool_divisor": self.pool_divisor,
            "transformer": {
                "depth": self.transformer.depth,
                "head_count": self.transformer.head_count,
                "key_dim": self.transformer.key_dim,
                "value_dim": self.transformer.value_dim,
                "mlp_ratio": self.transformer.mlp_ratio,
            },
            "sim_channels": list(self.sim_channels),
            "head_channels": self.head_channels,
            "num_classes": self.num_classes,
            "normalization": {
                "mean": list(self.normalization_mean),
                "std": list(self.normalization_std),
            },
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ModelConfig":
        t = d["transformer"]
        norm = d.get("normalization", {})
        return cls(
            name=d["name"],
            version=d["version"],
            input_channels=d.get("input_channels", 3),
            stem_channels=d["stem_channels"],
            pyramid_stages=tuple(StageSpec(*row) for row in d["pyramid_stages"]),
            scales_emitted=tuple(d["scales_emitted"]),
            pool_divisor=d["pool_divisor"],
            transformer=TransformerSpec(
                depth=t["depth"], head_count=t["head_count"], key_dim=t["key_dim"],
                value_dim=t["value_dim"], mlp_ratio=t["mlp_ratio"],
            ),
            sim_channels=tuple(d["sim_channels"]),
            head_channels=d["head_channels"],
            num_classes=d["num_classes"],
            normalization_mean=tuple(norm.get("mean", (0.485, 0.456, 0.406))),
            normalization_std=tuple(norm.get("std", (0.229, 0.224, 0.225))),
        )


def load_preset(name: str = "topformer-tiny") -> ModelConfig:
    """Load a bundled architecture preset by name."""
    fname = name.replace("-", "_") + ".json"
    try:
        text = resources.files("telewound.data").joinpath(fname).read_text()
    except FileNotFoundError:
        raise InvalidArgumentError(f"unknown preset {name!r}") from None
    return ModelConfig.from_json_dict(json.loads(text))
