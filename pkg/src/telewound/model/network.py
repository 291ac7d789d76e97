"""Forward-pass assembly: token pyramid, semantics extractor, injection, head.

:func:`build_model` turns a config plus weight bundle into folded inference
parameters once; the stage functions and :func:`forward` are pure and cheap to
call repeatedly. Each stage is exposed separately so tests can compare the
composition against the one-shot forward pass.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .. import kernels as K
from ..errors import InvalidArgumentError
from .config import DW_KERNEL, ModelConfig, load_preset
from .weights import WeightBundle, count_parameters, load_weights


@dataclass(frozen=True)
class BlockParams:
    """One inverted-residual block, batch norm already folded in."""

    expand: K.ConvParams | None
    dw: K.ConvParams
    project: K.ConvParams
    residual: bool


@dataclass(frozen=True)
class TransformerBlockParams:
    attention: K.AttentionParams
    fc1: K.ConvParams
    dw: K.ConvParams
    fc2: K.ConvParams


@dataclass(frozen=True)
class InjectionParams:
    scale: int
    local_proj: K.ConvParams
    global_proj: K.ConvParams
    chunk: slice


@dataclass(frozen=True)
class Model:
    """Folded inference parameters for the whole network."""

    config: ModelConfig
    stem: K.ConvParams
    stages: tuple[tuple[BlockParams, ...], ...]
    transformer: tuple[TransformerBlockParams, ...]
    injections: tuple[InjectionParams, ...]
    head_fuse: K.ConvParams
    head_classify: K.ConvParams
    parameter_count: int


def build_model(config: ModelConfig, bundle: WeightBundle) -> Model:
    """Validate the bundle against the config and fold every batch norm."""
    extras = bundle.validate_for(config)
    if extras:
        warnings.warn(f"weight bundle carries unused tensors: {extras}", stacklevel=2)
    t = bundle.tensors

    def folded(prefix: str, stride=(1, 1), padding=(0, 0), groups=1) -> K.ConvParams:
        conv = K.ConvParams(
            weight=t[f"{prefix}.conv.weight"], bias=None,
            stride=stride, padding=padding, groups=groups,
        )
        return K.apply_channel_affine(conv, t[f"{prefix}.bn.scale"], t[f"{prefix}.bn.shift"])

    stem = folded("stem", stride=(2, 2), padding=(1, 1))

    stages = []
    in_c = config.stem_channels
    for si, stage in enumerate(config.pyramid_stages, start=1):
        blocks = []
        for bi in range(stage.repeats):
            prefix = f"pyramid.s{si}.b{bi}"
            stride = stage.stride if bi == 0 else 1
            hidden = in_c * stage.expansion
            expand = None
            if stage.expansion != 1:
                expand = folded(f"{prefix}.expand")
            dw = folded(
                f"{prefix}.dw", stride=(stride, stride),
                padding=(DW_KERNEL // 2, DW_KERNEL // 2), groups=hidden,
            )
            project = folded(f"{prefix}.project")
            blocks.append(BlockParams(
                expand=expand, dw=dw, project=project,
                residual=(stride == 1 and in_c == stage.channels),
            ))
            in_c = stage.channels
        stages.append(tuple(blocks))

    spec = config.transformer
    blocks = []
    for d in range(spec.depth):
        prefix = f"transformer.b{d}"
        q = folded(f"{prefix}.attn.q")
        k = folded(f"{prefix}.attn.k")
        v = folded(f"{prefix}.attn.v")
        out = folded(f"{prefix}.attn.out")
        attention = K.AttentionParams(
            head_count=spec.head_count, key_dim=spec.key_dim, value_dim=spec.value_dim,
            q_weight=q.weight[:, :, 0, 0], q_bias=q.bias,
            k_weight=k.weight[:, :, 0, 0], k_bias=k.bias,
            v_weight=v.weight[:, :, 0, 0], v_bias=v.bias,
            out_weight=out.weight[:, :, 0, 0], out_bias=out.bias,
        )
        hidden = config.mlp_hidden_dim()
        blocks.append(TransformerBlockParams(
            attention=attention,
            fc1=folded(f"{prefix}.mlp.fc1"),
            dw=folded(f"{prefix}.mlp.dw", padding=(DW_KERNEL // 2, DW_KERNEL // 2),
                      groups=hidden),
            fc2=folded(f"{prefix}.mlp.fc2"),
        ))

    chunks = config.chunk_slices()
    injections = tuple(
        InjectionParams(
            scale=scale,
            local_proj=folded(f"sim.s{scale}.local"),
            global_proj=folded(f"sim.s{scale}.global"),
            chunk=chunks[scale],
        )
        for scale in config.injected_scales()
    )

    head_fuse = folded("head.fuse")
    head_classify = K.ConvParams(
        weight=t["head.classify.conv.weight"], bias=t["head.classify.conv.bias"],
    )
    return Model(
        config=config, stem=stem, stages=tuple(stages), transformer=tuple(blocks),
        injections=injections, head_fuse=head_fuse, head_classify=head_classify,
        parameter_count=count_parameters(config),
    )


# -- stage functions ----------------------------------------------------------


def token_pyramid(model: Model, image: np.ndarray) -> tuple[np.ndarray, ...]:
    """Run the convolutional pyramid, returning one token map per emitted scale."""
    image = K.as_tensor(image)
    n, c, h, w = image.shape
    if c != model.config.input_channels:
        raise InvalidArgumentError(
            f"image has {c} channels, network expects {model.config.input_channels}"
        )
    divisor = model.config.max_stride()
    if h % divisor or w % divisor:
        raise InvalidArgumentError(
            f"image extents {(h, w)} must be divisible by {divisor}"
        )

    x = K.relu6(K.conv2d(image, model.stem))
    emitted = []
    strides = model.config.stage_cumulative_strides()
    wanted = set(model.config.scales_emitted)
    for idx, blocks in enumerate(model.stages):
        for block in blocks:
            y = x
            if block.expand is not None:
                y = K.relu6(K.conv2d(y, block.expand))
            y = K.relu6(K.conv2d(y, block.dw))
            y = K.conv2d(y, block.project)
            x = K.elementwise(x, y, "add") if block.residual else y
        is_last_at_stride = idx + 1 >= len(strides) or strides[idx + 1] != strides[idx]
        if strides[idx] in wanted and is_last_at_stride:
            emitted.append(x)
    return tuple(emitted)


def pool_and_concat(model: Model, tokens: tuple[np.ndarray, ...]) -> np.ndarray:
    """Pool each token map to the 1/pool_divisor grid and stack channelwise."""
    if len(tokens) != len(model.config.scales_emitted):
        raise InvalidArgumentError(
            f"expected {len(model.config.scales_emitted)} token maps, got {len(tokens)}"
        )
    finest = model.config.scales_emitted[0]
    in_h = tokens[0].shape[2] * finest
    in_w = tokens[0].shape[3] * finest
    target = (-(-in_h // model.config.pool_divisor), -(-in_w // model.config.pool_divisor))
    pooled = [K.adaptive_avg_pool(tok, target) for tok in tokens]
    return K.concat_channels(pooled)


def semantics_extractor(model: Model, x: np.ndarray) -> np.ndarray:
    """Transformer over the pooled grid; residual attention and MLP sublayers."""
    x = K.as_tensor(x)
    if x.shape[1] != model.config.token_dim():
        raise InvalidArgumentError(
            f"semantics input has {x.shape[1]} channels, expected {model.config.token_dim()}"
        )
    for block in model.transformer:
        x = K.elementwise(x, K.multi_head_attention(x, block.attention), "add")
        y = K.conv2d(x, block.fc1)
        y = K.relu6(K.conv2d(y, block.dw))
        y = K.conv2d(y, block.fc2)
        x = K.elementwise(x, y, "add")
    return x


def inject_semantics(
    model: Model, locals_: tuple[np.ndarray, ...], semantics: np.ndarray
) -> tuple[np.ndarray, ...]:
    """Fuse each injected local scale with its channel chunk of the semantics."""
    semantics = K.as_tensor(semantics)
    if semantics.shape[1] != model.config.token_dim():
        raise InvalidArgumentError(
            f"semantics tensor has {semantics.shape[1]} channels, "
            f"expected {model.config.token_dim()}"
        )
    if len(locals_) != len(model.injections):
        raise InvalidArgumentError(
            f"expected {len(model.injections)} local maps, got {len(locals_)}"
        )
    enhanced = []
    for local, inj in zip(locals_, model.injections):
        local = K.as_tensor(local)
        if local.shape[1] != inj.local_proj.in_channels:
            raise InvalidArgumentError(
                f"scale {inj.scale} local map has {local.shape[1]} channels, "
                f"expected {inj.local_proj.in_channels}"
            )
        loc = K.conv2d(local, inj.local_proj)
        glob = K.conv2d(semantics[:, inj.chunk], inj.global_proj)
        glob = K.bilinear_resize(glob, (local.shape[2], local.shape[3]))
        enhanced.append(K.elementwise(loc, glob, "add"))
    return tuple(enhanced)


def segmentation_head(model: Model, enhanced: tuple[np.ndarray, ...]) -> np.ndarray:
    """Sum the enhanced maps at the finest injected scale and classify."""
    if len(enhanced) != len(model.injections):
        raise InvalidArgumentError(
            f"expected {len(model.injections)} enhanced maps, got {len(enhanced)}"
        )
    base = K.as_tensor(enhanced[0])
    target_hw = (base.shape[2], base.shape[3])
    for e in enhanced[1:]:
        base = K.elementwise(base, K.bilinear_resize(K.as_tensor(e), target_hw), "add")
    x = K.relu6(K.conv2d(base, model.head_fuse))
    logits = K.conv2d(x, model.head_classify)
    out_hw = (target_hw[0] * model.injections[0].scale, target_hw[1] * model.injections[0].scale)
    return K.bilinear_resize(logits, out_hw)


def forward(model: Model, image: np.ndarray) -> np.ndarray:
    """Full forward pass: probability map in [0, 1], same spatial size as input."""
    tokens = token_pyramid(model, image)
    pooled = pool_and_concat(model, tokens)
    semantics = semantics_extractor(model, pooled)
    injected_locals = tuple(tokens[-len(model.injections):])
    enhanced = inject_semantics(model, injected_locals, semantics)
    logits = segmentation_head(model, enhanced)
    return K.sigmoid(logits)


def load_model(path) -> Model:
    """Read a weight file, resolve its architecture preset, and build the model."""
    bundle = load_weights(path)
    config = load_preset(bundle.arch)
    return build_model(config, bundle)
