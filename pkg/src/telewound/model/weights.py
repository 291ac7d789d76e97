"""Weight bundle container and its on-disk format.

Layout of a weight file:

* bytes 0..3: magic ``WAIW``
* bytes 4..7: little-endian u32, byte length of the JSON manifest
* manifest: UTF-8 JSON with ``version``, ``arch``, ``tensors`` (each entry
  carrying ``name``, ``shape``, ``dtype``, ``offset``, ``nbytes``) and a
  ``crc32`` over the data section
* data section: raw little-endian float32 values, row-major, at the offsets
  given by the manifest (relative to the start of the data section)

Batch-norm layers are stored in inference form, one ``scale`` and one
``shift`` vector per normalized layer, so the element count of a bundle
equals the trainable parameter count of the network.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field
from math import prod
from pathlib import Path

import numpy as np

from ..errors import WeightFormatError
from .config import DW_KERNEL, ModelConfig

MAGIC = b"WAIW"
FORMAT_VERSION = 1


def parameter_slots(config: ModelConfig) -> list[tuple[str, tuple[int, ...]]]:
    """Every tensor the network needs, as ``(name, shape)`` in build order."""
    slots: list[tuple[str, tuple[int, ...]]] = []

    def conv_bn(prefix: str, out_c: int, in_c: int, kh: int, kw: int):
        slots.append((f"{prefix}.conv.weight", (out_c, in_c, kh, kw)))
        slots.append((f"{prefix}.bn.scale", (out_c,)))
        slots.append((f"{prefix}.bn.shift", (out_c,)))

    in_c = config.input_channels
    if config.pyramid_stages:
        conv_bn("stem", config.stem_channels, in_c, 3, 3)
        in_c = config.stem_channels
        for si, stage in enumerate(config.pyramid_stages, start=1):
            for bi in range(stage.repeats):
                prefix = f"pyramid.s{si}.b{bi}"
                hidden = in_c * stage.expansion
                if stage.expansion != 1:
                    conv_bn(f"{prefix}.expand", hidden, in_c, 1, 1)
                conv_bn(f"{prefix}.dw", hidden, 1, DW_KERNEL, DW_KERNEL)
                conv_bn(f"{prefix}.project", stage.channels, hidden, 1, 1)
                in_c = stage.channels

    dim = config.token_dim()
    t = config.transformer
    hidden = config.mlp_hidden_dim()
    for d in range(t.depth):
        prefix = f"transformer.b{d}"
        conv_bn(f"{prefix}.attn.q", t.head_count * t.key_dim, dim, 1, 1)
        conv_bn(f"{prefix}.attn.k", t.head_count * t.key_dim, dim, 1, 1)
        conv_bn(f"{prefix}.attn.v", t.head_count * t.value_dim, dim, 1, 1)
        conv_bn(f"{prefix}.attn.out", dim, t.head_count * t.value_dim, 1, 1)
        conv_bn(f"{prefix}.mlp.fc1", hidden, dim, 1, 1)
        conv_bn(f"{prefix}.mlp.dw", hidden, 1, DW_KERNEL, DW_KERNEL)
        conv_bn(f"{prefix}.mlp.fc2", dim, hidden, 1, 1)

    emitted = dict(zip(config.scales_emitted, config.emitted_channels()))
    for scale, sim_c in zip(config.injected_scales(), config.sim_channels):
        conv_bn(f"sim.s{scale}.local", sim_c, emitted[scale], 1, 1)
        conv_bn(f"sim.s{scale}.global", sim_c, emitted[scale], 1, 1)

    head_in = config.sim_channels[0] if config.sim_channels else config.head_channels
    conv_bn("head.fuse", config.head_channels, head_in, 1, 1)
    slots.append(("head.classify.conv.weight", (config.num_classes, config.head_channels, 1, 1)))
    slots.append(("head.classify.conv.bias", (config.num_classes,)))
    return slots


def count_parameters(config: ModelConfig) -> int:
    """Total trainable parameter count implied by the configuration."""
    return sum(prod(shape) for _, shape in parameter_slots(config))


@dataclass
class WeightBundle:
    """A named set of float32 tensors for one architecture."""

    arch: str
    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    def element_count(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def validate_for(self, config: ModelConfig) -> list[str]:
        """Check that every required slot is present with the right shape.

        Returns the names of extra tensors that the network will not consume.
        """
        required = dict(parameter_slots(config))
        for name, shape in required.items():
            if name not in self.tensors:
                raise WeightFormatError(f"bundle is missing tensor {name!r}")
            got = self.tensors[name].shape
            if tuple(got) != shape:
                raise WeightFormatError(
                    f"tensor {name!r} has shape {tuple(got)}, expected {shape}"
                )
        return sorted(set(self.tensors) - set(required))


def random_bundle(config: ModelConfig, seed: int = 0) -> WeightBundle:
    """He-normal random weights; batch-norm starts as identity (scale 1, shift 0)."""
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    for name, shape in parameter_slots(config):
        if name.endswith(".bn.scale"):
            tensors[name] = np.ones(shape, dtype=np.float32)
        elif name.endswith((".bn.shift", ".bias")):
            tensors[name] = np.zeros(shape, dtype=np.float32)
        else:
            fan_in = prod(shape[1:]) if len(shape) > 1 else shape[0]
            std = float(np.sqrt(2.0 / fan_in))
            tensors[name] = rng.normal(0.0, std, size=shape).astype(np.float32)
    return WeightBundle(arch=config.name, tensors=tensors)


def zero_bundle(config: ModelConfig) -> WeightBundle:
    tensors = {
        name: np.zeros(shape, dtype=np.float32) for name, shape in parameter_slots(config)
    }
    return WeightBundle(arch=config.name, tensors=tensors)


# -- file IO ------------------------------------------------------------------


def write_weights(bundle: WeightBundle, path: str | Path) -> None:
    entries = []
    chunks = []
    offset = 0
    for name, tensor in bundle.tensors.items():
        raw = np.ascontiguousarray(tensor, dtype="<f4").tobytes()
        entries.append({
            "name": name,
            "shape": list(tensor.shape),
            "dtype": "f32",
            "offset": offset,
            "nbytes": len(raw),
        })
        chunks.append(raw)
        offset += len(raw)
    data = b"".join(chunks)
    manifest = {
        "version": FORMAT_VERSION,
        "arch": bundle.arch,
        "tensors": entries,
        "crc32": format(zlib.crc32(data) & 0xFFFFFFFF, "08x"),
    }
    manifest_bytes = json.dumps(manifest, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(manifest_bytes)))
        fh.write(manifest_bytes)
        fh.write(data)


def read_manifest(path: str | Path) -> dict:
    """Parse and sanity-check the manifest without loading tensor data."""
    with open(path, "rb") as fh:
        blob = fh.read()
    return _split(blob, describe=str(path))[0]


def load_weights(path: str | Path) -> WeightBundle:
    with open(path, "rb") as fh:
        blob = fh.read()
    manifest, data = _split(blob, describe=str(path))
    tensors: dict[str, np.ndarray] = {}
    for entry in manifest["tensors"]:
        name = entry["name"]
        shape = tuple(entry["shape"])
        arr = np.frombuffer(
            data, dtype="<f4", count=prod(shape) if shape else 1, offset=entry["offset"]
        )
        tensors[name] = np.array(arr.reshape(shape), dtype=np.float32)
    return WeightBundle(arch=manifest.get("arch", ""), tensors=tensors)


def _split(blob: bytes, describe: str) -> tuple[dict, bytes]:
    if len(blob) < 8:
        raise WeightFormatError(
            f"{describe}: file is {len(blob)} bytes, header needs at least 8"
        )
    if blob[:4] != MAGIC:
        raise WeightFormatError(
            f"{describe}: bad magic {blob[:4]!r} at byte 0, expected {MAGIC!r}"
        )
    (manifest_len,) = struct.unpack("<I", blob[4:8])
    if len(blob) < 8 + manifest_len:
        raise WeightFormatError(
            f"{describe}: manifest claims {manifest_len} bytes at byte 8 "
            f"but only {len(blob) - 8} remain"
        )
    try:
        manifest = json.loads(blob[8 : 8 + manifest_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WeightFormatError(f"{describe}: manifest is not valid JSON ({exc})") from None
    if manifest.get("version") != FORMAT_VERSION:
        raise WeightFormatError(
            f"{describe}: unsupported format version {manifest.get('version')!r}"
        )
    data = blob[8 + manifest_len :]

    spans = []
    for entry in manifest.get("tensors", []):
        name = entry.get("name", "?")
        shape = tuple(entry.get("shape", ()))
        nbytes = entry.get("nbytes")
        offset = entry.get("offset")
        if entry.get("dtype") != "f32":
            raise WeightFormatError(
                f"{describe}: tensor {name!r} has unsupported dtype {entry.get('dtype')!r}"
            )
        expect = prod(shape) * 4 if shape else 4
        if nbytes != expect:
            raise WeightFormatError(
                f"{describe}: tensor {name!r} shape {shape} needs {expect} bytes, "
                f"manifest says {nbytes}"
            )
        if offset < 0 or offset + nbytes > len(data):
            raise WeightFormatError(
                f"{describe}: tensor {name!r} spans data bytes {offset}..{offset + nbytes}, "
                f"but the data section holds {len(data)} bytes"
            )
        spans.append((offset, offset + nbytes, name))
    spans.sort()
    for (a0, a1, an), (b0, b1, bn) in zip(spans, spans[1:]):
        if b0 < a1:
            raise WeightFormatError(
                f"{describe}: tensors {an!r} and {bn!r} overlap at data byte {b0}"
            )

    declared = manifest.get("crc32")
    actual = format(zlib.crc32(data) & 0xFFFFFFFF, "08x")
    if declared != actual:
        raise WeightFormatError(
            f"{describe}: data checksum {actual} does not match manifest crc32 {declared}"
        )
    return manifest, data
