"""Raster file IO: decode photos, write masks and overlays.

Decoded images are numpy arrays of shape (height, width, 3), dtype uint8, RGB
channel order. Masks are 2-D boolean arrays; on disk they are 8-bit
single-channel PNGs with 0 = background and 255 = wound.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageFormatError


def decode_image(data: bytes) -> np.ndarray:
    """Decode image bytes to an RGB uint8 array."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise ImageFormatError(f"could not decode image: {exc}") from None


def load_image(path: str | Path) -> np.ndarray:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ImageFormatError(f"could not read {path}: {exc}") from None
    return decode_image(data)


def save_image(image: np.ndarray, path: str | Path) -> None:
    """Write an RGB uint8 array; format follows the file suffix."""
    arr = np.ascontiguousarray(image, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ImageFormatError(f"expected (h, w, 3) RGB array, got shape {arr.shape}")
    Image.fromarray(arr, mode="RGB").save(path)


def encode_png(image: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(image, dtype=np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGB" if arr.ndim == 3 else "L").save(buf, format="PNG")
    return buf.getvalue()


def encode_mask_png(mask: np.ndarray) -> bytes:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ImageFormatError(f"mask must be 2-D, got shape {mask.shape}")
    buf = io.BytesIO()
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def decode_mask_png(data: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(data)) as img:
            arr = np.asarray(img.convert("L"))
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise ImageFormatError(f"could not decode mask: {exc}") from None
    return arr >= 128


def save_mask_png(mask: np.ndarray, path: str | Path) -> None:
    Path(path).write_bytes(encode_mask_png(mask))


def load_mask_png(path: str | Path) -> np.ndarray:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ImageFormatError(f"could not read mask {path}: {exc}") from None
    return decode_mask_png(data)
