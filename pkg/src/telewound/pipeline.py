"""Image-to-mask segmentation pipeline.

Covers the path from a decoded photo to a usable result: center-crop
preprocessing, probability thresholding, connected-component extraction,
boundary overlay rendering, and a latest-wins live loop for continuous
camera-style feeds.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import kernels as K
from .errors import InvalidArgumentError
from .model.network import Model, forward

CROP_SIZE = 224
FEEDBACK_MODES = ("basic", "a_posteriori", "live")
OVERLAY_COLOR = (255, 0, 102)  # fixed highlight used for wound boundaries


@dataclass(frozen=True)
class SegmentationParams:
    threshold: float = 0.75
    min_component_px: int = 25
    connectivity: int = 8
    feedback_mode: str = "a_posteriori"

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise InvalidArgumentError(f"threshold must be in (0,1), got {self.threshold}")
        if self.min_component_px < 0:
            raise InvalidArgumentError("min_component_px must be >= 0")
        if self.connectivity not in (4, 8):
            raise InvalidArgumentError(f"connectivity must be 4 or 8, got {self.connectivity}")
        if self.feedback_mode not in FEEDBACK_MODES:
            raise InvalidArgumentError(
                f"feedback_mode must be one of {FEEDBACK_MODES}, got {self.feedback_mode!r}"
            )


@dataclass(frozen=True)
class CropRect:
    """Source-image rectangle a mask refers to, in source pixel units."""

    x: float
    y: float
    width: float
    height: float

    def as_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "width": self.width, "height": self.height}


@dataclass(frozen=True)
class Component:
    id: int
    pixel_count: int
    bbox: tuple[int, int, int, int]  # x, y, width, height in mask pixels
    centroid: tuple[float, float]  # (x, y) in mask pixels

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "pixel_count": self.pixel_count,
            "bbox": list(self.bbox),
            "centroid": [self.centroid[0], self.centroid[1]],
        }


@dataclass(frozen=True)
class SegmentationResult:
    prob_map: np.ndarray  # (h, w) float32 probabilities
    mask: np.ndarray  # (h, w) bool
    components: tuple[Component, ...]
    crop_rect: CropRect
    latency_ms: float


@dataclass(frozen=True)
class FrameResult:
    index: int
    timestamp_ms: float
    skipped: bool
    result: SegmentationResult | None = None
    started_ms: float | None = None
    completed_ms: float | None = None


DEFAULT_MEAN = (0.485, 0.456, 0.406)
DEFAULT_STD = (0.229, 0.224, 0.225)


def preprocess(
    image: np.ndarray,
    mean: tuple[float, ...] = DEFAULT_MEAN,
    std: tuple[float, ...] = DEFAULT_STD,
    crop_size: int = CROP_SIZE,
) -> tuple[np.ndarray, CropRect]:
    """Resize-if-small, center-crop, and normalize a decoded RGB image.

    Returns the network input tensor and the source-space rectangle that the
    crop covers. Images whose shorter side is under ``crop_size`` are
    bilinearly enlarged so that side becomes exactly ``crop_size``.
    """
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise InvalidArgumentError(f"expected (h, w, 3) RGB image, got shape {image.shape}")
    h, w = image.shape[:2]
    if h < 1 or w < 1:
        raise InvalidArgumentError("image must be at least 1x1")

    x = image.astype(np.float32) / np.float32(255.0)
    tensor = np.ascontiguousarray(x.transpose(2, 0, 1)[None])
    if min(h, w) < crop_size:
        if h <= w:
            new_h, new_w = crop_size, max(crop_size, int(round(w * crop_size / h)))
        else:
            new_h, new_w = max(crop_size, int(round(h * crop_size / w))), crop_size
        tensor = K.bilinear_resize(tensor, (new_h, new_w))
    rh, rw = tensor.shape[2], tensor.shape[3]
    x0 = (rw - crop_size) // 2
    y0 = (rh - crop_size) // 2
    tensor = tensor[:, :, y0 : y0 + crop_size, x0 : x0 + crop_size]

    mean_v = np.asarray(mean, dtype=np.float32).reshape(1, 3, 1, 1)
    std_v = np.asarray(std, dtype=np.float32).reshape(1, 3, 1, 1)
    tensor = np.ascontiguousarray((tensor - mean_v) / std_v, dtype=np.float32)

    sx = w / rw
    sy = h / rh
    rect = CropRect(x=x0 * sx, y=y0 * sy, width=crop_size * sx, height=crop_size * sy)
    return tensor, rect


def threshold_mask(prob_map: np.ndarray, threshold: float) -> np.ndarray:
    """Binary mask: a pixel is wound iff its probability is >= threshold."""
    prob = np.asarray(prob_map)
    if prob.ndim == 4:
        if prob.shape[0] != 1 or prob.shape[1] != 1:
            raise InvalidArgumentError(f"expected a 1x1xHxW map, got shape {prob.shape}")
        prob = prob[0, 0]
    if prob.ndim != 2:
        raise InvalidArgumentError(f"probability map must be 2-D, got shape {prob.shape}")
    return prob >= threshold


_NEIGHBORS_4 = ((-1, 0), (1, 0), (0, -1), (0, 1))
_NEIGHBORS_8 = _NEIGHBORS_4 + ((-1, -1), (-1, 1), (1, -1), (1, 1))


def extract_components(mask: np.ndarray, params: SegmentationParams) -> tuple[Component, ...]:
    """Connected components over the mask, largest first.

    Components smaller than ``min_component_px`` are dropped. Ties in size
    are broken by row-major scan order of each component's first pixel.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise InvalidArgumentError(f"mask must be 2-D, got shape {mask.shape}")
    h, w = mask.shape
    neighbors = _NEIGHBORS_8 if params.connectivity == 8 else _NEIGHBORS_4
    seen = np.zeros((h, w), dtype=bool)
    found = []  # (pixel_count, first_scan_index, bbox, centroid)
    for r0, c0 in np.argwhere(mask):
        if seen[r0, c0]:
            continue
        seen[r0, c0] = True
        queue = deque([(int(r0), int(c0))])
        rows, cols = [], []
        while queue:
            r, c = queue.popleft()
            rows.append(r)
            cols.append(c)
            for dr, dc in neighbors:
                nr, nc = r + dr, c + dc
                if 0 <= nr < h and 0 <= nc < w and mask[nr, nc] and not seen[nr, nc]:
                    seen[nr, nc] = True
                    queue.append((nr, nc))
        count = len(rows)
        if count < params.min_component_px:
            continue
        ra = np.asarray(rows)
        ca = np.asarray(cols)
        bbox = (
            int(ca.min()), int(ra.min()),
            int(ca.max() - ca.min() + 1), int(ra.max() - ra.min() + 1),
        )
        centroid = (float(ca.mean()), float(ra.mean()))
        found.append((count, int(r0) * w + int(c0), bbox, centroid))
    found.sort(key=lambda item: (-item[0], item[1]))
    return tuple(
        Component(id=i, pixel_count=count, bbox=bbox, centroid=centroid)
        for i, (count, _, bbox, centroid) in enumerate(found, start=1)
    )


def segment(
    model: Model, image: np.ndarray, params: SegmentationParams | None = None
) -> SegmentationResult:
    """Full pipeline on one photo; latency covers preprocess through components."""
    params = params or SegmentationParams()
    started = time.perf_counter()
    tensor, rect = preprocess(
        image, mean=model.config.normalization_mean, std=model.config.normalization_std
    )
    prob = forward(model, tensor)[0, 0]
    mask = threshold_mask(prob, params.threshold)
    components = extract_components(mask, params)
    latency_ms = (time.perf_counter() - started) * 1000.0
    return SegmentationResult(
        prob_map=prob, mask=mask, components=components,
        crop_rect=rect, latency_ms=latency_ms,
    )


def mask_boundary(mask: np.ndarray) -> np.ndarray:
    """Wound pixels with at least one 4-neighbor outside the wound.

    Pixels on the raster edge of the mask count as boundary.
    """
    mask = np.asarray(mask, dtype=bool)
    interior = np.zeros_like(mask)
    interior[1:-1, 1:-1] = (
        mask[1:-1, 1:-1]
        & mask[:-2, 1:-1] & mask[2:, 1:-1] & mask[1:-1, :-2] & mask[1:-1, 2:]
    )
    return mask & ~interior


def render_overlay(image: np.ndarray, result: SegmentationResult, mode: str) -> np.ndarray:
    """Draw the wound boundary onto a copy of the source image."""
    if mode not in FEEDBACK_MODES:
        raise InvalidArgumentError(f"mode must be one of {FEEDBACK_MODES}, got {mode!r}")
    image = np.asarray(image)
    out = image.copy()
    if mode == "basic" or not result.mask.any():
        return out
    border = mask_boundary(result.mask)
    mh, mw = result.mask.shape
    rect = result.crop_rect
    rr, cc = np.nonzero(border)
    sx = np.clip(
        np.floor(rect.x + (cc + 0.5) * (rect.width / mw)).astype(int), 0, image.shape[1] - 1
    )
    sy = np.clip(
        np.floor(rect.y + (rr + 0.5) * (rect.height / mh)).astype(int), 0, image.shape[0] - 1
    )
    out[sy, sx] = OVERLAY_COLOR
    return out


def live_loop(
    frames: Iterable[tuple[float, np.ndarray]],
    model: Model | None,
    params: SegmentationParams | None = None,
    *,
    duration_fn: Callable[[int], float] | None = None,
    segment_fn: Callable[[np.ndarray], SegmentationResult] | None = None,
) -> list[FrameResult]:
    """Latest-wins sequential processing of a timestamped frame feed.

    Exactly one segmentation runs at a time. When it finishes, the newest
    frame that has already arrived is taken next and every older unconsumed
    frame is marked skipped, so backlog never grows. ``duration_fn`` supplies
    a simulated per-frame inference duration in ms; without it the measured
    wall-clock duration of the real segmentation is used.
    """
    params = params or SegmentationParams()
    items = [(float(ts), img) for ts, img in frames]
    for (a, _), (b, _) in zip(items, items[1:]):
        if b < a:
            raise InvalidArgumentError("frame timestamps must be non-decreasing")
    if segment_fn is None:
        if model is None:
            raise InvalidArgumentError("live_loop needs a model or a segment_fn")
        segment_fn = lambda img: segment(model, img, params)

    n = len(items)
    slots: list[FrameResult | None] = [None] * n
    idx = 0
    free_at: float | None = None
    while idx < n:
        take = idx
        if free_at is not None:
            arrived = [j for j in range(idx, n) if items[j][0] <= free_at]
            if arrived:
                take = arrived[-1]
        ts = items[take][0]
        start = ts if free_at is None else max(ts, free_at)
        wall0 = time.perf_counter()
        result = segment_fn(items[take][1])
        wall_ms = (time.perf_counter() - wall0) * 1000.0
        duration = float(duration_fn(take)) if duration_fn is not None else wall_ms
        finish = start + duration
        for k in range(idx, take):
            slots[k] = FrameResult(index=k, timestamp_ms=items[k][0], skipped=True)
        slots[take] = FrameResult(
            index=take, timestamp_ms=ts, skipped=False, result=result,
            started_ms=start, completed_ms=finish,
        )
        free_at = finish
        idx = take + 1
    return [s for s in slots if s is not None]
