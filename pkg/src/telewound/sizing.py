"""Real-world wound sizing from a two-point reference-object annotation.

A clinician marks two points a known distance apart on an object lying in the
wound plane; that fixes a mm-per-pixel scale which converts mask pixel counts
into areas. Masks produced from resized crops are corrected through the crop
rectangle, which records how large one mask pixel is in source pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArgumentError
from .pipeline import SegmentationResult


@dataclass(frozen=True)
class ReferenceAnnotation:
    ax: float
    ay: float
    bx: float
    by: float
    known_length_mm: float

    def __post_init__(self):
        if self.known_length_mm <= 0:
            raise InvalidArgumentError(
                f"known_length_mm must be positive, got {self.known_length_mm}"
            )
        if (self.ax, self.ay) == (self.bx, self.by):
            raise InvalidArgumentError("reference endpoints must be distinct")

    def pixel_distance(self) -> float:
        return math.hypot(self.bx - self.ax, self.by - self.ay)


@dataclass(frozen=True)
class WoundSize:
    component_mm2: tuple[float, ...]
    total_mm2: float
    total_cm2: float
    scale_mm_per_px: float

    def as_dict(self) -> dict:
        return {
            "component_mm2": list(self.component_mm2),
            "total_mm2": self.total_mm2,
            "total_cm2": self.total_cm2,
            "scale_mm_per_px": self.scale_mm_per_px,
        }


def calibrate_scale(ro: ReferenceAnnotation) -> float:
    """Millimetres per source pixel from the two-point annotation."""
    dist = ro.pixel_distance()
    if dist <= 0.0:
        raise InvalidArgumentError("reference endpoints must be distinct")
    return ro.known_length_mm / dist


def estimate_area(result: SegmentationResult, scale_mm_per_px: float) -> WoundSize:
    """Per-component and total wound area for a segmentation result.

    ``scale_mm_per_px`` applies to source pixels; mask pixels are converted
    through the crop rectangle first (one mask pixel covers
    ``crop_rect.width / mask_width`` source pixels per side).
    """
    if scale_mm_per_px <= 0:
        raise InvalidArgumentError(f"scale must be positive, got {scale_mm_per_px}")
    mask_w = result.mask.shape[1]
    source_px_per_mask_px = result.crop_rect.width / mask_w
    mm_per_mask_px = scale_mm_per_px * source_px_per_mask_px
    areas = tuple(c.pixel_count * mm_per_mask_px**2 for c in result.components)
    total = sum(areas)
    return WoundSize(
        component_mm2=areas,
        total_mm2=total,
        total_cm2=total / 100.0,
        scale_mm_per_px=scale_mm_per_px,
    )
