"""Reference-object calibration and wound area estimation tests."""

import math

import numpy as np
import pytest

from telewound.errors import InvalidArgumentError
from telewound.pipeline import CropRect, SegmentationParams, SegmentationResult, extract_components
from telewound.sizing import ReferenceAnnotation, calibrate_scale, estimate_area


def _result(mask, rect=None):
    mask = np.asarray(mask, dtype=bool)
    rect = rect or CropRect(0.0, 0.0, float(mask.shape[1]), float(mask.shape[0]))
    comps = extract_components(mask, SegmentationParams(min_component_px=0))
    return SegmentationResult(
        prob_map=mask.astype(np.float32), mask=mask, components=comps,
        crop_rect=rect, latency_ms=0.0,
    )


def _disk(radius, pad=5):
    size = 2 * (radius + pad) + 1
    center = radius + pad
    yy, xx = np.mgrid[0:size, 0:size]
    return (xx - center) ** 2 + (yy - center) ** 2 <= radius**2


# -- calibration --------------------------------------------------------------


def test_ruler_50mm_over_200px():
    ro = ReferenceAnnotation(ax=10, ay=10, bx=210, by=10, known_length_mm=50)
    assert calibrate_scale(ro) == pytest.approx(0.25)


def test_three_four_five_triangle():
    ro = ReferenceAnnotation(ax=0, ay=0, bx=30, by=40, known_length_mm=100)
    assert calibrate_scale(ro) == pytest.approx(2.0)


def test_coincident_endpoints_rejected():
    with pytest.raises(InvalidArgumentError, match="distinct"):
        ReferenceAnnotation(ax=5, ay=5, bx=5, by=5, known_length_mm=10)


def test_non_positive_length_rejected():
    with pytest.raises(InvalidArgumentError, match="positive"):
        ReferenceAnnotation(ax=0, ay=0, bx=1, by=1, known_length_mm=0)


# -- area ----------------------------------------------------------------------


def test_400px_mask_at_half_mm():
    mask = np.zeros((64, 64), dtype=bool)
    mask[10:30, 10:30] = True  # 400 px
    size = estimate_area(_result(mask), 0.5)
    assert size.total_mm2 == pytest.approx(100.0)
    assert size.total_cm2 == pytest.approx(1.0)
    assert size.component_mm2 == (pytest.approx(100.0),)


def test_empty_mask_is_zero():
    size = estimate_area(_result(np.zeros((32, 32), dtype=bool)), 0.7)
    assert size.total_mm2 == 0.0
    assert size.component_mm2 == ()


@pytest.mark.parametrize("radius", [30, 50, 80])
@pytest.mark.parametrize("scale", [0.1, 0.2, 0.5])
def test_disk_area_within_two_percent(radius, scale):
    size = estimate_area(_result(_disk(radius)), scale)
    expected = math.pi * (radius * scale) ** 2
    assert abs(size.total_mm2 - expected) / expected < 0.02


def test_disk_example_matches_paper_figure():
    # r=50 px at 0.2 mm/px is a 10 mm radius wound, ~314.16 mm^2
    size = estimate_area(_result(_disk(50)), 0.2)
    assert abs(size.total_mm2 - math.pi * 100.0) / (math.pi * 100.0) < 0.02


def test_quadratic_scaling():
    mask = _disk(20)
    base = estimate_area(_result(mask), 0.3)
    doubled = estimate_area(_result(mask), 0.6)
    assert doubled.total_mm2 == pytest.approx(4.0 * base.total_mm2)
    for a, b in zip(base.component_mm2, doubled.component_mm2):
        assert b == pytest.approx(4.0 * a)


def test_translation_invariance():
    a = np.zeros((60, 60), dtype=bool)
    a[5:15, 5:20] = True
    b = np.zeros((60, 60), dtype=bool)
    b[40:50, 30:45] = True
    assert estimate_area(_result(a), 0.4).total_mm2 == pytest.approx(
        estimate_area(_result(b), 0.4).total_mm2
    )


def test_total_is_sum_of_components():
    mask = np.zeros((50, 50), dtype=bool)
    mask[2:10, 2:10] = True
    mask[20:40, 20:35] = True
    size = estimate_area(_result(mask), 0.25)
    assert size.total_mm2 == pytest.approx(sum(size.component_mm2))
    assert size.total_cm2 == pytest.approx(size.total_mm2 / 100.0)


def test_crop_rect_resize_factor_applied():
    # mask is 224 wide but covers only 100 source pixels: the photo was
    # upscaled by 2.24 before cropping, so each mask pixel is 100/224 source px
    mask = np.zeros((224, 224), dtype=bool)
    mask[50:60, 50:60] = True  # 100 mask px
    rect = CropRect(x=100.0, y=0.0, width=100.0, height=100.0)
    size = estimate_area(_result(mask, rect), 1.0)
    factor = 100.0 / 224.0
    assert size.total_mm2 == pytest.approx(100 * factor**2)


def test_non_positive_scale_rejected():
    mask = np.zeros((8, 8), dtype=bool)
    with pytest.raises(InvalidArgumentError, match="positive"):
        estimate_area(_result(mask), 0.0)


def test_component_order_does_not_change_total():
    mask = np.zeros((40, 40), dtype=bool)
    mask[1:5, 1:5] = True
    mask[10:30, 10:30] = True
    res = _result(mask)
    reversed_res = SegmentationResult(
        prob_map=res.prob_map, mask=res.mask,
        components=tuple(reversed(res.components)),
        crop_rect=res.crop_rect, latency_ms=0.0,
    )
    assert estimate_area(res, 0.5).total_mm2 == pytest.approx(
        estimate_area(reversed_res, 0.5).total_mm2
    )
