"""Deterministic demo dataset: accounts, wounds, two weeks of submissions, slots.

Seeding writes a complete working environment into one directory: a weight
file, a service config pointing at it, two patient accounts plus one
clinician account, three wounds, synthetic daily documentations across a
fixed 14-day window, and a week of appointment slots. Everything is derived
from one RNG seed and fixed timestamps, so reseeding the same directory
layout yields the same counts and the same record ids.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .care import create_patient, create_wound, record_documentation
from .errors import ConflictError
from .imaging import encode_mask_png, encode_png
from .model import load_preset, random_bundle, write_weights
from .pipeline import CropRect, SegmentationParams, SegmentationResult, extract_components
from .scheduling import APPOINTMENTS, book_slot, confirm, create_slot
from .service import DEFAULT_UPLOAD_LIMIT, create_user
from .sizing import estimate_area
from .store import DocumentStore

DEMO_SCALE_MM_PER_PX = 0.25
DEMO_DAYS = 14
IMAGE_SIZE = 224  # matches the model crop so stored masks map 1:1 onto sources

SKIN_RGB = (214, 178, 148)
WOUND_RGB = (158, 64, 58)

LOGINS = (
    {"username": "amira", "password": "amira-demo", "role": "patient"},
    {"username": "ben", "password": "ben-demo", "role": "patient"},
    {"username": "lang", "password": "lang-demo", "role": "clinician"},
)


def _wound_image(rng: np.random.Generator, radius: float, center: tuple[float, float]):
    """A skin-toned square with one round wound; returns (rgb uint8, bool mask)."""
    yy, xx = np.mgrid[0:IMAGE_SIZE, 0:IMAGE_SIZE].astype(np.float64)
    cy, cx = center
    dist = np.hypot(yy - cy, xx - cx)
    mask = dist <= radius

    image = np.empty((IMAGE_SIZE, IMAGE_SIZE, 3), dtype=np.float64)
    noise = rng.integers(-6, 7, size=(IMAGE_SIZE, IMAGE_SIZE, 1)).astype(np.float64)
    for c, value in enumerate(SKIN_RGB):
        image[:, :, c] = value
    image += noise
    depth = np.clip(1.0 - dist / max(radius, 1.0), 0.0, 1.0)[:, :, None]
    wound = np.array(WOUND_RGB, dtype=np.float64)[None, None, :]
    image = np.where(mask[:, :, None], image * (1.0 - depth) + wound * depth, image)
    return np.clip(image, 0, 255).astype(np.uint8), mask


def _nrs(value: float) -> int:
    return int(np.clip(round(value), 0, 10))


def _sized_entry(store: DocumentStore, wound_id: str, rng, radius, questionnaire) -> dict:
    image, mask = _wound_image(rng, radius, (112.0 + rng.uniform(-8, 8), 112.0 + rng.uniform(-8, 8)))
    params = SegmentationParams()
    components = extract_components(mask, params)
    rect = CropRect(0.0, 0.0, float(IMAGE_SIZE), float(IMAGE_SIZE))
    result = SegmentationResult(
        prob_map=mask.astype(np.float32), mask=mask,
        components=components, crop_rect=rect, latency_ms=0.0,
    )
    return {
        "wound_id": wound_id,
        "confirmed": True,
        "image_blob": store.put_blob(encode_png(image), "image/png"),
        "mask_blob": store.put_blob(encode_mask_png(mask), "image/png"),
        "questionnaire": questionnaire,
        "segmentation": {
            "threshold": params.threshold,
            "crop_rect": rect.as_dict(),
            "components": [c.as_dict() for c in components],
        },
        "size": estimate_area(result, DEMO_SCALE_MM_PER_PX).as_dict(),
    }


def seed_demo(data_dir: str | Path, seed: int = 2026) -> dict:
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    store = DocumentStore(data_dir)
    rng = np.random.default_rng(seed)

    model_config = load_preset("topformer_tiny")
    weights_path = data_dir / "weights.waiw"
    write_weights(random_bundle(model_config, seed=seed), weights_path)
    config_path = data_dir / "config.json"
    config_path.write_text(json.dumps({
        "data_dir": str(data_dir),
        "model_path": str(weights_path),
        "host": "127.0.0.1",
        "port": 8077,
        "threshold": 0.75,
        "upload_limit_bytes": DEFAULT_UPLOAD_LIMIT,
    }, indent=2) + "\n")

    clinician_id = "c-demo-lang"
    create_patient(
        store, "Amira Soto",
        conditions=["type 2 diabetes"], allergies=["penicillin"],
        medications=["metformin"], dressing=["foam dressing"],
        clinician_ids=[clinician_id], patient_id="p-amira",
    )
    create_patient(
        store, "Ben Keller",
        conditions=["chronic venous insufficiency"], allergies=[],
        medications=["rivaroxaban"], dressing=["compression bandage"],
        clinician_ids=[clinician_id], patient_id="p-ben",
    )
    create_wound(store, "p-amira",
                 {"region": "lower_leg", "laterality": "left", "aspect": "front"},
                 wound_id="w-amira-shin", created_at="2026-07-31T08:00:00Z")
    create_wound(store, "p-amira",
                 {"region": "heel", "laterality": "right", "aspect": "back"},
                 wound_id="w-amira-heel", created_at="2026-07-31T08:05:00Z")
    create_wound(store, "p-ben",
                 {"region": "forearm", "laterality": "left", "aspect": "front"},
                 wound_id="w-ben-arm", created_at="2026-07-31T09:00:00Z")

    create_user(store, "amira", "amira-demo", "patient", "p-amira", "Amira Soto")
    create_user(store, "ben", "ben-demo", "patient", "p-ben", "Ben Keller")
    create_user(store, "lang", "lang-demo", "clinician", clinician_id, "Dr. Lang")

    documentations = 0
    for day in range(1, DEMO_DAYS + 1):
        heal = day - 1
        record_documentation(store, {
            "id": f"d-amira-{day:02d}",
            "patient_id": "p-amira",
            "timestamp": f"2026-08-{day:02d}T09:15:00Z",
            "feedback_mode": "a_posteriori",
            "wounds": [
                _sized_entry(store, "w-amira-shin", rng,
                             radius=58.0 - 1.9 * heal + rng.uniform(-1.5, 1.5),
                             questionnaire={
                                 "pain": _nrs(8 - 0.45 * heal + rng.uniform(-1, 1)),
                                 "itching": _nrs(5 - 0.25 * heal + rng.uniform(-1, 1)),
                                 "exudate": _nrs(6 - 0.35 * heal + rng.uniform(-1, 1)),
                             }),
                _sized_entry(store, "w-amira-heel", rng,
                             radius=40.0 - 1.2 * heal + rng.uniform(-1.5, 1.5),
                             questionnaire={
                                 "pain": _nrs(6 - 0.3 * heal + rng.uniform(-1, 1)),
                                 "itching": _nrs(3 - 0.1 * heal + rng.uniform(-1, 1)),
                                 "exudate": _nrs(4 - 0.2 * heal + rng.uniform(-1, 1)),
                             }),
            ],
            "general_questionnaire": {
                "mood": _nrs(4 + 0.3 * heal + rng.uniform(-1, 1)),
                "activity_impact": _nrs(7 - 0.35 * heal + rng.uniform(-1, 1)),
                "quality_of_life": _nrs(5 + 0.25 * heal + rng.uniform(-1, 1)),
            },
        })
        documentations += 1
        if day % 2 == 1:
            record_documentation(store, {
                "id": f"d-ben-{day:02d}",
                "patient_id": "p-ben",
                "timestamp": f"2026-08-{day:02d}T18:40:00Z",
                "feedback_mode": "basic",
                "wounds": [
                    _sized_entry(store, "w-ben-arm", rng,
                                 radius=46.0 - 1.4 * heal + rng.uniform(-1.5, 1.5),
                                 questionnaire={
                                     "pain": _nrs(7 - 0.4 * heal + rng.uniform(-1, 1)),
                                     "itching": _nrs(4 - 0.15 * heal + rng.uniform(-1, 1)),
                                     "exudate": _nrs(5 - 0.3 * heal + rng.uniform(-1, 1)),
                                 }),
                ],
                "general_questionnaire": {
                    "mood": _nrs(5 + 0.25 * heal + rng.uniform(-1, 1)),
                    "activity_impact": _nrs(6 - 0.3 * heal + rng.uniform(-1, 1)),
                    "quality_of_life": _nrs(6 + 0.15 * heal + rng.uniform(-1, 1)),
                },
            })
            documentations += 1

    slots = 0
    for day in range(1, 6):
        for i, (start_hm, end_hm) in enumerate((("10:00", "10:30"), ("10:30", "11:00"))):
            slot_id = f"s-demo-{2 * (day - 1) + i + 1:02d}"
            if not store.exists(APPOINTMENTS, slot_id):  # reseeding keeps bookings
                create_slot(
                    store, clinician_id,
                    f"2026-09-{day:02d}T{start_hm}:00Z",
                    f"2026-09-{day:02d}T{end_hm}:00Z",
                    slot_id=slot_id,
                )
            slots += 1
    try:
        book_slot(store, "s-demo-01", "p-amira")
        confirm(store, "s-demo-01", clinician_id)
    except ConflictError:
        pass  # already booked by a previous seeding run

    return {
        "patients": 2,
        "wounds": 3,
        "documentations": documentations,
        "slots": slots,
        "users": [u["username"] for u in LOGINS],
        "logins": [dict(u) for u in LOGINS],
        "scale_mm_per_px": DEMO_SCALE_MM_PER_PX,
        "weights_file": weights_path.name,
        "config_file": config_path.name,
    }
