"""Wound documentation and patient-reported-outcome domain.

State lives entirely in the document store; every function here either
validates and persists one record atomically or derives a read-only view
(gallery, trajectory, overview) by recomputing from stored records. There is
no cached derived state, so views can always be cross-checked by recomputing
from scratch.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import NotFoundError, ValidationError
from .pipeline import FEEDBACK_MODES
from .store import DocumentStore
from .timefmt import date_of, format_ts, now_utc

WOUND_NRS_ITEMS = ("pain", "itching", "exudate")
GENERAL_NRS_ITEMS = ("mood", "activity_impact", "quality_of_life")
NRS_MIN, NRS_MAX = 0, 10

PATIENTS = "patients"
WOUNDS = "wounds"
DOCUMENTATIONS = "documentations"


# -- bundled catalogs ---------------------------------------------------------


@lru_cache(maxsize=None)
def body_map() -> dict:
    text = resources.files("telewound.data").joinpath("body_map.json").read_text()
    return json.loads(text)


@lru_cache(maxsize=None)
def _help_catalog() -> dict:
    text = resources.files("telewound.data").joinpath("help_text.json").read_text()
    return json.loads(text)


def help_screens(locale: str = "en") -> tuple[str, ...]:
    locales = _help_catalog()["locales"]
    if locale not in locales:
        raise NotFoundError(f"no help catalog for locale {locale!r}")
    return tuple(sorted(locales[locale]))


def help_text(screen_id: str, locale: str = "en") -> dict:
    locales = _help_catalog()["locales"]
    if locale not in locales:
        raise NotFoundError(f"no help catalog for locale {locale!r}")
    entry = locales[locale].get(screen_id)
    if entry is None:
        raise NotFoundError(f"no help text for screen {screen_id!r}")
    return {"screen": screen_id, "text": entry["text"], "audio": entry["audio"]}


def validate_location(location: dict, field: str = "location") -> dict:
    catalog = body_map()
    if not isinstance(location, dict):
        raise ValidationError(field, "type", f"{field} must be an object")
    region = location.get("region")
    laterality = location.get("laterality")
    aspect = location.get("aspect")
    if region not in {r["code"] for r in catalog["regions"]}:
        raise ValidationError(f"{field}.region", "enum", f"unknown body region {region!r}")
    if laterality not in catalog["lateralities"]:
        raise ValidationError(f"{field}.laterality", "enum", f"invalid laterality {laterality!r}")
    if aspect not in catalog["aspects"]:
        raise ValidationError(f"{field}.aspect", "enum", f"invalid aspect {aspect!r}")
    return {"region": region, "laterality": laterality, "aspect": aspect}


# -- patients and wounds ------------------------------------------------------


def new_id() -> str:
    return uuid.uuid4().hex[:12]


def create_patient(
    store: DocumentStore,
    display_name: str,
    conditions: list[str] | None = None,
    allergies: list[str] | None = None,
    medications: list[str] | None = None,
    dressing: list[str] | None = None,
    clinician_ids: list[str] | None = None,
    patient_id: str | None = None,
) -> dict:
    patient = {
        "id": patient_id or new_id(),
        "display_name": display_name,
        "conditions": list(conditions or []),
        "allergies": list(allergies or []),
        "medications": list(medications or []),
        "dressing": list(dressing or []),
        "clinician_ids": list(clinician_ids or []),
    }
    store.put(PATIENTS, patient["id"], patient)
    return patient


def get_patient(store: DocumentStore, patient_id: str) -> dict:
    doc = store.get_or_none(PATIENTS, patient_id)
    if doc is None:
        raise NotFoundError(f"patient {patient_id} not found")
    return doc.body


def list_patients(store: DocumentStore, clinician_id: str | None = None) -> list[dict]:
    patients = [d.body for d in store.list(PATIENTS)]
    if clinician_id is not None:
        patients = [p for p in patients if clinician_id in p.get("clinician_ids", [])]
    return sorted(patients, key=lambda p: (p["display_name"], p["id"]))


def create_wound(
    store: DocumentStore,
    patient_id: str,
    location: dict,
    wound_id: str | None = None,
    created_at: str | None = None,
) -> dict:
    get_patient(store, patient_id)
    wound = {
        "id": wound_id or new_id(),
        "patient_id": patient_id,
        "location": validate_location(location),
        "created_at": created_at or format_ts(now_utc()),
    }
    store.put(WOUNDS, wound["id"], wound)
    return wound


def get_wound(store: DocumentStore, wound_id: str) -> dict:
    doc = store.get_or_none(WOUNDS, wound_id)
    if doc is None:
        raise NotFoundError(f"wound {wound_id} not found")
    return doc.body


def list_wounds(store: DocumentStore, patient_id: str) -> list[dict]:
    wounds = [d.body for d in store.list(WOUNDS) if d.body["patient_id"] == patient_id]
    return sorted(wounds, key=lambda w: (w["created_at"], w["id"]))


# -- documentation submissions --------------------------------------------------


def _validate_nrs(values, items: tuple[str, ...], field: str) -> dict:
    if not isinstance(values, dict):
        raise ValidationError(field, "type", f"{field} must be an object of NRS items")
    out = {}
    for item in items:
        if item not in values:
            raise ValidationError(f"{field}.{item}", "missing")
        v = values[item]
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValidationError(f"{field}.{item}", "type", f"{field}.{item} must be an integer")
        if not NRS_MIN <= v <= NRS_MAX:
            raise ValidationError(
                f"{field}.{item}", "range",
                f"{field}.{item} must be in [{NRS_MIN}, {NRS_MAX}], got {v}",
            )
        out[item] = v
    extra = set(values) - set(items)
    if extra:
        raise ValidationError(f"{field}.{sorted(extra)[0]}", "unknown_item")
    return out


def validate_submission(store: DocumentStore, submission: dict) -> dict:
    """Check every documentation invariant; returns the normalized record body."""
    patient_id = submission.get("patient_id")
    patient = get_patient(store, patient_id)

    timestamp = submission.get("timestamp") or format_ts(now_utc())
    date_of(timestamp)  # validates the format

    feedback_mode = submission.get("feedback_mode", "basic")
    if feedback_mode not in FEEDBACK_MODES:
        raise ValidationError("feedback_mode", "enum", f"unknown feedback mode {feedback_mode!r}")

    wounds_in = submission.get("wounds")
    if not isinstance(wounds_in, list) or len(wounds_in) < 1:
        raise ValidationError("wounds", "missing", "at least one wound entry is required")

    entries = []
    for i, entry in enumerate(wounds_in):
        prefix = f"wounds[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError(prefix, "type")
        wound_id = entry.get("wound_id")
        wound = get_wound(store, wound_id)
        if wound["patient_id"] != patient["id"]:
            raise NotFoundError(f"wound {wound_id} does not belong to patient {patient['id']}")
        if entry.get("confirmed") is not True:
            raise ValidationError(
                f"{prefix}.confirmed", "quality_unconfirmed",
                "image quality must be confirmed before upload",
            )
        image_blob = entry.get("image_blob")
        if not image_blob:
            raise ValidationError(f"{prefix}.image_blob", "missing")
        questionnaire = _validate_nrs(
            entry.get("questionnaire"), WOUND_NRS_ITEMS, f"{prefix}.questionnaire"
        )
        entries.append({
            "wound_id": wound_id,
            "image_blob": image_blob,
            "confirmed": True,
            "mask_blob": entry.get("mask_blob"),
            "segmentation": entry.get("segmentation"),
            "ro": entry.get("ro"),
            "size": entry.get("size"),
            "questionnaire": questionnaire,
        })

    general = submission.get("general_questionnaire")
    if general is None:
        raise ValidationError("general_questionnaire", "missing",
                              "submission is incomplete: general questionnaire required")
    general = _validate_nrs(general, GENERAL_NRS_ITEMS, "general_questionnaire")

    return {
        "id": submission.get("id") or new_id(),
        "patient_id": patient["id"],
        "timestamp": timestamp,
        "feedback_mode": feedback_mode,
        "wounds": entries,
        "general_questionnaire": general,
    }


def record_documentation(store: DocumentStore, submission: dict) -> dict:
    """Validate and persist one documentation record in a single atomic write."""
    record = validate_submission(store, submission)
    store.put(DOCUMENTATIONS, record["id"], record)
    return record


def get_documentation(store: DocumentStore, record_id: str) -> dict:
    doc = store.get_or_none(DOCUMENTATIONS, record_id)
    if doc is None:
        raise NotFoundError(f"documentation {record_id} not found")
    return doc.body


def update_documentation(store: DocumentStore, record: dict) -> dict:
    """Replace a stored record (used for attaching sizing results)."""
    current = store.get(DOCUMENTATIONS, record["id"])
    store.atomic_update(DOCUMENTATIONS, record["id"], current.version, record)
    return record


def list_documentations(store: DocumentStore, patient_id: str) -> list[dict]:
    records = [
        d.body for d in store.list(DOCUMENTATIONS) if d.body["patient_id"] == patient_id
    ]
    return sorted(records, key=lambda r: (r["timestamp"], r["id"]))


# -- derived views ---------------------------------------------------------------


@dataclass(frozen=True)
class GalleryItem:
    index: int
    total: int
    wound_id: str
    documentation_id: str
    timestamp: str
    image_blob: str
    mask_blob: str | None

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "total": self.total,
            "counter": f"{self.index} of {self.total}",
            "wound_id": self.wound_id,
            "documentation_id": self.documentation_id,
            "timestamp": self.timestamp,
            "image_blob": self.image_blob,
            "mask_blob": self.mask_blob,
        }


def gallery(store: DocumentStore, wound_id: str) -> list[GalleryItem]:
    """Chronological images of one wound with 1-based counters."""
    wound = get_wound(store, wound_id)
    hits = []
    for record in list_documentations(store, wound["patient_id"]):
        for entry in record["wounds"]:
            if entry["wound_id"] == wound_id:
                hits.append((record["timestamp"], record["id"], entry))
    hits.sort(key=lambda h: (h[0], h[1]))
    total = len(hits)
    return [
        GalleryItem(
            index=i, total=total, wound_id=wound_id, documentation_id=rec_id,
            timestamp=ts, image_blob=entry["image_blob"], mask_blob=entry.get("mask_blob"),
        )
        for i, (ts, rec_id, entry) in enumerate(hits, start=1)
    ]


@dataclass(frozen=True)
class TrajectoryPoint:
    date: str
    values: dict

    def as_dict(self) -> dict:
        return {"date": self.date, "values": dict(self.values)}


@dataclass(frozen=True)
class Trajectory:
    kind: str
    subject_id: str
    series: tuple[str, ...]
    points: tuple[TrajectoryPoint, ...]

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "subject_id": self.subject_id,
            "series": list(self.series),
            "points": [p.as_dict() for p in self.points],
        }


def _daily_latest(candidates, start: str | None, end: str | None):
    """Group (timestamp, tiebreak, values) by UTC day, keep the latest per day."""
    byday: dict[str, tuple] = {}
    for ts, tiebreak, values in candidates:
        day = date_of(ts)
        if start and day < start:
            continue
        if end and day > end:
            continue
        key = (ts, tiebreak)
        if day not in byday or key > byday[day][0]:
            byday[day] = (key, values)
    return tuple(
        TrajectoryPoint(date=day, values=byday[day][1]) for day in sorted(byday)
    )


def wound_trajectory(
    store: DocumentStore, wound_id: str,
    start: str | None = None, end: str | None = None,
) -> Trajectory:
    """Per-day wound NRS values plus area when sizing was performed."""
    wound = get_wound(store, wound_id)
    candidates = []
    for record in list_documentations(store, wound["patient_id"]):
        for entry in record["wounds"]:
            if entry["wound_id"] != wound_id:
                continue
            values = dict(entry["questionnaire"])
            size = entry.get("size")
            if size is not None:
                values["area_cm2"] = size["total_cm2"]
            candidates.append((record["timestamp"], record["id"], values))
    return Trajectory(
        kind="wound", subject_id=wound_id,
        series=WOUND_NRS_ITEMS + ("area_cm2",),
        points=_daily_latest(candidates, start, end),
    )


def general_trajectory(
    store: DocumentStore, patient_id: str,
    start: str | None = None, end: str | None = None,
) -> Trajectory:
    get_patient(store, patient_id)
    candidates = [
        (record["timestamp"], record["id"], dict(record["general_questionnaire"]))
        for record in list_documentations(store, patient_id)
    ]
    return Trajectory(
        kind="general", subject_id=patient_id,
        series=GENERAL_NRS_ITEMS,
        points=_daily_latest(candidates, start, end),
    )


def patient_overview(store: DocumentStore, patient_id: str) -> dict:
    patient = get_patient(store, patient_id)
    records = list_documentations(store, patient_id)
    last_by_wound: dict[str, str] = {}
    count_by_wound: dict[str, int] = {}
    for record in records:
        for entry in record["wounds"]:
            wid = entry["wound_id"]
            count_by_wound[wid] = count_by_wound.get(wid, 0) + 1
            last_by_wound[wid] = max(last_by_wound.get(wid, ""), record["timestamp"])
    wounds = [
        {
            "id": w["id"],
            "location": w["location"],
            "created_at": w["created_at"],
            "documentation_count": count_by_wound.get(w["id"], 0),
            "last_documented_at": last_by_wound.get(w["id"]),
        }
        for w in list_wounds(store, patient_id)
    ]
    return {
        "id": patient["id"],
        "display_name": patient["display_name"],
        "conditions": patient["conditions"],
        "allergies": patient["allergies"],
        "medications": patient["medications"],
        "dressing": patient["dressing"],
        "wounds": wounds,
    }
