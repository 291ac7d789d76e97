"""Appointment slots, booking state machine, and video-session issuance.

Slot lifecycle: available -> booked -> confirmed -> completed, with
cancellation allowed from booked or confirmed. A cancelled slot immediately
recycles to available (the calendar shows it as bookable again); the pass
through ``cancelled`` is recorded in the slot's audit trail. All transitions
go through the store's compare-and-swap, so concurrent bookings of one slot
resolve to exactly one winner.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass
from datetime import datetime, timedelta

from .errors import (
    InvalidArgumentError,
    NotConfirmedError,
    NotFoundError,
    OutsideWindowError,
    OverlapConflictError,
    TransitionError,
)
from .store import DocumentStore
from .timefmt import date_of, format_ts, now_utc, parse_date, parse_ts

APPOINTMENTS = "appointments"
VIDEO_SESSIONS = "video_sessions"

STATES = ("available", "booked", "confirmed", "completed", "cancelled")
JOIN_WINDOW_BEFORE = timedelta(minutes=15)

# action -> (legal source states, target state)
TRANSITIONS = {
    "book": (("available",), "booked"),
    "confirm": (("booked",), "confirmed"),
    "complete": (("confirmed",), "completed"),
    "cancel": (("booked", "confirmed"), "cancelled"),
}


def create_slot(
    store: DocumentStore,
    clinician_id: str,
    start: str,
    end: str,
    slot_id: str | None = None,
) -> dict:
    start_dt, end_dt = parse_ts(start), parse_ts(end)
    if end_dt <= start_dt:
        raise InvalidArgumentError(f"slot end {end} must be after start {start}")
    slot = {
        "id": slot_id or secrets.token_hex(6),
        "clinician_id": clinician_id,
        "start": format_ts(start_dt),
        "end": format_ts(end_dt),
        "state": "available",
        "patient_id": None,
        "audit": [],
    }
    store.atomic_update(APPOINTMENTS, slot["id"], 0, slot)
    return slot


def get_appointment(store: DocumentStore, appointment_id: str) -> dict:
    doc = store.get_or_none(APPOINTMENTS, appointment_id)
    if doc is None:
        raise NotFoundError(f"appointment {appointment_id} not found")
    return doc.body


def list_slots(
    store: DocumentStore,
    clinician_id: str | None = None,
    start_date: str | None = None,
    end_date: str | None = None,
) -> list[dict]:
    """Slots grouped by UTC calendar day, chronological within each day."""
    if start_date and end_date and parse_date(end_date) < parse_date(start_date):
        raise InvalidArgumentError(
            f"inverted date range: {start_date} is after {end_date}"
        )
    groups: dict[str, list[dict]] = {}
    for doc in store.list(APPOINTMENTS):
        slot = doc.body
        if clinician_id is not None and slot["clinician_id"] != clinician_id:
            continue
        day = date_of(slot["start"])
        if start_date and day < start_date:
            continue
        if end_date and day > end_date:
            continue
        groups.setdefault(day, []).append(slot)
    return [
        {"date": day, "slots": sorted(groups[day], key=lambda s: (s["start"], s["id"]))}
        for day in sorted(groups)
    ]


def _overlaps(a_start: str, a_end: str, b_start: str, b_end: str) -> bool:
    return parse_ts(a_start) < parse_ts(b_end) and parse_ts(b_start) < parse_ts(a_end)


def book_slot(store: DocumentStore, slot_id: str, patient_id: str) -> dict:
    doc = store.get_or_none(APPOINTMENTS, slot_id)
    if doc is None:
        raise NotFoundError(f"appointment {slot_id} not found")
    slot = doc.body
    _require_transition("book", slot["state"])

    for other_doc in store.list(APPOINTMENTS):
        other = other_doc.body
        if other["id"] == slot_id or other["patient_id"] != patient_id:
            continue
        if other["state"] == "cancelled" or other["state"] == "available":
            continue
        if _overlaps(slot["start"], slot["end"], other["start"], other["end"]):
            raise OverlapConflictError(
                f"patient {patient_id} already holds appointment {other['id']} "
                f"overlapping {slot['start']}..{slot['end']}"
            )

    updated = dict(slot)
    updated["state"] = "booked"
    updated["patient_id"] = patient_id
    updated["audit"] = slot["audit"] + [_audit("book", "available", "booked", patient_id)]
    committed = store.atomic_update(APPOINTMENTS, slot_id, doc.version, updated)
    return committed.body


def confirm(store: DocumentStore, appointment_id: str, clinician_id: str) -> dict:
    doc = store.get_or_none(APPOINTMENTS, appointment_id)
    if doc is None:
        raise NotFoundError(f"appointment {appointment_id} not found")
    slot = doc.body
    if slot["clinician_id"] != clinician_id:
        raise InvalidArgumentError(
            f"appointment {appointment_id} belongs to clinician {slot['clinician_id']}"
        )
    _require_transition("confirm", slot["state"])
    updated = dict(slot)
    updated["state"] = "confirmed"
    updated["audit"] = slot["audit"] + [_audit("confirm", "booked", "confirmed", clinician_id)]
    return store.atomic_update(APPOINTMENTS, appointment_id, doc.version, updated).body


def cancel(store: DocumentStore, appointment_id: str, actor: str) -> dict:
    """Cancel and recycle: the slot ends up available again, audit shows both steps."""
    doc = store.get_or_none(APPOINTMENTS, appointment_id)
    if doc is None:
        raise NotFoundError(f"appointment {appointment_id} not found")
    slot = doc.body
    _require_transition("cancel", slot["state"])
    updated = dict(slot)
    updated["state"] = "available"
    updated["patient_id"] = None
    updated["audit"] = slot["audit"] + [
        _audit("cancel", slot["state"], "cancelled", actor),
        _audit("recycle", "cancelled", "available", actor),
    ]
    return store.atomic_update(APPOINTMENTS, appointment_id, doc.version, updated).body


def complete(store: DocumentStore, appointment_id: str, clinician_id: str) -> dict:
    doc = store.get_or_none(APPOINTMENTS, appointment_id)
    if doc is None:
        raise NotFoundError(f"appointment {appointment_id} not found")
    slot = doc.body
    _require_transition("complete", slot["state"])
    updated = dict(slot)
    updated["state"] = "completed"
    updated["audit"] = slot["audit"] + [
        _audit("complete", "confirmed", "completed", clinician_id)
    ]
    return store.atomic_update(APPOINTMENTS, appointment_id, doc.version, updated).body


@dataclass(frozen=True)
class VideoSession:
    appointment_id: str
    token: str
    issued_at: str
    valid_until: str

    def as_dict(self) -> dict:
        return {
            "appointment_id": self.appointment_id,
            "token": self.token,
            "issued_at": self.issued_at,
            "valid_until": self.valid_until,
        }


def new_join_token() -> str:
    """Opaque 128-bit random join token, base64url."""
    return secrets.token_urlsafe(16)


def issue_video_session(
    store: DocumentStore, appointment_id: str, now: datetime | None = None
) -> VideoSession:
    slot = get_appointment(store, appointment_id)
    if slot["state"] != "confirmed":
        raise NotConfirmedError(
            f"appointment {appointment_id} is {slot['state']}, not confirmed"
        )
    now = now or now_utc()
    start, end = parse_ts(slot["start"]), parse_ts(slot["end"])
    window_open = start - JOIN_WINDOW_BEFORE
    if not window_open <= now <= end:
        raise OutsideWindowError(
            f"join window is {format_ts(window_open)}..{format_ts(end)}, "
            f"now is {format_ts(now)}"
        )
    session = VideoSession(
        appointment_id=appointment_id,
        token=new_join_token(),
        issued_at=format_ts(now),
        valid_until=slot["end"],
    )
    store.put(VIDEO_SESSIONS, session.token, session.as_dict())
    return session


def _require_transition(action: str, state: str) -> None:
    sources, target = TRANSITIONS[action]
    if state not in sources:
        raise TransitionError(state, target)


def _audit(action: str, from_state: str, to_state: str, actor: str) -> dict:
    return {
        "action": action,
        "from": from_state,
        "to": to_state,
        "actor": actor,
        "at": format_ts(now_utc()),
    }
