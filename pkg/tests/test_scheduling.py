"""Scheduling tests: transition table, races, recycling, video windows, fuzzing."""

import random
import threading
from datetime import timedelta

import pytest

from telewound.errors import (
    ConflictError,
    InvalidArgumentError,
    NotConfirmedError,
    NotFoundError,
    OutsideWindowError,
    OverlapConflictError,
    TransitionError,
)
from telewound.scheduling import (
    APPOINTMENTS,
    STATES,
    book_slot,
    cancel,
    complete,
    confirm,
    create_slot,
    get_appointment,
    issue_video_session,
    list_slots,
    new_join_token,
)
from telewound.store import DocumentStore
from telewound.timefmt import parse_ts

T0 = "2026-09-01T10:00:00Z"
T1 = "2026-09-01T10:30:00Z"


@pytest.fixture
def store(tmp_path):
    return DocumentStore(tmp_path / "data")


def _slot(store, start=T0, end=T1, clinician="c1", slot_id=None):
    return create_slot(store, clinician, start, end, slot_id=slot_id)


def _force_state(store, slot_id, state):
    """Drop an appointment directly into an arbitrary state for table testing."""
    doc = store.get(APPOINTMENTS, slot_id)
    body = dict(doc.body)
    body["state"] = state
    body["patient_id"] = "px" if state in ("booked", "confirmed", "completed") else None
    store.atomic_update(APPOINTMENTS, slot_id, doc.version, body)


# -- slot creation and listing ---------------------------------------------------


def test_create_slot_fields(store):
    slot = _slot(store, slot_id="s1")
    assert slot["state"] == "available"
    assert slot["patient_id"] is None
    assert slot["clinician_id"] == "c1"
    assert slot["audit"] == []


def test_create_slot_rejects_inverted_times(store):
    with pytest.raises(InvalidArgumentError):
        create_slot(store, "c1", T1, T0)
    with pytest.raises(InvalidArgumentError):
        create_slot(store, "c1", T0, T0)


def test_list_slots_groups_by_day(store):
    _slot(store, "2026-09-02T09:00:00Z", "2026-09-02T09:30:00Z", slot_id="b")
    _slot(store, "2026-09-01T14:00:00Z", "2026-09-01T14:30:00Z", slot_id="a2")
    _slot(store, "2026-09-01T09:00:00Z", "2026-09-01T09:30:00Z", slot_id="a1")
    days = list_slots(store)
    assert [d["date"] for d in days] == ["2026-09-01", "2026-09-02"]
    assert [s["id"] for s in days[0]["slots"]] == ["a1", "a2"]


def test_list_slots_filters(store):
    _slot(store, clinician="c1", slot_id="s1")
    _slot(store, "2026-09-03T10:00:00Z", "2026-09-03T10:30:00Z", clinician="c2", slot_id="s2")
    only_c2 = list_slots(store, clinician_id="c2")
    assert [s["id"] for d in only_c2 for s in d["slots"]] == ["s2"]
    ranged = list_slots(store, start_date="2026-09-02", end_date="2026-09-04")
    assert [s["id"] for d in ranged for s in d["slots"]] == ["s2"]


def test_list_slots_rejects_inverted_range(store):
    with pytest.raises(InvalidArgumentError):
        list_slots(store, start_date="2026-09-05", end_date="2026-09-01")


# -- single transitions ----------------------------------------------------------


def test_book_then_confirm_then_complete(store):
    slot = _slot(store, slot_id="s1")
    booked = book_slot(store, "s1", "p1")
    assert booked["state"] == "booked"
    assert booked["patient_id"] == "p1"
    confirmed = confirm(store, "s1", "c1")
    assert confirmed["state"] == "confirmed"
    done = complete(store, "s1", "c1")
    assert done["state"] == "completed"
    actions = [entry["action"] for entry in done["audit"]]
    assert actions == ["book", "confirm", "complete"]


def test_book_unknown_slot(store):
    with pytest.raises(NotFoundError):
        book_slot(store, "ghost", "p1")


def test_double_book_is_transition_error(store):
    _slot(store, slot_id="s1")
    book_slot(store, "s1", "p1")
    with pytest.raises(TransitionError) as exc:
        book_slot(store, "s1", "p2")
    assert exc.value.from_state == "booked"
    assert get_appointment(store, "s1")["patient_id"] == "p1"


def test_confirm_requires_owning_clinician(store):
    _slot(store, slot_id="s1", clinician="c1")
    book_slot(store, "s1", "p1")
    with pytest.raises(InvalidArgumentError):
        confirm(store, "s1", "c2")
    assert get_appointment(store, "s1")["state"] == "booked"


def test_cancel_recycles_slot(store):
    _slot(store, slot_id="s1")
    book_slot(store, "s1", "p1")
    confirm(store, "s1", "c1")
    doc_before = store.get(APPOINTMENTS, "s1")
    recycled = cancel(store, "s1", "p1")
    doc_after = store.get(APPOINTMENTS, "s1")
    assert recycled["state"] == "available"
    assert recycled["patient_id"] is None
    # one atomic write carries both the cancel and the recycle
    assert doc_after.version == doc_before.version + 1
    tail = recycled["audit"][-2:]
    assert [(e["action"], e["to"]) for e in tail] == [
        ("cancel", "cancelled"), ("recycle", "available"),
    ]
    # the freed slot is immediately bookable again
    rebooked = book_slot(store, "s1", "p2")
    assert rebooked["patient_id"] == "p2"


def test_cancel_completed_is_error(store):
    _slot(store, slot_id="s1")
    book_slot(store, "s1", "p1")
    confirm(store, "s1", "c1")
    complete(store, "s1", "c1")
    with pytest.raises(TransitionError) as exc:
        cancel(store, "s1", "p1")
    assert exc.value.from_state == "completed"
    assert get_appointment(store, "s1")["state"] == "completed"


# -- exhaustive transition table ---------------------------------------------------

LEGAL = {
    ("available", "book"): "booked",
    ("booked", "confirm"): "confirmed",
    ("booked", "cancel"): "available",
    ("confirmed", "cancel"): "available",
    ("confirmed", "complete"): "completed",
}

ACTIONS = ("book", "confirm", "cancel", "complete")


@pytest.mark.parametrize("state", STATES)
@pytest.mark.parametrize("action", ACTIONS)
def test_transition_table_exhaustive(store, state, action):
    _slot(store, slot_id="s1")
    _force_state(store, "s1", state)
    apply = {
        "book": lambda: book_slot(store, "s1", "p-new"),
        "confirm": lambda: confirm(store, "s1", "c1"),
        "cancel": lambda: cancel(store, "s1", "px"),
        "complete": lambda: complete(store, "s1", "c1"),
    }[action]
    expected = LEGAL.get((state, action))
    if expected is None:
        with pytest.raises(TransitionError) as exc:
            apply()
        assert exc.value.from_state == state
        assert get_appointment(store, "s1")["state"] == state
    else:
        result = apply()
        assert result["state"] == expected


# -- overlap protection ----------------------------------------------------------


def test_patient_cannot_double_book_overlap(store):
    _slot(store, "2026-09-01T10:00:00Z", "2026-09-01T10:30:00Z", slot_id="s1")
    _slot(store, "2026-09-01T10:15:00Z", "2026-09-01T10:45:00Z", clinician="c2", slot_id="s2")
    book_slot(store, "s1", "p1")
    with pytest.raises(OverlapConflictError):
        book_slot(store, "s2", "p1")
    assert get_appointment(store, "s2")["state"] == "available"


def test_adjacent_slots_do_not_overlap(store):
    _slot(store, "2026-09-01T10:00:00Z", "2026-09-01T10:30:00Z", slot_id="s1")
    _slot(store, "2026-09-01T10:30:00Z", "2026-09-01T11:00:00Z", slot_id="s2")
    book_slot(store, "s1", "p1")
    assert book_slot(store, "s2", "p1")["state"] == "booked"


def test_cancelled_booking_frees_the_time(store):
    _slot(store, "2026-09-01T10:00:00Z", "2026-09-01T10:30:00Z", slot_id="s1")
    _slot(store, "2026-09-01T10:00:00Z", "2026-09-01T10:30:00Z", clinician="c2", slot_id="s2")
    book_slot(store, "s1", "p1")
    cancel(store, "s1", "p1")
    assert book_slot(store, "s2", "p1")["state"] == "booked"


def test_other_patient_unaffected_by_overlap(store):
    _slot(store, "2026-09-01T10:00:00Z", "2026-09-01T10:30:00Z", slot_id="s1")
    _slot(store, "2026-09-01T10:15:00Z", "2026-09-01T10:45:00Z", clinician="c2", slot_id="s2")
    book_slot(store, "s1", "p1")
    assert book_slot(store, "s2", "p2")["state"] == "booked"


# -- concurrency -----------------------------------------------------------------


def test_eight_way_booking_race_single_winner(store):
    _slot(store, slot_id="hot")
    outcomes = {}
    barrier = threading.Barrier(8)

    def attempt(i):
        barrier.wait()
        try:
            book_slot(store, "hot", f"p{i}")
            outcomes[i] = "won"
        except (ConflictError, TransitionError):
            outcomes[i] = "lost"

    threads = [threading.Thread(target=attempt, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    assert sorted(outcomes.values()).count("won") == 1
    final = get_appointment(store, "hot")
    winner = next(i for i, result in outcomes.items() if result == "won")
    assert final["state"] == "booked"
    assert final["patient_id"] == f"p{winner}"


# -- randomized action fuzzing ------------------------------------------------------


def test_fuzzed_action_sequences_never_corrupt_state(store):
    """10k random actions against a slot pool: every invariant holds after each."""
    rng = random.Random(20260901)
    base = parse_ts("2026-09-01T08:00:00Z")
    slot_ids = []
    for i in range(6):
        start = base + timedelta(minutes=30 * i)
        end = start + timedelta(minutes=30)
        slot = create_slot(
            store, f"c{i % 2}",
            start.strftime("%Y-%m-%dT%H:%M:%SZ"),
            end.strftime("%Y-%m-%dT%H:%M:%SZ"),
            slot_id=f"f{i}",
        )
        slot_ids.append(slot["id"])
    patients = ["p1", "p2", "p3"]

    def check_invariants():
        held = {}
        for sid in slot_ids:
            body = get_appointment(store, sid)
            assert body["state"] in STATES
            assert body["state"] != "cancelled"  # cancellation always recycles
            if body["state"] in ("booked", "confirmed", "completed"):
                assert body["patient_id"] is not None
            else:
                assert body["patient_id"] is None
            if body["state"] in ("booked", "confirmed"):
                held.setdefault(body["patient_id"], []).append(
                    (body["start"], body["end"])
                )
        for spans in held.values():
            spans.sort()
            for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
                assert e1 <= s2, "patient holds overlapping active appointments"

    errors = (ConflictError, TransitionError, NotFoundError, InvalidArgumentError)
    for step in range(10_000):
        action = rng.choice(("book", "confirm", "cancel", "complete"))
        sid = rng.choice(slot_ids)
        try:
            if action == "book":
                book_slot(store, sid, rng.choice(patients))
            elif action == "confirm":
                confirm(store, sid, get_appointment(store, sid)["clinician_id"])
            elif action == "cancel":
                cancel(store, sid, "fuzzer")
            else:
                complete(store, sid, get_appointment(store, sid)["clinician_id"])
        except errors:
            pass
        if step % 250 == 0:
            check_invariants()
    check_invariants()


# -- video sessions ----------------------------------------------------------------


def _confirmed_slot(store):
    _slot(store, slot_id="v1")
    book_slot(store, "v1", "p1")
    confirm(store, "v1", "c1")
    return "v1"


def test_video_session_inside_window(store):
    sid = _confirmed_slot(store)
    now = parse_ts(T0) - timedelta(minutes=5)
    session = issue_video_session(store, sid, now=now)
    assert session.appointment_id == sid
    assert len(session.token) >= 16


def test_video_session_window_boundaries(store):
    sid = _confirmed_slot(store)
    opens = parse_ts(T0) - timedelta(minutes=15)
    closes = parse_ts(T1)
    assert issue_video_session(store, sid, now=opens).token
    assert issue_video_session(store, sid, now=closes).token
    with pytest.raises(OutsideWindowError):
        issue_video_session(store, sid, now=opens - timedelta(minutes=1))
    with pytest.raises(OutsideWindowError):
        issue_video_session(store, sid, now=closes + timedelta(minutes=1))


def test_video_session_requires_confirmed(store):
    _slot(store, slot_id="v2")
    book_slot(store, "v2", "p1")
    with pytest.raises(NotConfirmedError):
        issue_video_session(store, "v2", now=parse_ts(T0))


def test_video_session_tokens_are_fresh(store):
    sid = _confirmed_slot(store)
    now = parse_ts(T0)
    a = issue_video_session(store, sid, now=now)
    b = issue_video_session(store, sid, now=now)
    assert a.token != b.token


def test_join_token_uniqueness_bulk():
    tokens = {new_join_token() for _ in range(100_000)}
    assert len(tokens) == 100_000
