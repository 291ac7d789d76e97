"""Release acceptance gate.

Each test exercises one numbered release criterion end to end and prints a
single ``ACCEPTANCE Pn: PASS`` line (or FAIL before re-raising), so a log
scan shows one verdict per criterion. Run with ``pytest tests/test_acceptance.py -s``.

These tests deliberately re-derive expectations from first principles — naive
oracles, closed-form geometry, raw store records — rather than trusting the
code under test.
"""

from __future__ import annotations

import json
import math
import threading
import time
from contextlib import contextmanager
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from telewound import care, scheduling
from telewound import kernels as K
from telewound.cli import main as cli_main
from telewound.demo import seed_demo
from telewound.errors import TelewoundError
from telewound.imaging import decode_mask_png, encode_png
from telewound.model import (
    count_parameters,
    forward,
    load_preset,
    random_bundle,
    token_pyramid,
    write_weights,
)
from telewound.model.network import (
    inject_semantics,
    pool_and_concat,
    segmentation_head,
    semantics_extractor,
)
from telewound.pipeline import (
    CropRect,
    SegmentationParams,
    SegmentationResult,
    extract_components,
    live_loop,
    threshold_mask,
)
from telewound.service import create_app, load_config
from telewound.sizing import ReferenceAnnotation, calibrate_scale, estimate_area
from telewound.store import DocumentStore

from oracles import (
    naive_adaptive_avg_pool,
    naive_attention,
    naive_batchnorm,
    naive_bilinear_resize,
    naive_conv2d,
    simulate_latest_wins,
)
from test_kernels import make_attention_params, randt
from test_store import run_crash_trials

TOL = 1e-5


@contextmanager
def criterion(tag: str):
    """Collects a detail string and prints one verdict line for the criterion."""
    note: list[str] = []
    try:
        yield note
    except BaseException:
        print(f"ACCEPTANCE {tag}: FAIL")
        raise
    detail = f" — {note[0]}" if note else ""
    print(f"ACCEPTANCE {tag}: PASS{detail}")


# -- P1: parameter budget ------------------------------------------------------


def test_p01_parameter_count_within_budget():
    with criterion("P1") as note:
        t0 = time.perf_counter()
        config = load_preset("topformer-tiny")
        count = count_parameters(config)
        elapsed = time.perf_counter() - t0
        assert 1_320_000 <= count <= 1_460_000, count
        assert elapsed < 1.0, f"counting took {elapsed:.3f}s"
        note.append(f"{count:,} parameters computed in {elapsed * 1000:.0f} ms")


# -- P2: forward pass shape contract -------------------------------------------


def test_p02_forward_shapes_and_stage_composition(tiny_model):
    with criterion("P2") as note:
        t0 = time.perf_counter()
        rng = np.random.default_rng(42)

        def image_tensor(h, w):
            return rng.standard_normal((1, 3, h, w)).astype(np.float32)

        for h, w in ((224, 224), (192, 192)):
            out = forward(tiny_model, image_tensor(h, w))
            assert out.shape == (1, 1, h, w), out.shape
            assert np.all(out >= 0.0) and np.all(out <= 1.0)

        image = image_tensor(224, 224)
        tokens = token_pyramid(tiny_model, image)
        strides = [224 // t.shape[2] for t in tokens]
        assert strides == [4, 8, 16, 32], strides
        assert [224 // t.shape[3] for t in tokens] == [4, 8, 16, 32]

        # composing the exposed stages must reproduce forward() bit for bit
        pooled = pool_and_concat(tiny_model, tokens)
        semantics = semantics_extractor(tiny_model, pooled)
        enhanced = inject_semantics(
            tiny_model, tokens[-len(tiny_model.injections):], semantics
        )
        logits = segmentation_head(tiny_model, enhanced)
        composed = K.sigmoid(logits)
        direct = forward(tiny_model, image)
        assert np.array_equal(composed, direct)

        elapsed = time.perf_counter() - t0
        assert elapsed < 30.0, f"{elapsed:.1f}s"
        note.append(
            f"224/192 outputs match inputs, strides {strides}, "
            f"stagewise == forward, {elapsed:.1f}s"
        )


# -- P3: kernels against naive oracles ------------------------------------------

CASES_PER_OP = 100


def _conv_cases():
    rng = np.random.default_rng(301)
    depthwise = grouped = 0
    for case in range(CASES_PER_OP):
        n = int(rng.integers(1, 3))
        cin = int(rng.integers(1, 5))
        if case % 3 == 1:
            groups = cin  # depthwise
        elif case % 3 == 2:
            groups = int(rng.choice([g for g in range(1, cin + 1) if cin % g == 0]))
        else:
            groups = 1
        depthwise += groups == cin > 1
        grouped += 1 < groups < cin
        ocg = int(rng.integers(1, 4))
        oc = groups * ocg
        k = int(rng.integers(1, 4))
        stride = int(rng.integers(1, 3))
        pad = int(rng.integers(0, 3))
        h = int(rng.integers(k, k + 6))
        w = int(rng.integers(k, k + 6))
        x = randt(rng, n, cin, h, w)
        weight = randt(rng, oc, cin // groups, k, k)
        bias = randt(rng, oc) if rng.integers(0, 2) else None
        got = K.conv2d(x, K.ConvParams(
            weight=weight, bias=bias, stride=(stride, stride),
            padding=(pad, pad), groups=groups,
        ))
        want = naive_conv2d(x, weight, bias, (stride, stride), (pad, pad), groups)
        yield np.max(np.abs(got - want))
    assert depthwise >= 10 and grouped >= 1, (depthwise, grouped)


def _fold_cases():
    rng = np.random.default_rng(302)
    for _ in range(CASES_PER_OP):
        cin = int(rng.integers(1, 5))
        oc = int(rng.integers(1, 6))
        k = int(rng.choice([1, 3]))
        x = randt(rng, 1, cin, int(rng.integers(k, k + 5)), int(rng.integers(k, k + 5)))
        weight = randt(rng, oc, cin, k, k)
        bias = randt(rng, oc) if rng.integers(0, 2) else None
        gamma, beta, mean = randt(rng, oc), randt(rng, oc), randt(rng, oc)
        var = rng.uniform(0.1, 2.0, oc).astype(np.float32)
        conv = K.ConvParams(weight=weight, bias=bias, stride=(1, 1),
                            padding=(k // 2, k // 2), groups=1)
        bn = K.BatchNormParams(gamma=gamma, beta=beta, running_mean=mean,
                               running_var=var, eps=1e-5)
        got = K.conv2d(x, K.fold_batchnorm(conv, bn))
        raw = naive_conv2d(x, weight, bias, (1, 1), (k // 2, k // 2), 1)
        want = naive_batchnorm(raw, gamma, beta, mean, var, 1e-5)
        yield np.max(np.abs(got - want))


def _pool_cases():
    rng = np.random.default_rng(303)
    for _ in range(CASES_PER_OP):
        h, w = int(rng.integers(1, 13)), int(rng.integers(1, 13))
        out_hw = (int(rng.integers(1, h + 1)), int(rng.integers(1, w + 1)))
        x = randt(rng, int(rng.integers(1, 3)), int(rng.integers(1, 4)), h, w)
        yield np.max(np.abs(K.adaptive_avg_pool(x, out_hw) -
                            naive_adaptive_avg_pool(x, out_hw)))


def _resize_cases():
    rng = np.random.default_rng(304)
    for _ in range(CASES_PER_OP):
        h, w = int(rng.integers(1, 11)), int(rng.integers(1, 11))
        out_hw = (int(rng.integers(1, 13)), int(rng.integers(1, 13)))
        x = randt(rng, 1, int(rng.integers(1, 4)), h, w)
        yield np.max(np.abs(K.bilinear_resize(x, out_hw) -
                            naive_bilinear_resize(x, out_hw)))


def _attention_cases():
    rng = np.random.default_rng(305)
    for _ in range(CASES_PER_OP):
        feats = int(rng.integers(2, 11))
        heads = int(rng.integers(1, 4))
        key_dim = int(rng.integers(1, 6))
        value_dim = int(rng.integers(1, 6))
        th, tw = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        p = make_attention_params(rng, feats, heads=heads, key_dim=key_dim,
                                  value_dim=value_dim, bias=bool(rng.integers(0, 2)))
        # moderate token magnitudes keep float32 softmax well conditioned
        x = randt(rng, 1, feats, th, tw) * 0.5
        got = K.multi_head_attention(x, p)
        tokens = x.reshape(feats, th * tw).T
        want = naive_attention(
            tokens, p.q_weight, p.k_weight, p.v_weight, p.out_weight,
            heads, key_dim, value_dim,
            p.q_bias, p.k_bias, p.v_bias, p.out_bias,
        )
        got_tokens = got.reshape(feats, th * tw).T
        yield np.max(np.abs(got_tokens - want))


def test_p03_kernels_match_naive_oracles():
    with criterion("P3") as note:
        worst = {}
        for name, cases in (
            ("conv2d", _conv_cases()),
            ("bn_fold", _fold_cases()),
            ("adaptive_avg_pool", _pool_cases()),
            ("bilinear_resize", _resize_cases()),
            ("attention", _attention_cases()),
        ):
            diffs = list(cases)
            assert len(diffs) == CASES_PER_OP
            worst[name] = max(diffs)
            assert worst[name] < TOL, f"{name}: {worst[name]:.2e}"
        summary = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
        note.append(f"{CASES_PER_OP} cases/op, worst abs diff: {summary}")


# -- P4: threshold semantics -----------------------------------------------------


def test_p04_threshold_inclusive_and_monotone():
    with criterion("P4") as note:
        tau = 0.75
        below = np.nextafter(np.float32(tau), np.float32(0.0))
        above = np.nextafter(np.float32(tau), np.float32(1.0))
        probs = np.array([[below, tau], [above, 0.0]], dtype=np.float32)
        mask = threshold_mask(probs, tau)
        assert mask.tolist() == [[False, True], [True, False]]

        rng = np.random.default_rng(44)
        for _ in range(100):
            prob = rng.random((12, 12), dtype=np.float32)
            lo, hi = sorted(rng.random(2).tolist())
            mask_lo = threshold_mask(prob, lo or 1e-6)
            mask_hi = threshold_mask(prob, hi or 2e-6)
            assert not np.any(mask_hi & ~mask_lo), "raising tau grew the mask"
            assert np.array_equal(mask_lo, prob >= (lo or 1e-6))
        note.append("boundary at 0.75 inclusive; 100 random maps monotone in tau")


# -- P5: sizing accuracy ----------------------------------------------------------


def test_p05_disk_areas_and_calibration():
    with criterion("P5") as note:
        worst_rel = 0.0
        for radius in (30, 50, 80):
            n = 2 * radius + 21
            c = n // 2
            yy, xx = np.ogrid[0:n, 0:n]
            mask = (yy - c) ** 2 + (xx - c) ** 2 <= radius * radius
            comps = extract_components(mask, SegmentationParams())
            result = SegmentationResult(
                prob_map=mask.astype(np.float32), mask=mask, components=comps,
                crop_rect=CropRect(0.0, 0.0, float(n), float(n)), latency_ms=0.0,
            )
            for scale in (0.1, 0.25, 0.5):
                size = estimate_area(result, scale)
                expected = math.pi * radius * radius * scale * scale
                rel = abs(size.total_mm2 - expected) / expected
                worst_rel = max(worst_rel, rel)
                assert rel < 0.02, f"r={radius} s={scale}: {rel:.4f}"

        ro = ReferenceAnnotation(ax=0.0, ay=0.0, bx=200.0, by=0.0, known_length_mm=50.0)
        assert calibrate_scale(ro) == 0.25
        note.append(
            f"disks r in (30,50,80) x 3 scales, worst rel err {worst_rel:.3%}; "
            "50 mm over 200 px calibrates to exactly 0.25"
        )


# -- P6: live-loop latest-wins policy ---------------------------------------------


def test_p06_live_loop_matches_discrete_event_oracle():
    with criterion("P6") as note:
        timestamps = [i * 100.0 for i in range(60)]
        duration_ms = 250.0
        blank = SegmentationResult(
            prob_map=np.zeros((2, 2), dtype=np.float32),
            mask=np.zeros((2, 2), dtype=bool),
            components=(), crop_rect=CropRect(0.0, 0.0, 2.0, 2.0), latency_ms=0.0,
        )
        frames = [(ts, np.zeros((2, 2, 3), dtype=np.uint8)) for ts in timestamps]
        results = live_loop(frames, model=None,
                            duration_fn=lambda i: duration_ms,
                            segment_fn=lambda img: blank)

        processed = [r.index for r in results if not r.skipped]
        skipped = [r.index for r in results if r.skipped]
        want_processed, want_skipped = simulate_latest_wins(timestamps, duration_ms)
        assert processed == want_processed
        assert skipped == want_skipped
        assert processed == sorted(processed) and len(set(processed)) == len(processed)
        assert sorted(processed + skipped) == list(range(len(timestamps)))

        # backlog never grows: when a frame starts, no arrived frame is newer
        by_index = {r.index: r for r in results}
        for r in results:
            if r.skipped:
                continue
            newer_arrived = [
                j for j in range(r.index + 1, len(timestamps))
                if timestamps[j] <= r.started_ms
            ]
            assert not newer_arrived, f"frame {r.index} started with backlog"
        note.append(
            f"250 ms work at 100 ms cadence: processed {len(processed)}, "
            f"skipped {len(skipped)}, matches oracle exactly"
        )


# -- P7: scheduling state machine ---------------------------------------------------

LEGAL = {
    ("available", "book"): "booked",
    ("booked", "confirm"): "confirmed",
    ("booked", "cancel"): "available",
    ("confirmed", "cancel"): "available",
    ("confirmed", "complete"): "completed",
}
STATES = ("available", "booked", "confirmed", "cancelled", "completed")
ACTIONS = ("book", "confirm", "cancel", "complete")


def _force_state(store, slot_id, state, patient=None):
    doc = store.get(scheduling.APPOINTMENTS, slot_id)
    body = dict(doc.body)
    body["state"] = state
    body["patient_id"] = patient
    store.atomic_update(scheduling.APPOINTMENTS, slot_id, doc.version, body)


def _apply(store, slot_id, action, patient="p1", clinician="c1"):
    if action == "book":
        scheduling.book_slot(store, slot_id, patient)
    elif action == "confirm":
        scheduling.confirm(store, slot_id, clinician)
    elif action == "cancel":
        scheduling.cancel(store, slot_id, patient)
    else:
        scheduling.complete(store, slot_id, clinician)


def test_p07_transition_table_race_and_fuzz(tmp_path):
    with criterion("P7") as note:
        store = DocumentStore(tmp_path / "sched")

        # exhaustive 5 states x 4 actions
        checked = 0
        for state in STATES:
            for action in ACTIONS:
                slot_id = f"s-{state}-{action}"
                scheduling.create_slot(store, "c1", "2026-09-01T10:00:00Z",
                                       "2026-09-01T10:30:00Z", slot_id=slot_id)
                patient = "p1" if state in ("booked", "confirmed", "completed") else None
                _force_state(store, slot_id, state, patient)
                if (state, action) in LEGAL:
                    _apply(store, slot_id, action)
                    got = store.get(scheduling.APPOINTMENTS, slot_id).body["state"]
                    assert got == LEGAL[(state, action)], (state, action, got)
                else:
                    with pytest.raises(TelewoundError):
                        _apply(store, slot_id, action)
                    got = store.get(scheduling.APPOINTMENTS, slot_id).body["state"]
                    assert got == state, f"illegal {action} mutated {state} -> {got}"
                checked += 1
        assert checked == 20

        # 8-way booking race: exactly one winner
        scheduling.create_slot(store, "c1", "2026-09-02T10:00:00Z",
                               "2026-09-02T10:30:00Z", slot_id="s-race")
        barrier = threading.Barrier(8)
        outcomes = []

        def contender(i):
            barrier.wait()
            try:
                scheduling.book_slot(store, "s-race", f"racer-{i}")
                outcomes.append(("win", i))
            except TelewoundError:
                outcomes.append(("lose", i))

        threads = [threading.Thread(target=contender, args=(i,)) for i in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        wins = [o for o in outcomes if o[0] == "win"]
        assert len(wins) == 1, outcomes
        winner_doc = store.get(scheduling.APPOINTMENTS, "s-race").body
        assert winner_doc["state"] == "booked"
        assert winner_doc["patient_id"] == f"racer-{wins[0][1]}"

        # 10,000-action fuzz with invariants checked along the way
        import random as _random
        fuzz_store = DocumentStore(tmp_path / "fuzz")
        windows = {
            "c1": (("10:00", "10:30"), ("10:30", "11:00"), ("11:00", "11:30")),
            # c2's first window overlaps two of c1's, exercising the overlap rule
            "c2": (("10:15", "10:45"), ("12:00", "12:30"), ("13:00", "13:30")),
        }
        slot_ids = []
        for clin, spans in windows.items():
            for si, (s, e) in enumerate(spans):
                sid = f"f-{clin}-{si}"
                scheduling.create_slot(fuzz_store, clin,
                                       f"2026-09-03T{s}:00Z", f"2026-09-03T{e}:00Z",
                                       slot_id=sid)
                slot_ids.append(sid)
        patients = ("pa", "pb", "pc", "pd", "pe")
        clinician_of = {sid: sid.split("-")[1] for sid in slot_ids}
        rng = _random.Random(20260901)
        applied = errored = 0

        def check_invariants():
            active_spans: dict[str, list] = {p: [] for p in patients}
            for sid in slot_ids:
                body = fuzz_store.get(scheduling.APPOINTMENTS, sid).body
                assert body["state"] in STATES
                assert body["state"] != "cancelled", "cancel must recycle the slot"
                if body["state"] == "available":
                    assert body["patient_id"] is None
                else:
                    assert body["patient_id"] in patients
                if body["state"] in ("booked", "confirmed"):
                    active_spans[body["patient_id"]].append((body["start"], body["end"]))
            for patient, spans in active_spans.items():
                spans.sort()
                for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
                    assert e1 <= s2, f"{patient} double-booked: {spans}"

        for step in range(10_000):
            idx = rng.randrange(len(slot_ids))
            sid = slot_ids[idx]
            body = fuzz_store.get(scheduling.APPOINTMENTS, sid).body
            if body["state"] == "completed":
                # completed is terminal; open a replacement in a fresh window.
                # Windows slide by 15 min with 30 min spans so replacements
                # keep overlapping each other.
                new_id = f"{sid.rsplit('-r', 1)[0]}-r{step}"
                start = datetime(2026, 9, 4, tzinfo=timezone.utc) \
                    + timedelta(minutes=15 * step)
                scheduling.create_slot(
                    fuzz_store, body["clinician_id"],
                    start.strftime("%Y-%m-%dT%H:%M:%SZ"),
                    (start + timedelta(minutes=30)).strftime("%Y-%m-%dT%H:%M:%SZ"),
                    slot_id=new_id,
                )
                clinician_of[new_id] = body["clinician_id"]
                slot_ids[idx] = new_id
                sid = new_id
                body = fuzz_store.get(scheduling.APPOINTMENTS, sid).body
            legal = [a for (s, a) in LEGAL if s == body["state"]]
            if legal and rng.random() < 0.6:
                action = rng.choice(legal)
            else:
                action = rng.choice(ACTIONS)
            patient = rng.choice(patients)
            clinician = (clinician_of[sid] if rng.random() < 0.7
                         else rng.choice(("c1", "c2", "cx")))
            try:
                _apply(fuzz_store, sid, action, patient=patient, clinician=clinician)
                applied += 1
            except TelewoundError:
                errored += 1
            if step % 250 == 0:
                check_invariants()
        check_invariants()
        assert applied > 2000 and errored > 1000, (applied, errored)
        note.append(
            f"20/20 transitions, 1 race winner of 8, fuzz 10000 actions "
            f"({applied} applied, {errored} rejected) with invariants held"
        )


# -- P8: end-to-end service flow ------------------------------------------------------


def _recompute_gallery(records, wound_id):
    hits = []
    for record in records:
        for entry in record["wounds"]:
            if entry["wound_id"] == wound_id:
                hits.append((record["timestamp"], record["id"]))
    hits.sort()
    return [
        {"counter": f"{i} of {len(hits)}", "documentation_id": rec_id, "timestamp": ts}
        for i, (ts, rec_id) in enumerate(hits, start=1)
    ]


def _recompute_daily_latest(candidates):
    byday = {}
    for ts, rec_id, values in candidates:
        day = ts[:10]
        if day not in byday or (ts, rec_id) > byday[day][0]:
            byday[day] = ((ts, rec_id), values)
    return [{"date": d, "values": byday[d][1]} for d in sorted(byday)]


def _recompute_wound_trajectory(records, wound_id):
    candidates = []
    for record in records:
        for entry in record["wounds"]:
            if entry["wound_id"] != wound_id:
                continue
            values = dict(entry["questionnaire"])
            if entry.get("size") is not None:
                values["area_cm2"] = entry["size"]["total_cm2"]
            candidates.append((record["timestamp"], record["id"], values))
    return _recompute_daily_latest(candidates)


def _recompute_general_trajectory(records):
    return _recompute_daily_latest([
        (r["timestamp"], r["id"], dict(r["general_questionnaire"])) for r in records
    ])


def _demo_photo(seed):
    rng = np.random.default_rng(seed)
    img = rng.integers(120, 200, (224, 224, 3), dtype=np.uint8)
    yy, xx = np.ogrid[0:224, 0:224]
    img[((yy - 112) ** 2 + (xx - 112) ** 2) <= 40 * 40] = (150, 60, 55)
    return img


def test_p08_end_to_end_store_and_forward(tmp_path):
    with criterion("P8") as note:
        t0 = time.perf_counter()
        data_dir = tmp_path / "demo"
        summary = seed_demo(data_dir)
        assert summary["patients"] == 2 and summary["wounds"] == 3
        config = load_config(data_dir / "config.json")
        client = TestClient(create_app(config), raise_server_exceptions=False)

        def login(username, password):
            resp = client.post("/api/v1/auth/login",
                               json={"username": username, "password": password})
            assert resp.status_code == 200, resp.text
            return {"Authorization": f"Bearer {resp.json()['token']}"}

        amira = login("amira", "amira-demo")
        lang = login("lang", "lang-demo")

        # submit a fifteenth day covering both wounds, with an idempotency key
        manifest = {
            "timestamp": "2026-08-20T09:00:00Z",
            "feedback_mode": "a_posteriori",
            "wounds": [
                {"wound_id": "w-amira-shin", "image": "shin.png", "confirmed": True,
                 "questionnaire": {"pain": 2, "itching": 1, "exudate": 0}},
                {"wound_id": "w-amira-heel", "image": "heel.png", "confirmed": True,
                 "questionnaire": {"pain": 1, "itching": 0, "exudate": 0}},
            ],
            "general_questionnaire": {"mood": 7, "activity_impact": 2,
                                      "quality_of_life": 8},
        }
        files = [
            ("images", ("shin.png", encode_png(_demo_photo(1)), "image/png")),
            ("images", ("heel.png", encode_png(_demo_photo(2)), "image/png")),
        ]
        resp = client.post(
            "/api/v1/patients/p-amira/documentations",
            data={"manifest": json.dumps(manifest)}, files=files,
            headers={**amira, "Idempotency-Key": "accept-p8"},
        )
        assert resp.status_code == 201, resp.text
        record = resp.json()
        record_id = record["id"]

        # raw records straight off disk are the recompute oracle
        raw_store = DocumentStore(data_dir)
        records = care.list_documentations(raw_store, "p-amira")
        assert len(records) == 15

        for wound_id in ("w-amira-shin", "w-amira-heel"):
            gallery = client.get(f"/api/v1/wounds/{wound_id}/gallery",
                                 headers=amira).json()
            want = _recompute_gallery(records, wound_id)
            assert len(gallery["items"]) == 15
            assert gallery["items"][-1]["counter"] == "15 of 15"
            assert gallery["items"][-1]["documentation_id"] == record_id
            got = [
                {k: item[k] for k in ("counter", "documentation_id", "timestamp")}
                for item in gallery["items"]
            ]
            assert got == want

            traj = client.get(f"/api/v1/wounds/{wound_id}/trajectory",
                              headers=amira).json()
            assert traj["points"] == _recompute_wound_trajectory(records, wound_id)

        general = client.get("/api/v1/patients/p-amira/trajectory/general",
                             headers=amira).json()
        assert general["points"] == _recompute_general_trajectory(records)

        # clinician annotates a reference object: 200 px spanning 50 mm
        anno = client.post(
            f"/api/v1/documentations/{record_id}/ro-annotation",
            json={"wound_id": "w-amira-shin",
                  "ro": {"ax": 10.0, "ay": 10.0, "bx": 210.0, "by": 10.0,
                         "known_length_mm": 50.0}},
            headers=lang,
        )
        assert anno.status_code == 200, anno.text
        size = anno.json()["size"]
        assert size["scale_mm_per_px"] == 0.25

        # recompute the annotated area from the stored mask blob
        records = care.list_documentations(raw_store, "p-amira")
        annotated = next(r for r in records if r["id"] == record_id)
        entry = next(e for e in annotated["wounds"] if e["wound_id"] == "w-amira-shin")
        mask_bytes, _ = raw_store.get_blob(entry["mask_blob"])
        mask = decode_mask_png(mask_bytes)
        factor = entry["segmentation"]["crop_rect"]["width"] / mask.shape[1]
        want_mm2 = float(mask.sum()) * (0.25 * factor) ** 2
        assert size["total_mm2"] == pytest.approx(want_mm2, rel=1e-9)
        assert entry["size"]["total_cm2"] == pytest.approx(want_mm2 / 100.0)

        # the recomputed area appears in subsequent trajectory reads
        traj = client.get("/api/v1/wounds/w-amira-shin/trajectory",
                          headers=amira).json()
        assert traj["points"] == _recompute_wound_trajectory(records, "w-amira-shin")
        last = traj["points"][-1]
        assert last["date"] == "2026-08-20"
        assert last["values"]["area_cm2"] == pytest.approx(want_mm2 / 100.0)

        # replaying the same idempotency key returns the original, no duplicate
        replay = client.post(
            "/api/v1/patients/p-amira/documentations",
            data={"manifest": json.dumps(manifest)}, files=files,
            headers={**amira, "Idempotency-Key": "accept-p8"},
        )
        assert replay.status_code == 200
        assert replay.json()["id"] == record_id
        assert len(care.list_documentations(raw_store, "p-amira")) == 15

        # a fresh process over the same directory serves identical reads
        client2 = TestClient(create_app(load_config(data_dir / "config.json")),
                             raise_server_exceptions=False)
        amira2 = login("amira", "amira-demo")
        again = client2.get("/api/v1/wounds/w-amira-shin/gallery", headers=amira2)
        assert again.status_code == 200
        assert [i["counter"] for i in again.json()["items"]][-1] == "15 of 15"

        elapsed = time.perf_counter() - t0
        assert elapsed < 60.0, f"{elapsed:.1f}s"
        note.append(
            f"seed -> submit -> gallery/trajectories match raw-record recompute -> "
            f"RO resize -> idempotent replay -> restart reads, {elapsed:.1f}s"
        )


# -- P9: crash safety -------------------------------------------------------------------


def test_p09_crash_injection_leaves_no_torn_documents(tmp_path):
    with criterion("P9") as note:
        trials = run_crash_trials(tmp_path, trials=200)
        assert trials == 200
        note.append("200 randomized kill points, every reopen saw only whole documents")


# -- P10: CLI byte stability ---------------------------------------------------------------


def test_p10_cli_outputs_byte_stable(tmp_path):
    with criterion("P10") as note:
        config = load_preset("topformer-nano")
        weights = tmp_path / "nano.waiw"
        write_weights(random_bundle(config, seed=101), weights)
        photo = tmp_path / "photo.png"
        photo.write_bytes(encode_png(_demo_photo(3)))

        mask = np.zeros((20, 20), dtype=bool)
        mask[5:15, 5:15] = True
        from telewound.imaging import encode_mask_png
        mask_path = tmp_path / "mask.png"
        mask_path.write_bytes(encode_mask_png(mask))

        runner = CliRunner()
        checked = []

        def stable(name, args, artifacts=()):
            # identical relative output paths inside fresh working directories,
            # so any cross-run difference is real nondeterminism
            rounds = []
            for _ in range(2):
                with runner.isolated_filesystem(temp_dir=tmp_path):
                    result = runner.invoke(cli_main, args)
                    assert result.exit_code == 0, result.output
                    blobs = tuple(Path(art).read_bytes() for art in artifacts)
                rounds.append((result.stdout, blobs))
            assert rounds[0] == rounds[1], f"{name} output differs between runs"
            checked.append(name)

        stable("segment", [
            "segment", "--model", str(weights), "--image", str(photo),
            "--out", "mask.png", "--overlay", "overlay.png", "--json",
        ], artifacts=("mask.png", "overlay.png"))
        stable("area", [
            "area", "--mask", str(mask_path), "--scale-mm-per-px", "0.5", "--json",
        ])
        stable("inspect-weights", ["inspect-weights", str(weights), "--json"])
        stable("seed-demo", ["seed-demo", "--data", "demo", "--json"])

        note.append(f"{', '.join(checked)}: stdout and artifacts identical across "
                    "two consecutive runs")
