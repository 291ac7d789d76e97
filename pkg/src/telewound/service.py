"""HTTP/JSON facade for store-and-forward wound documentation.

The service is a thin layer: every handler authenticates, authorizes, calls
into the care/scheduling/sizing modules, and maps domain errors to status
codes. All state lives in the document store, so a restart preserves every
read, and each successful mutation is durable before the response is sent.

Configuration comes from a single JSON file; any key can be overridden with
an environment variable named ``TELEWOUND_<KEY>`` (upper-cased).
"""

from __future__ import annotations

import hashlib
import json
import os
import secrets
from dataclasses import dataclass, fields, replace
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np
from fastapi import Body, FastAPI, File, Form, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from . import care, scheduling
from .errors import (
    AuthenticationError,
    AuthorizationError,
    ConflictError,
    ImageFormatError,
    InvalidArgumentError,
    NotFoundError,
    PayloadTooLargeError,
    ValidationError,
)
from .imaging import decode_image, decode_mask_png, encode_mask_png
from .model import load_model
from .model.network import Model
from .pipeline import CropRect, SegmentationParams, SegmentationResult, extract_components, segment
from .sizing import ReferenceAnnotation, calibrate_scale, estimate_area
from .store import DocumentStore
from .timefmt import format_ts, now_utc, parse_ts

USERS = "users"
SESSIONS = "sessions"
IDEMPOTENCY = "idempotency"

ROLES = ("patient", "clinician")
SESSION_TTL = timedelta(hours=24)
ENV_PREFIX = "TELEWOUND_"
DEFAULT_UPLOAD_LIMIT = 20 * 1024 * 1024


# -- configuration ----------------------------------------------------------------


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: str
    model_path: str
    host: str = "127.0.0.1"
    port: int = 8077
    threshold: float = 0.75
    upload_limit_bytes: int = DEFAULT_UPLOAD_LIMIT

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise InvalidArgumentError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.upload_limit_bytes <= 0:
            raise InvalidArgumentError("upload_limit_bytes must be positive")
        if not 0 < self.port < 65536:
            raise InvalidArgumentError(f"port must be in [1, 65535], got {self.port}")


def load_config(path: str | Path) -> ServiceConfig:
    """Read the JSON config file and apply TELEWOUND_* environment overrides."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise InvalidArgumentError("config root must be a JSON object")

    known = {f.name: f.type for f in fields(ServiceConfig)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise InvalidArgumentError(f"unknown config keys: {unknown}")
    for name in ("data_dir", "model_path"):
        if name not in raw:
            raise InvalidArgumentError(f"config is missing required key {name!r}")

    config = ServiceConfig(**raw)
    overrides = {}
    casts = {"port": int, "upload_limit_bytes": int, "threshold": float}
    for name in known:
        env = os.environ.get(ENV_PREFIX + name.upper())
        if env is None:
            continue
        try:
            overrides[name] = casts.get(name, str)(env)
        except ValueError:
            raise InvalidArgumentError(
                f"environment override {ENV_PREFIX + name.upper()}={env!r} is not a valid value"
            ) from None
    return replace(config, **overrides) if overrides else config


# -- users and sessions --------------------------------------------------------------


def _hash_password(password: str, salt: str) -> str:
    return hashlib.sha256((salt + ":" + password).encode("utf-8")).hexdigest()


def _hash_token(token: str) -> str:
    return hashlib.sha256(token.encode("utf-8")).hexdigest()


def create_user(
    store: DocumentStore,
    username: str,
    password: str,
    role: str,
    principal_id: str,
    display_name: str = "",
) -> dict:
    if role not in ROLES:
        raise InvalidArgumentError(f"role must be one of {ROLES}, got {role!r}")
    if not username or not password:
        raise InvalidArgumentError("username and password are required")
    salt = secrets.token_hex(8)
    user = {
        "username": username,
        "password_salt": salt,
        "password_hash": _hash_password(password, salt),
        "role": role,
        "principal_id": principal_id,
        "display_name": display_name or username,
    }
    store.put(USERS, username, user)
    return {k: user[k] for k in ("username", "role", "principal_id", "display_name")}


@dataclass(frozen=True)
class Session:
    principal_id: str
    role: str
    expires_at: str


def login(store: DocumentStore, username: str, password: str, now: datetime | None = None) -> dict:
    """Verify credentials and mint a bearer token; only its hash is persisted."""
    doc = store.get_or_none(USERS, username or "")
    if doc is None:
        raise AuthenticationError("unknown user or wrong password")
    user = doc.body
    candidate = _hash_password(password or "", user["password_salt"])
    if not secrets.compare_digest(candidate, user["password_hash"]):
        raise AuthenticationError("unknown user or wrong password")
    token = secrets.token_urlsafe(24)
    expires = format_ts((now or now_utc()) + SESSION_TTL)
    store.put(SESSIONS, _hash_token(token), {
        "principal_id": user["principal_id"],
        "role": user["role"],
        "expires_at": expires,
    })
    return {
        "token": token,
        "role": user["role"],
        "principal_id": user["principal_id"],
        "display_name": user["display_name"],
        "expires_at": expires,
    }


def authenticate(store: DocumentStore, token: str, now: datetime | None = None) -> Session:
    doc = store.get_or_none(SESSIONS, _hash_token(token))
    if doc is None:
        raise AuthenticationError("invalid token")
    body = doc.body
    if (now or now_utc()) > parse_ts(body["expires_at"]):
        raise AuthenticationError("session expired")
    return Session(body["principal_id"], body["role"], body["expires_at"])


# -- application factory ---------------------------------------------------------------


def create_app(
    config: ServiceConfig,
    *,
    store: DocumentStore | None = None,
    model: Model | None = None,
) -> FastAPI:
    store = store if store is not None else DocumentStore(config.data_dir)
    model = model if model is not None else load_model(config.model_path)

    app = FastAPI(title="telewound", version="1.0", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.model = model
    app.state.config = config
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    _register_error_handlers(app)

    def require_session(request: Request) -> Session:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise AuthenticationError("missing bearer token")
        return authenticate(store, header[7:].strip())

    def require_patient_access(session: Session, patient_id: str) -> None:
        """Patients reach only themselves; clinicians only assigned patients."""
        if session.role == "patient":
            if session.principal_id != patient_id:
                raise AuthorizationError("patients may only access their own records")
            return
        patient = care.get_patient(store, patient_id)
        if session.principal_id not in patient["clinician_ids"]:
            raise AuthorizationError("clinician is not assigned to this patient")

    def require_role(session: Session, role: str) -> None:
        if session.role != role:
            raise AuthorizationError(f"endpoint requires the {role} role")

    def require_appointment_party(session: Session, appointment: dict) -> None:
        if session.role == "clinician" and session.principal_id == appointment["clinician_id"]:
            return
        if session.role == "patient" and session.principal_id == appointment["patient_id"]:
            return
        raise AuthorizationError("not a party to this appointment")

    # -- public endpoints ---------------------------------------------------------

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/api/v1/auth/login")
    def auth_login(payload: dict = Body(...)):
        return login(store, payload.get("username", ""), payload.get("password", ""))

    @app.get("/api/v1/help/{screen_id}")
    def help_screen(screen_id: str, locale: str = "en"):
        return care.help_text(screen_id, locale=locale)

    # -- patient data -------------------------------------------------------------

    @app.get("/api/v1/patients/{patient_id}/overview")
    def overview(patient_id: str, request: Request):
        session = require_session(request)
        require_patient_access(session, patient_id)
        return care.patient_overview(store, patient_id)

    @app.post("/api/v1/patients/{patient_id}/documentations", status_code=201)
    def submit_documentation(
        patient_id: str,
        request: Request,
        manifest: str = Form(...),
        images: list[UploadFile] = File([]),
    ):
        session = require_session(request)
        require_role(session, "patient")
        if session.principal_id != patient_id:
            raise AuthorizationError("patients may only submit their own documentation")

        files: dict[str, tuple[bytes, str]] = {}
        for upload in images:
            data = upload.file.read()
            if len(data) > config.upload_limit_bytes:
                raise PayloadTooLargeError(
                    f"{upload.filename}: {len(data)} bytes exceeds the "
                    f"{config.upload_limit_bytes} byte upload limit"
                )
            files[upload.filename] = (data, upload.content_type or "application/octet-stream")

        try:
            body = json.loads(manifest)
        except json.JSONDecodeError:
            raise ValidationError("manifest", "json", "manifest is not valid JSON") from None
        if not isinstance(body, dict):
            raise ValidationError("manifest", "type", "manifest must be a JSON object")

        record_id, replay = _resolve_idempotency(
            store, patient_id, request.headers.get("idempotency-key")
        )
        if replay is not None:
            return JSONResponse(replay, status_code=200)

        record = _ingest_submission(
            store, model, config, patient_id, record_id, body, files
        )
        return record

    @app.get("/api/v1/wounds/{wound_id}/gallery")
    def wound_gallery(wound_id: str, request: Request):
        session = require_session(request)
        wound = care.get_wound(store, wound_id)
        require_patient_access(session, wound["patient_id"])
        return {
            "wound_id": wound_id,
            "items": [item.as_dict() for item in care.gallery(store, wound_id)],
        }

    @app.get("/api/v1/wounds/{wound_id}/trajectory")
    def trajectory(wound_id: str, request: Request, start: str = None, end: str = None):
        session = require_session(request)
        wound = care.get_wound(store, wound_id)
        require_patient_access(session, wound["patient_id"])
        return care.wound_trajectory(store, wound_id, start=start, end=end).as_dict()

    @app.get("/api/v1/patients/{patient_id}/trajectory/general")
    def general_trajectory(patient_id: str, request: Request, start: str = None, end: str = None):
        session = require_session(request)
        require_patient_access(session, patient_id)
        return care.general_trajectory(store, patient_id, start=start, end=end).as_dict()

    # -- appointments ---------------------------------------------------------------

    @app.get("/api/v1/appointments/slots")
    def slots(
        request: Request,
        clinician_id: str = None,
        start_date: str = None,
        end_date: str = None,
    ):
        require_session(request)
        return {
            "days": scheduling.list_slots(
                store, clinician_id=clinician_id, start_date=start_date, end_date=end_date
            )
        }

    @app.post("/api/v1/appointments", status_code=201)
    def book(request: Request, payload: dict = Body(...)):
        session = require_session(request)
        require_role(session, "patient")
        slot_id = payload.get("slot_id")
        if not slot_id:
            raise ValidationError("slot_id", "missing")
        return scheduling.book_slot(store, slot_id, session.principal_id)

    @app.post("/api/v1/appointments/{appointment_id}/confirm")
    def confirm(appointment_id: str, request: Request):
        session = require_session(request)
        require_role(session, "clinician")
        appointment = scheduling.get_appointment(store, appointment_id)
        if appointment["clinician_id"] != session.principal_id:
            raise AuthorizationError("appointment belongs to another clinician")
        return scheduling.confirm(store, appointment_id, session.principal_id)

    @app.delete("/api/v1/appointments/{appointment_id}")
    def cancel(appointment_id: str, request: Request):
        session = require_session(request)
        appointment = scheduling.get_appointment(store, appointment_id)
        require_appointment_party(session, appointment)
        return scheduling.cancel(store, appointment_id, session.principal_id)

    @app.post("/api/v1/appointments/{appointment_id}/video-session", status_code=201)
    def video_session(appointment_id: str, request: Request):
        session = require_session(request)
        appointment = scheduling.get_appointment(store, appointment_id)
        require_appointment_party(session, appointment)
        return scheduling.issue_video_session(store, appointment_id).as_dict()

    # -- clinician endpoints ----------------------------------------------------------

    @app.get("/api/v1/clinician/patients")
    def clinician_patients(request: Request):
        session = require_session(request)
        require_role(session, "clinician")
        return {"patients": care.list_patients(store, clinician_id=session.principal_id)}

    @app.post("/api/v1/clinician/slots", status_code=201)
    def create_slot(request: Request, payload: dict = Body(...)):
        session = require_session(request)
        require_role(session, "clinician")
        start, end = payload.get("start"), payload.get("end")
        if not start or not end:
            raise ValidationError("start", "missing", "start and end are required")
        return scheduling.create_slot(store, session.principal_id, start, end)

    @app.post("/api/v1/documentations/{record_id}/ro-annotation")
    def ro_annotation(record_id: str, request: Request, payload: dict = Body(...)):
        session = require_session(request)
        require_role(session, "clinician")
        record = care.get_documentation(store, record_id)
        require_patient_access(session, record["patient_id"])
        return _apply_ro_annotation(store, config, record_id, payload)

    # -- blobs ---------------------------------------------------------------------

    @app.get("/api/v1/images/{blob_key}")
    def image(blob_key: str, request: Request):
        require_session(request)
        data, media_type = store.get_blob(blob_key)
        return Response(content=data, media_type=media_type)

    return app


# -- submission internals --------------------------------------------------------------


def _resolve_idempotency(
    store: DocumentStore, patient_id: str, header: str | None
) -> tuple[str, dict | None]:
    """Map an idempotency key to a stable record id.

    Returns (record_id, replay_record). The mapping is committed before the
    record itself, so a retry after a mid-flight crash reuses the same id and
    completes the original write instead of duplicating it.
    """
    if not header:
        return care.new_id(), None
    key = f"{patient_id}:{header}"
    existing = store.get_or_none(IDEMPOTENCY, key)
    if existing is None:
        record_id = care.new_id()
        try:
            store.atomic_update(IDEMPOTENCY, key, 0, {
                "record_id": record_id, "created_at": format_ts(now_utc()),
            })
            return record_id, None
        except ConflictError:
            existing = store.get(IDEMPOTENCY, key)
    record_id = existing.body["record_id"]
    record = store.get_or_none(care.DOCUMENTATIONS, record_id)
    return record_id, None if record is None else record.body


def _parse_ro(payload, field: str) -> ReferenceAnnotation:
    if not isinstance(payload, dict):
        raise ValidationError(field, "type", f"{field} must be an object")
    values = {}
    for name in ("ax", "ay", "bx", "by", "known_length_mm"):
        v = payload.get(name)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"{field}.{name}", "type", f"{field}.{name} must be a number")
        values[name] = float(v)
    try:
        return ReferenceAnnotation(**values)
    except InvalidArgumentError as exc:
        raise ValidationError(field, "invalid", str(exc)) from None


def _ingest_submission(
    store: DocumentStore,
    model: Model,
    config: ServiceConfig,
    patient_id: str,
    record_id: str,
    body: dict,
    files: dict[str, tuple[bytes, str]],
) -> dict:
    """Validate, segment, blob-store, and commit one documentation submission."""
    wounds_in = body.get("wounds")
    if not isinstance(wounds_in, list) or not wounds_in:
        raise ValidationError("wounds", "missing", "at least one wound entry is required")

    # Pre-validate the full manifest (cheap) before running any segmentation.
    skeleton_wounds = []
    annotations: list[ReferenceAnnotation | None] = []
    for i, entry in enumerate(wounds_in):
        if not isinstance(entry, dict):
            raise ValidationError(f"wounds[{i}]", "type")
        name = entry.get("image")
        if not name or name not in files:
            raise ValidationError(
                f"wounds[{i}].image", "missing",
                f"wound entry {i} must name one of the uploaded images",
            )
        ro = entry.get("ro")
        annotations.append(None if ro is None else _parse_ro(ro, f"wounds[{i}].ro"))
        skeleton_wounds.append({
            "wound_id": entry.get("wound_id"),
            "confirmed": entry.get("confirmed"),
            "questionnaire": entry.get("questionnaire"),
            "image_blob": hashlib.sha256(files[name][0]).hexdigest(),
        })
    skeleton = {
        "id": record_id,
        "patient_id": patient_id,
        "timestamp": body.get("timestamp"),
        "feedback_mode": body.get("feedback_mode", "basic"),
        "wounds": skeleton_wounds,
        "general_questionnaire": body.get("general_questionnaire"),
    }
    validated = care.validate_submission(store, skeleton)

    params = SegmentationParams(
        threshold=config.threshold, feedback_mode=validated["feedback_mode"]
    )
    final_wounds = []
    for i, entry in enumerate(wounds_in):
        data, media_type = files[entry["image"]]
        image = decode_image(data)
        result = segment(model, image, params)
        stored = dict(validated["wounds"][i])
        stored["image_blob"] = store.put_blob(data, media_type)
        stored["mask_blob"] = store.put_blob(encode_mask_png(result.mask), "image/png")
        stored["segmentation"] = {
            "threshold": params.threshold,
            "crop_rect": result.crop_rect.as_dict(),
            "components": [c.as_dict() for c in result.components],
        }
        ro = annotations[i]
        if ro is not None:
            scale = calibrate_scale(ro)
            stored["ro"] = {
                "ax": ro.ax, "ay": ro.ay, "bx": ro.bx, "by": ro.by,
                "known_length_mm": ro.known_length_mm,
            }
            stored["size"] = estimate_area(result, scale).as_dict()
        final_wounds.append(stored)

    return care.record_documentation(store, {**validated, "wounds": final_wounds})


def _apply_ro_annotation(
    store: DocumentStore, config: ServiceConfig, record_id: str, payload: dict
) -> dict:
    """Recompute a wound's size from its stored mask and persist it on the record."""
    wound_id = payload.get("wound_id")
    annotation = _parse_ro(payload.get("ro", payload), "ro")
    scale = calibrate_scale(annotation)

    for _ in range(8):  # CAS retry loop
        doc = store.get(care.DOCUMENTATIONS, record_id)
        record = json.loads(json.dumps(doc.body))
        index = next(
            (i for i, e in enumerate(record["wounds"]) if e["wound_id"] == wound_id), None
        )
        if index is None:
            raise NotFoundError(f"wound {wound_id} is not part of documentation {record_id}")
        entry = record["wounds"][index]
        if not entry.get("mask_blob"):
            raise NotFoundError(f"documentation {record_id} has no stored mask for {wound_id}")

        mask_bytes, _ = store.get_blob(entry["mask_blob"])
        mask = decode_mask_png(mask_bytes)
        seg = entry.get("segmentation") or {}
        rect = seg.get("crop_rect") or {
            "x": 0.0, "y": 0.0, "width": float(mask.shape[1]), "height": float(mask.shape[0]),
        }
        result = SegmentationResult(
            prob_map=mask.astype(np.float32),
            mask=mask,
            components=extract_components(mask, SegmentationParams(threshold=config.threshold)),
            crop_rect=CropRect(**rect),
            latency_ms=0.0,
        )
        size = estimate_area(result, scale)
        entry["ro"] = {
            "ax": annotation.ax, "ay": annotation.ay,
            "bx": annotation.bx, "by": annotation.by,
            "known_length_mm": annotation.known_length_mm,
        }
        entry["size"] = size.as_dict()
        try:
            store.atomic_update(care.DOCUMENTATIONS, record_id, doc.version, record)
        except ConflictError:
            continue
        return {
            "documentation_id": record_id,
            "wound_id": wound_id,
            "ro": entry["ro"],
            "size": entry["size"],
        }
    raise ConflictError("documentation is being updated concurrently; retry")


# -- error mapping ----------------------------------------------------------------------


def _register_error_handlers(app: FastAPI) -> None:
    def respond(status: int, payload: dict):
        return JSONResponse(payload, status_code=status)

    @app.exception_handler(ValidationError)
    def on_validation(request, exc: ValidationError):
        return respond(400, {"error": exc.reason, "field": exc.field})

    @app.exception_handler(ImageFormatError)
    def on_image(request, exc):
        return respond(400, {"error": exc.code, "detail": str(exc)})

    @app.exception_handler(AuthenticationError)
    def on_unauthorized(request, exc):
        return respond(401, {"error": exc.code, "detail": str(exc)})

    @app.exception_handler(AuthorizationError)
    def on_forbidden(request, exc):
        return respond(403, {"error": exc.code, "detail": str(exc)})

    @app.exception_handler(NotFoundError)
    def on_missing(request, exc):
        return respond(404, {"error": exc.code, "detail": str(exc)})

    @app.exception_handler(ConflictError)
    def on_conflict(request, exc: ConflictError):
        return respond(409, {"error": "conflict", "code": exc.code, "detail": str(exc)})

    @app.exception_handler(PayloadTooLargeError)
    def on_too_large(request, exc):
        return respond(413, {"error": exc.code, "detail": str(exc)})

    @app.exception_handler(InvalidArgumentError)
    def on_invalid(request, exc):
        return respond(422, {"error": exc.code, "detail": str(exc)})

    @app.exception_handler(RequestValidationError)
    def on_request_shape(request, exc):
        return respond(422, {"error": "invalid_argument", "detail": str(exc)})
