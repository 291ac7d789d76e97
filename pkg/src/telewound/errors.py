"""Shared exception types.

Every error carries a stable machine-readable ``code`` so the HTTP layer and
the CLI can map failures without string matching.
"""


class TelewoundError(Exception):
    """Base class for all domain errors."""

    code = "error"


class InvalidArgumentError(TelewoundError):
    """A caller-supplied value violates a documented precondition."""

    code = "invalid_argument"


class NotFoundError(TelewoundError):
    code = "not_found"


class ConflictError(TelewoundError):
    """Optimistic-concurrency or state conflict; the caller may retry."""

    code = "conflict"


class OverlapConflictError(ConflictError):
    """Booking would overlap another non-cancelled appointment of the patient."""

    code = "overlap_conflict"


class TransitionError(ConflictError):
    """Illegal appointment state transition."""

    code = "illegal_transition"

    def __init__(self, from_state: str, to_state: str):
        super().__init__(f"illegal transition {from_state} -> {to_state}")
        self.from_state = from_state
        self.to_state = to_state


class NotConfirmedError(ConflictError):
    """Video session requested for an appointment that is not confirmed."""

    code = "not_confirmed"


class OutsideWindowError(ConflictError):
    """Video session requested outside the join window."""

    code = "outside_window"


class ValidationError(TelewoundError):
    """A field of a submission failed validation.

    ``field`` uses JSON-path-like notation, e.g. ``wounds[0].questionnaire.pain``.
    ``reason`` is a short stable token such as ``range`` or ``missing``.
    """

    code = "validation"

    def __init__(self, field: str, reason: str, message: str | None = None):
        super().__init__(message or f"{field}: {reason}")
        self.field = field
        self.reason = reason


class WeightFormatError(TelewoundError):
    """Weight container is malformed; message names the byte offset where possible."""

    code = "weight_format"


class ImageFormatError(TelewoundError):
    """Uploaded or referenced image bytes could not be decoded."""

    code = "image_format"


class AuthenticationError(TelewoundError):
    """Missing, invalid, or expired credentials (HTTP 401)."""

    code = "unauthorized"


class AuthorizationError(TelewoundError):
    """Authenticated principal may not access the resource (HTTP 403)."""

    code = "forbidden"


class PayloadTooLargeError(TelewoundError):
    """An uploaded file exceeds the configured size limit (HTTP 413)."""

    code = "payload_too_large"
