"""RFC 3339 UTC timestamp helpers shared by the domain and service layers."""

from __future__ import annotations

from datetime import date, datetime, timezone

from .errors import InvalidArgumentError


def now_utc() -> datetime:
    return datetime.now(timezone.utc)


def parse_ts(value: str) -> datetime:
    """Parse an RFC 3339 timestamp; naive values are rejected."""
    if not isinstance(value, str):
        raise InvalidArgumentError(f"timestamp must be a string, got {type(value).__name__}")
    text = value.replace("Z", "+00:00") if value.endswith("Z") else value
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise InvalidArgumentError(f"invalid timestamp {value!r}") from None
    if dt.tzinfo is None:
        raise InvalidArgumentError(f"timestamp {value!r} must carry a UTC offset")
    return dt.astimezone(timezone.utc)


def format_ts(dt: datetime) -> str:
    if dt.tzinfo is None:
        raise InvalidArgumentError("naive datetime cannot be formatted")
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def date_of(ts: str) -> str:
    """Calendar day (UTC) of an RFC 3339 timestamp, as YYYY-MM-DD."""
    return parse_ts(ts).date().isoformat()


def parse_date(value: str) -> date:
    try:
        return date.fromisoformat(value)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"invalid date {value!r}, expected YYYY-MM-DD") from None
