"""Timestamp handling.

All timestamps are integer UTC epoch milliseconds internally; the wire and
log format is RFC 3339 with exactly millisecond precision and a ``Z`` suffix,
so serialization is byte-stable across machines and time zones.
"""

from datetime import datetime, timezone

Millis = int

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def parse_ts(text: str) -> Millis:
    """Parse an RFC 3339 timestamp into epoch milliseconds."""
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return round(dt.timestamp() * 1000)


def format_ts(ms: Millis) -> str:
    """Render epoch milliseconds as RFC 3339 with millisecond precision."""
    dt = datetime.fromtimestamp(ms // 1000, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S") + f".{ms % 1000:03d}Z"
