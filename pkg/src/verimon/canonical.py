"""Canonical JSON serialization and the shared clock helpers.

All hashing, golden-file comparison and byte-stable CLI output go through
``canonical_dumps``: sorted keys, no insignificant whitespace, UTF-8, no
ASCII escaping. Two structurally equal values always serialize to identical
bytes.

Timestamps are fixed-width ISO-8601 UTC strings (microsecond precision) so
lexicographic comparison equals chronological comparison.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from typing import Any

ZERO_DIGEST = "0" * 64


def canonical_dumps(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_bytes(value: Any) -> bytes:
    return canonical_dumps(value).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_value(value: Any) -> str:
    """Digest of a JSON-serializable value in canonical form."""
    return sha256_hex(canonical_bytes(value))


def now_iso() -> str:
    """Current UTC time, fixed width: 2026-01-02T03:04:05.678901+00:00"""
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def pretty_dumps(value: Any) -> str:
    """Human-facing JSON: still key-sorted, but indented."""
    return json.dumps(value, sort_keys=True, indent=2, ensure_ascii=False)
