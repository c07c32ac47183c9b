"""Append-only, hash-chained audit records.

One log holds the complete history of one project. Every record is one line
of canonical JSON; its digest covers every field except ``this_hash``, and
``prev_hash`` links it to the preceding record (the first record links to an
all-zero sentinel). Altering any byte of any stored record makes
verification fail at or before that record: a line must parse, re-encode to
exactly its stored bytes, carry its own digest, extend the chain, and sit at
a gap-free sequence position.

The digest algorithm is recorded in the log header so it can be migrated
later without ambiguity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable

from .canonical import ZERO_DIGEST, canonical_bytes, canonical_dumps, sha256_hex
from .errors import ChainCorruption

FORMAT_VERSION = 1
DIGEST_ALGORITHM = "sha-256"

_HASH_RE = re.compile(r"^[0-9a-f]{64}$")


class EventType(str, Enum):
    ProjectCreated = "ProjectCreated"
    ChecklistAnswered = "ChecklistAnswered"
    ItemRegistered = "ItemRegistered"
    ObservationOpened = "ObservationOpened"
    ObservationTransitioned = "ObservationTransitioned"
    UserAssigned = "UserAssigned"
    ParameterizationEdited = "ParameterizationEdited"


@dataclass(frozen=True)
class EventRecord:
    sequence: int
    timestamp: str
    actor: str
    event_type: str
    payload: dict
    prev_hash: str
    this_hash: str

    def hashed_fields(self) -> dict[str, Any]:
        return {
            "sequence": self.sequence,
            "timestamp": self.timestamp,
            "actor": self.actor,
            "event_type": self.event_type,
            "payload": self.payload,
            "prev_hash": self.prev_hash,
        }

    def to_dict(self) -> dict[str, Any]:
        d = self.hashed_fields()
        d["this_hash"] = self.this_hash
        return d


def record_digest(fields: dict[str, Any]) -> str:
    return sha256_hex(canonical_bytes(fields))


def make_record(sequence: int, timestamp: str, actor: str, event_type: EventType | str,
                payload: dict, prev_hash: str) -> EventRecord:
    event_type = EventType(event_type).value
    record = EventRecord(
        sequence=sequence,
        timestamp=timestamp,
        actor=actor,
        event_type=event_type,
        payload=payload,
        prev_hash=prev_hash,
        this_hash="",
    )
    digest = record_digest(record.hashed_fields())
    return EventRecord(**{**record.to_dict(), "this_hash": digest})


def make_header(project_id: str) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "project_id": project_id,
        "digest_algorithm": DIGEST_ALGORITHM,
    }


def encode_header(project_id: str) -> str:
    return canonical_dumps(make_header(project_id)) + "\n"


def encode_record(record: EventRecord) -> str:
    return canonical_dumps(record.to_dict()) + "\n"


def _strict_load(line: str, where: str) -> Any:
    import json

    stripped = line[:-1] if line.endswith("\n") else line
    try:
        value = json.loads(stripped)
    except json.JSONDecodeError as exc:
        raise ChainCorruption(f"{where}: not parseable as JSON: {exc.msg}", where=where) from exc
    if canonical_dumps(value) != stripped:
        raise ChainCorruption(f"{where}: line is not in canonical form", where=where)
    return value


def decode_header(line: str) -> dict[str, Any]:
    value = _strict_load(line, "header")
    if not isinstance(value, dict) or set(value) != {"format_version", "project_id", "digest_algorithm"}:
        raise ChainCorruption("header: unexpected structure", where="header")
    if value["format_version"] != FORMAT_VERSION:
        raise ChainCorruption(f"header: unsupported format_version {value['format_version']!r}", where="header")
    if value["digest_algorithm"] != DIGEST_ALGORITHM:
        raise ChainCorruption(f"header: unsupported digest_algorithm {value['digest_algorithm']!r}", where="header")
    if not isinstance(value["project_id"], str) or not value["project_id"]:
        raise ChainCorruption("header: project_id must be a non-empty string", where="header")
    return value


_RECORD_KEYS = {"sequence", "timestamp", "actor", "event_type", "payload", "prev_hash", "this_hash"}


def decode_record(line: str, where: str) -> EventRecord:
    value = _strict_load(line, where)
    if not isinstance(value, dict) or set(value) != _RECORD_KEYS:
        raise ChainCorruption(f"{where}: unexpected record structure", where=where)
    if not isinstance(value["sequence"], int) or isinstance(value["sequence"], bool) or value["sequence"] < 0:
        raise ChainCorruption(f"{where}: bad sequence", where=where)
    for key in ("timestamp", "actor", "event_type", "prev_hash", "this_hash"):
        if not isinstance(value[key], str):
            raise ChainCorruption(f"{where}: field {key} must be a string", where=where)
    if not isinstance(value["payload"], dict):
        raise ChainCorruption(f"{where}: payload must be an object", where=where)
    if value["event_type"] not in EventType._value2member_map_:
        raise ChainCorruption(f"{where}: unknown event_type {value['event_type']!r}", where=where)
    for key in ("prev_hash", "this_hash"):
        if not _HASH_RE.match(value[key]):
            raise ChainCorruption(f"{where}: field {key} is not a {DIGEST_ALGORITHM} digest", where=where)
    return EventRecord(**value)


def verify_records(records: Iterable[EventRecord]) -> list[EventRecord]:
    """Check digests, linkage and sequence numbering; returns the records."""
    verified: list[EventRecord] = []
    prev_hash = ZERO_DIGEST
    for index, record in enumerate(records):
        where = f"record {index}"
        if record.sequence != index:
            raise ChainCorruption(
                f"{where}: sequence {record.sequence} breaks gap-free numbering", where=where
            )
        if record.prev_hash != prev_hash:
            raise ChainCorruption(f"{where}: prev_hash does not extend the chain", where=where)
        expected = record_digest(record.hashed_fields())
        if record.this_hash != expected:
            raise ChainCorruption(f"{where}: stored digest does not match record content", where=where)
        prev_hash = record.this_hash
        verified.append(record)
    return verified


def decode_log_lines(lines: list[str]) -> tuple[dict[str, Any], list[EventRecord]]:
    """Parse and verify a whole log (header line plus record lines)."""
    if not lines:
        raise ChainCorruption("log is empty: missing header line", where="header")
    header = decode_header(lines[0])
    records = [decode_record(line, f"record {i}") for i, line in enumerate(lines[1:])]
    verify_records(records)
    return header, records


def chain_head(records: list[EventRecord]) -> str:
    return records[-1].this_hash if records else ZERO_DIGEST
