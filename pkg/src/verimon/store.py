"""Durable project state: per-project event logs, replay, evidence export.

Layout under the store root:

    projects/<project_id>.log     one hash-chained event log per project

Each log starts with a one-line header naming the format version, the
project and the digest algorithm, followed by one canonical JSON record per
line. The store keeps the replayed project value in memory; every mutation
appends its event (flushed and fsynced before acknowledgment, unless the
store was opened with ``sync=False``) and then swaps the in-memory snapshot.
Mutations are serialized per project; readers always see a complete
snapshot.

Evidence packages are zip archives holding a verified log slice, the status
report and metrics of the replayed slice, the norm template needed to
replay it, and a manifest with the chain head and member digests, so the
package verifies offline without this store.
"""

from __future__ import annotations

import csv
import io
import json
import os
import threading
import zipfile
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterator

from . import events as ev
from .canonical import canonical_dumps, now_iso, pretty_dumps, sha256_hex
from .errors import (
    ChainCorruption,
    InvalidEventSequence,
    StorageFailure,
    UnknownProject,
    UnknownSequence,
    ValidationError,
    VerimonError,
)
from .norms import NormRegistry, load_norm_template, template_to_dict
from .project import (
    Answer,
    Mutation,
    ObservationState,
    Project,
    ProjectParameterization,
    apply_event,
    assign_user,
    answer_checklist,
    create_project,
    edit_parameterization,
    open_observation,
    register_configuration_item,
    transition_observation,
)
from .roles import Role
from .status import cc_check, nonconformity_metrics

MANIFEST_NAME = "manifest.json"
LOG_NAME = "events.log"
REPORT_NAME = "status_report.json"
METRICS_NAME = "metrics.csv"
TEMPLATE_NAME = "norm_template.json"


def replay(records: list[ev.EventRecord], registry: NormRegistry) -> Project:
    """Reconstruct the unique project state encoded by an event sequence."""
    if not records:
        raise InvalidEventSequence("empty event sequence")
    if records[0].event_type != ev.EventType.ProjectCreated.value:
        raise InvalidEventSequence(
            f"first event must be ProjectCreated, got {records[0].event_type}", sequence=0
        )
    project: Project | None = None
    for record in records:
        if project is not None and record.event_type == ev.EventType.ProjectCreated.value:
            raise InvalidEventSequence("ProjectCreated after sequence 0", sequence=record.sequence)
        try:
            mutation = apply_event(project, record.event_type, record.actor, record.timestamp,
                                   record.payload, registry)
        except VerimonError as exc:
            raise InvalidEventSequence(
                f"event {record.sequence} ({record.event_type}) is illegal in the reconstructed "
                f"state: {exc.message}",
                sequence=record.sequence, cause=exc.code,
            ) from exc
        project = mutation.project
    assert project is not None
    return project


@dataclass
class _Entry:
    project: Project
    head_hash: str
    next_sequence: int
    last_timestamp: str
    lock: threading.Lock


class ProjectStore:
    """All live projects of one installation, backed by event logs."""

    def __init__(self, root: str | Path, registry: NormRegistry, sync: bool = True) -> None:
        self.root = Path(root)
        self.registry = registry
        self.sync = sync
        self._entries: dict[str, _Entry] = {}
        self._create_lock = threading.Lock()
        self._bulk_depth = 0
        self._bulk_handles: dict[str, Any] = {}
        self.projects_dir = self.root / "projects"
        self.projects_dir.mkdir(parents=True, exist_ok=True)
        self._load_existing()

    @contextmanager
    def bulk(self) -> Iterator[None]:
        """Batch writes (fixture loading): keep log handles open and defer
        the durability sync to the end of the batch."""
        self._bulk_depth += 1
        try:
            yield
        finally:
            self._bulk_depth -= 1
            if self._bulk_depth == 0:
                handles, self._bulk_handles = self._bulk_handles, {}
                for fh in handles.values():
                    self._sync_file(fh)
                    fh.close()

    # -- loading --------------------------------------------------------------

    def _log_path(self, project_id: str) -> Path:
        return self.projects_dir / f"{project_id}.log"

    def _load_existing(self) -> None:
        for path in sorted(self.projects_dir.glob("*.log")):
            header, records = self._read_log(path)
            project = replay(records, self.registry)
            if project.project_id != header["project_id"]:
                raise ChainCorruption(
                    f"log {path.name}: header project {header['project_id']!r} does not match "
                    f"replayed project {project.project_id!r}",
                    where="header",
                )
            self._entries[project.project_id] = _Entry(
                project=project,
                head_hash=ev.chain_head(records),
                next_sequence=len(records),
                last_timestamp=records[-1].timestamp if records else "",
                lock=threading.Lock(),
            )

    @staticmethod
    def _read_log(path: Path) -> tuple[dict[str, Any], list[ev.EventRecord]]:
        try:
            with open(path, "r", encoding="utf-8", newline="") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise StorageFailure(f"cannot read log {path}: {exc}") from exc
        try:
            return ev.decode_log_lines(lines)
        except ChainCorruption as exc:
            raise ChainCorruption(f"log {path.name}: {exc.message}", **exc.context) from exc

    # -- queries ---------------------------------------------------------------

    def project_ids(self) -> list[str]:
        return sorted(self._entries)

    def get(self, project_id: str) -> Project:
        entry = self._entries.get(project_id)
        if entry is None:
            raise UnknownProject(f"no project {project_id!r}", project=project_id)
        return entry.project

    def head_sequence(self, project_id: str) -> int:
        entry = self._entries.get(project_id)
        if entry is None:
            raise UnknownProject(f"no project {project_id!r}", project=project_id)
        return entry.next_sequence - 1

    def records(self, project_id: str) -> list[ev.EventRecord]:
        self.get(project_id)
        _, recs = self._read_log(self._log_path(project_id))
        return recs

    # -- the write path ----------------------------------------------------------

    def _open_for_append(self, project_id: str):
        try:
            return open(self._log_path(project_id), "a", encoding="utf-8", newline="")
        except OSError as exc:
            raise StorageFailure(f"cannot open log for {project_id!r}: {exc}") from exc

    def _sync_file(self, fh) -> None:
        fh.flush()
        if self.sync:
            os.fsync(fh.fileno())

    def execute(self, project_id: str, actor: str,
                op: Callable[[Project, str], Mutation]) -> tuple[Mutation, ev.EventRecord]:
        """Run one operation under the project's writer lock and persist its
        event before the new snapshot becomes visible."""
        entry = self._entries.get(project_id)
        if entry is None:
            raise UnknownProject(f"no project {project_id!r}", project=project_id)
        with entry.lock:
            timestamp = max(now_iso(), entry.last_timestamp)
            mutation = op(entry.project, timestamp)
            if self._bulk_depth:
                fh = self._bulk_handles.get(project_id)
                if fh is None:
                    fh = self._open_for_append(project_id)
                    self._bulk_handles[project_id] = fh
                record = self._do_append(entry, fh, actor, timestamp, mutation)
            else:
                with self._open_for_append(project_id) as fh:
                    record = self._do_append(entry, fh, actor, timestamp, mutation)
                    self._sync_file(fh)
            return mutation, record

    def _do_append(self, entry: _Entry, fh, actor: str, timestamp: str,
                   mutation: Mutation) -> ev.EventRecord:
        record = ev.make_record(
            sequence=entry.next_sequence,
            timestamp=timestamp,
            actor=actor,
            event_type=mutation.event_type,
            payload=mutation.payload,
            prev_hash=entry.head_hash,
        )
        try:
            fh.write(ev.encode_record(record))
        except OSError as exc:
            raise StorageFailure(f"append failed: {exc}") from exc
        entry.next_sequence += 1
        entry.head_hash = record.this_hash
        entry.last_timestamp = timestamp
        entry.project = mutation.project
        return record

    # -- operations exposed to the CLI and the service ----------------------------

    def create_project(self, actor: str, params: ProjectParameterization) -> tuple[Mutation, ev.EventRecord]:
        with self._create_lock:
            if params.project_id in self._entries or self._log_path(params.project_id).exists():
                raise ValidationError(f"project {params.project_id!r} already exists",
                                      project=params.project_id)
            timestamp = now_iso()
            mutation = create_project(params, self.registry, timestamp)
            entry = _Entry(project=mutation.project, head_hash=ev.ZERO_DIGEST,
                           next_sequence=0, last_timestamp="", lock=threading.Lock())
            path = self._log_path(params.project_id)
            try:
                fh = open(path, "x", encoding="utf-8", newline="")
            except OSError as exc:
                raise StorageFailure(f"cannot create log for {params.project_id!r}: {exc}") from exc
            try:
                fh.write(ev.encode_header(params.project_id))
                record = self._do_append(entry, fh, actor, timestamp, mutation)
                if self._bulk_depth:
                    self._bulk_handles[params.project_id] = fh
                else:
                    self._sync_file(fh)
                    fh.close()
            except OSError as exc:
                fh.close()
                raise StorageFailure(f"cannot create log for {params.project_id!r}: {exc}") from exc
            self._entries[params.project_id] = entry
            return mutation, record

    def answer_checklist(self, actor: str, project_id: str, instance_id: str, question_id: str,
                         answer: Answer) -> tuple[Mutation, ev.EventRecord]:
        return self.execute(project_id, actor,
                            lambda p, ts: answer_checklist(p, actor, instance_id, question_id, answer))

    def register_item(self, actor: str, project_id: str, process_id: str, spec_id: str, title: str,
                      version_label: str, item_id: str | None = None) -> tuple[Mutation, ev.EventRecord]:
        return self.execute(
            project_id, actor,
            lambda p, ts: register_configuration_item(p, actor, process_id, spec_id, title,
                                                      version_label, self.registry, item_id=item_id),
        )

    def open_observation(self, actor: str, project_id: str, item_id: str, text: str,
                         observation_id: str | None = None) -> tuple[Mutation, ev.EventRecord]:
        return self.execute(
            project_id, actor,
            lambda p, ts: open_observation(p, actor, item_id, text, ts, observation_id=observation_id),
        )

    def transition_observation(self, actor: str, project_id: str, observation_id: str,
                               to_state: ObservationState, comment: str) -> tuple[Mutation, ev.EventRecord]:
        return self.execute(
            project_id, actor,
            lambda p, ts: transition_observation(p, actor, observation_id, to_state, comment, ts),
        )

    def assign_user(self, actor: str, project_id: str, user_id: str, role: Role,
                    display_name: str | None = None) -> tuple[Mutation, ev.EventRecord]:
        return self.execute(project_id, actor,
                            lambda p, ts: assign_user(p, actor, user_id, role, display_name=display_name))

    def edit_parameterization(self, actor: str, project_id: str, life_cycle: str) -> tuple[Mutation, ev.EventRecord]:
        return self.execute(project_id, actor,
                            lambda p, ts: edit_parameterization(p, actor, life_cycle))

    # -- evidence -----------------------------------------------------------------

    def export_evidence(self, project_id: str, out_path: str | Path,
                        up_to_sequence: int | None = None) -> dict[str, Any]:
        """Write a self-verifying evidence archive for the log prefix ending
        at ``up_to_sequence`` (inclusive; default: head). Returns the manifest."""
        entry = self._entries.get(project_id)
        if entry is None:
            raise UnknownProject(f"no project {project_id!r}", project=project_id)
        _, records = self._read_log(self._log_path(project_id))
        if up_to_sequence is None:
            up_to_sequence = len(records) - 1
        if not (0 <= up_to_sequence < len(records)):
            raise UnknownSequence(
                f"project {project_id!r} has no sequence {up_to_sequence}",
                project=project_id, sequence=up_to_sequence,
            )
        prefix = records[: up_to_sequence + 1]
        project = replay(prefix, self.registry)
        template = self.registry.get(project.parameterization.norm_ref)

        log_text = ev.encode_header(project_id) + "".join(ev.encode_record(r) for r in prefix)
        report_text = canonical_dumps(cc_check(project).to_dict()) + "\n"
        metrics_text = nonconformity_metrics(project).to_csv()
        template_text = pretty_dumps(template_to_dict(template)) + "\n"

        members = {
            LOG_NAME: log_text,
            REPORT_NAME: report_text,
            METRICS_NAME: metrics_text,
            TEMPLATE_NAME: template_text,
        }
        manifest = {
            "format_version": ev.FORMAT_VERSION,
            "project_id": project_id,
            "digest_algorithm": ev.DIGEST_ALGORITHM,
            "record_count": len(prefix),
            "chain_head_hash": ev.chain_head(prefix),
            "files": {name: sha256_hex(text.encode("utf-8")) for name, text in members.items()},
        }
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        try:
            with zipfile.ZipFile(out_path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
                for name, text in members.items():
                    zf.writestr(name, text)
                zf.writestr(MANIFEST_NAME, canonical_dumps(manifest) + "\n")
        except OSError as exc:
            raise StorageFailure(f"cannot write evidence package: {exc}") from exc
        return manifest


def verify_evidence_package(path: str | Path) -> dict[str, Any]:
    """Offline check of an evidence archive: member digests against the
    manifest, chain verification, and replay equality of the packaged status
    report and metrics. Returns the manifest on success."""
    path = Path(path)
    try:
        with zipfile.ZipFile(path) as zf:
            names = set(zf.namelist())
            expected = {MANIFEST_NAME, LOG_NAME, REPORT_NAME, METRICS_NAME, TEMPLATE_NAME}
            if names != expected:
                raise ValidationError(
                    f"evidence package has unexpected members {sorted(names ^ expected)}", path=str(path)
                )
            manifest = json.loads(zf.read(MANIFEST_NAME).decode("utf-8"))
            members = {name: zf.read(name) for name in expected - {MANIFEST_NAME}}
    except zipfile.BadZipFile as exc:
        raise ValidationError(f"not a zip archive: {path}") from exc

    for name, data in members.items():
        digest = sha256_hex(data)
        if manifest.get("files", {}).get(name) != digest:
            raise ChainCorruption(f"member {name} does not match its manifest digest", where=name)

    lines = members[LOG_NAME].decode("utf-8").splitlines(keepends=True)
    header, records = ev.decode_log_lines(lines)
    if header["project_id"] != manifest["project_id"]:
        raise ChainCorruption("manifest project_id does not match log header", where="header")
    if len(records) != manifest["record_count"]:
        raise ChainCorruption("manifest record_count does not match log", where="manifest")
    if ev.chain_head(records) != manifest["chain_head_hash"]:
        raise ChainCorruption("manifest chain_head_hash does not match log", where="manifest")

    registry = NormRegistry()
    registry.add(load_norm_template(members[TEMPLATE_NAME]))
    project = replay(records, registry)

    report_text = canonical_dumps(cc_check(project).to_dict()) + "\n"
    if report_text.encode("utf-8") != members[REPORT_NAME]:
        raise ChainCorruption("packaged status report does not match replayed state", where=REPORT_NAME)
    metrics_text = nonconformity_metrics(project).to_csv()
    if metrics_text.encode("utf-8") != members[METRICS_NAME]:
        raise ChainCorruption("packaged metrics do not match replayed state", where=METRICS_NAME)
    return manifest


def read_metrics_csv(text: str) -> list[dict[str, str]]:
    """Parse a metrics CSV export back into rows (helper for tests and CLI)."""
    return list(csv.DictReader(io.StringIO(text)))
