"""Durable event logs: append, replay, corruption detection, evidence export."""

from __future__ import annotations

import random
import zipfile

import pytest

from conftest import case_study_params
from generators import run_random_session, session_params
from verimon.app import Workspace
from verimon.canonical import ZERO_DIGEST, canonical_bytes
from verimon.errors import (
    ChainCorruption,
    InvalidEventSequence,
    UnknownProject,
    UnknownSequence,
    ValidationError,
)
from verimon.events import EventType, decode_log_lines, make_record
from verimon.project import Answer, AnswerValue, ObservationState
from verimon.status import cc_check
from verimon.store import read_metrics_csv, replay, verify_evidence_package


@pytest.fixture()
def ws(tmp_path):
    return Workspace(tmp_path / "store", sync=False)


def log_path(ws, project_id):
    return ws.store.projects_dir / f"{project_id}.log"


# -- append ------------------------------------------------------------------------

def test_first_event_is_genesis(ws):
    _, record = ws.store.create_project("admin", case_study_params())
    assert record.sequence == 0
    assert record.prev_hash == ZERO_DIGEST
    assert record.event_type == EventType.ProjectCreated.value
    lines = log_path(ws, "cockpit-display-upgrade").read_text().splitlines()
    assert len(lines) == 2  # header + genesis


def test_two_appends_chain(ws):
    _, first = ws.store.create_project("admin", case_study_params())
    _, second = ws.store.answer_checklist("ver1", "cockpit-display-upgrade",
                                          "pc-planning", "PLN-Q1", Answer(AnswerValue.Yes))
    assert second.sequence == 1
    assert second.prev_hash == first.this_hash


def test_rejected_operation_appends_nothing(ws):
    ws.store.create_project("admin", case_study_params())
    before = log_path(ws, "cockpit-display-upgrade").read_bytes()
    with pytest.raises(Exception):
        ws.store.answer_checklist("pm1", "cockpit-display-upgrade",
                                  "pc-planning", "PLN-Q1", Answer(AnswerValue.Yes))
    assert log_path(ws, "cockpit-display-upgrade").read_bytes() == before


def test_duplicate_project_rejected(ws):
    ws.store.create_project("admin", case_study_params())
    with pytest.raises(ValidationError, match="already exists"):
        ws.store.create_project("admin", case_study_params())


def test_unknown_project(ws):
    with pytest.raises(UnknownProject):
        ws.store.get("ghost")
    with pytest.raises(UnknownProject):
        ws.store.answer_checklist("ver1", "ghost", "pc", "q", Answer(AnswerValue.Yes))


# -- replay -------------------------------------------------------------------------

def test_reload_reconstructs_state(ws, tmp_path):
    rng = random.Random(1)
    run_random_session(ws.store, rng, "session-1", n_ops=30)
    live = ws.store.get("session-1")

    reopened = Workspace(tmp_path / "store", sync=False)
    assert canonical_bytes(reopened.store.get("session-1").to_dict()) == \
        canonical_bytes(live.to_dict())


def test_replay_function_equals_live(ws):
    rng = random.Random(2)
    run_random_session(ws.store, rng, "session-2", n_ops=25)
    records = ws.store.records("session-2")
    replayed = replay(records, ws.registry)
    assert canonical_bytes(replayed.to_dict()) == \
        canonical_bytes(ws.store.get("session-2").to_dict())


def test_replay_many_random_sessions(ws):
    for seed in range(12):
        rng = random.Random(1000 + seed)
        project_id = f"many-{seed}"
        run_random_session(ws.store, rng, project_id, n_ops=15)
        replayed = replay(ws.store.records(project_id), ws.registry)
        assert canonical_bytes(replayed.to_dict()) == \
            canonical_bytes(ws.store.get(project_id).to_dict())


def test_replay_requires_project_created_first(ws):
    record = make_record(0, "2026-01-01T00:00:00.000000+00:00", "ver1",
                         EventType.ObservationOpened,
                         {"item_id": "psac", "observation_id": "OBS-1", "text": "x"}, ZERO_DIGEST)
    with pytest.raises(InvalidEventSequence, match="ProjectCreated"):
        replay([record], ws.registry)


def test_replay_rejects_illegal_event_in_state(ws):
    ws.store.create_project("admin", case_study_params())
    records = ws.store.records("cockpit-display-upgrade")
    forged = make_record(1, records[0].timestamp, "ver1", EventType.ObservationTransitioned,
                         {"observation_id": "OBS-9", "to_state": "Resolved", "comment": "x"},
                         records[0].this_hash)
    with pytest.raises(InvalidEventSequence) as exc:
        replay(records + [forged], ws.registry)
    assert exc.value.context["sequence"] == 1


# -- corruption ---------------------------------------------------------------------

def test_tampered_byte_detected_on_reload(ws, tmp_path):
    ws.store.create_project("admin", case_study_params())
    ws.store.answer_checklist("ver1", "cockpit-display-upgrade",
                              "pc-planning", "PLN-Q1", Answer(AnswerValue.Yes))
    path = log_path(ws, "cockpit-display-upgrade")
    blob = bytearray(path.read_bytes())
    # flip one byte inside the recorded answer payload
    position = blob.index(b'"PLN-Q1"') + 3
    blob[position] ^= 0x01
    path.write_bytes(bytes(blob))

    with pytest.raises(ChainCorruption):
        Workspace(tmp_path / "store", sync=False)


def test_tampered_header_project_id_detected(ws, tmp_path):
    ws.store.create_project("admin", case_study_params())
    path = log_path(ws, "cockpit-display-upgrade")
    text = path.read_text()
    lines = text.splitlines(keepends=True)
    lines[0] = lines[0].replace("cockpit-display-upgrade", "cockpit-display-upgradf")
    path.write_text("".join(lines))
    new_path = path.parent / "cockpit-display-upgradf.log"
    path.rename(new_path)

    with pytest.raises(ChainCorruption):
        Workspace(tmp_path / "store", sync=False)


def test_truncated_log_detected(ws, tmp_path):
    ws.store.create_project("admin", case_study_params())
    ws.store.answer_checklist("ver1", "cockpit-display-upgrade",
                              "pc-planning", "PLN-Q1", Answer(AnswerValue.Yes))
    path = log_path(ws, "cockpit-display-upgrade")
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) // 2])
    with pytest.raises(ChainCorruption):
        Workspace(tmp_path / "store", sync=False)


# -- evidence -----------------------------------------------------------------------

def finished_session(ws):
    ws.store.create_project("admin", session_params("ev-proj"))
    pid = "ev-proj"
    project = ws.store.get(pid)
    for process in project.processes:
        for q in process.process_checklist.questions:
            ws.store.answer_checklist("ver1", pid, process.process_checklist.instance_id,
                                      q.question_id, Answer(AnswerValue.Yes))
    for item in project.all_items():
        for q in item.document_checklist.questions:
            ws.store.answer_checklist("ver1", pid, item.document_checklist.instance_id,
                                      q.question_id, Answer(AnswerValue.Yes))
    ws.store.open_observation("ver1", pid, "psac", "wording unclear")
    ws.store.transition_observation("dev1", pid, "OBS-1", ObservationState.Resolved, "reworded")
    ws.store.transition_observation("vm1", pid, "OBS-1", ObservationState.Closed, "verified")
    return pid


def test_export_at_head_and_verify_roundtrip(ws, tmp_path):
    pid = finished_session(ws)
    out = tmp_path / "evidence.zip"
    manifest = ws.store.export_evidence(pid, out)
    assert manifest["record_count"] == ws.store.head_sequence(pid) + 1

    verified = verify_evidence_package(out)
    assert verified == manifest

    with zipfile.ZipFile(out) as zf:
        report = zf.read("status_report.json").decode()
        metrics_rows = read_metrics_csv(zf.read("metrics.csv").decode())
    assert '"project_status":"Completed"' in report
    assert {row["process_id"]: row["opened"] for row in metrics_rows} == \
        {"planning": "1", "requirements": "0"}


def test_export_at_sequence_zero_is_fresh_pending(ws, tmp_path):
    import json

    pid = finished_session(ws)
    out = tmp_path / "genesis.zip"
    ws.store.export_evidence(pid, out, up_to_sequence=0)
    with zipfile.ZipFile(out) as zf:
        report = json.loads(zf.read("status_report.json").decode())
        records = zf.read("events.log").decode().splitlines()
    assert report["project_status"] == "Pending"
    for process in report["processes"]:
        assert process["process_status"] == "Pending"
        assert process["pc_status"] == "Pending"
        for item in process["items"]:
            assert item["pdc_status"] == "Pending"
            assert item["item_status"] == "Pending"
    assert len(records) == 2  # header + genesis
    verify_evidence_package(out)


def test_export_snapshot_equals_replayed_cc_check(ws, tmp_path):
    pid = finished_session(ws)
    head = ws.store.head_sequence(pid)
    cut = head // 2
    out = tmp_path / "mid.zip"
    ws.store.export_evidence(pid, out, up_to_sequence=cut)
    records = ws.store.records(pid)[: cut + 1]
    expected = cc_check(replay(records, ws.registry)).to_dict()
    with zipfile.ZipFile(out) as zf:
        import json

        packaged = json.loads(zf.read("status_report.json").decode())
    assert packaged == expected


def test_export_unknown_sequence(ws, tmp_path):
    pid = finished_session(ws)
    with pytest.raises(UnknownSequence):
        ws.store.export_evidence(pid, tmp_path / "x.zip", up_to_sequence=10_000)
    with pytest.raises(UnknownSequence):
        ws.store.export_evidence(pid, tmp_path / "x.zip", up_to_sequence=-1)
    with pytest.raises(UnknownProject):
        ws.store.export_evidence("ghost", tmp_path / "x.zip")


def test_verify_detects_member_tamper(ws, tmp_path):
    pid = finished_session(ws)
    out = tmp_path / "evidence.zip"
    ws.store.export_evidence(pid, out)

    with zipfile.ZipFile(out) as zf:
        members = {name: zf.read(name) for name in zf.namelist()}
    members["metrics.csv"] = members["metrics.csv"].replace(b"1", b"7", 1)
    forged = tmp_path / "forged.zip"
    with zipfile.ZipFile(forged, "w") as zf:
        for name, data in members.items():
            zf.writestr(name, data)
    with pytest.raises(ChainCorruption, match="metrics.csv"):
        verify_evidence_package(forged)


def test_store_log_passes_raw_decode(ws):
    rng = random.Random(3)
    run_random_session(ws.store, rng, "decode-me", n_ops=10)
    lines = log_path(ws, "decode-me").read_text().splitlines(keepends=True)
    header, records = decode_log_lines(lines)
    assert header["project_id"] == "decode-me"
    assert [r.sequence for r in records] == list(range(len(records)))


def test_concurrent_writers_and_readers_keep_the_chain_intact(ws):
    import threading

    ws.store.create_project("admin", session_params("busy"))
    errors: list[Exception] = []

    def writer(question: str) -> None:
        try:
            for _ in range(25):
                ws.store.answer_checklist("ver1", "busy", "pc-planning", question,
                                          Answer(AnswerValue.Yes))
        except Exception as exc:  # pragma: no cover - surfaced via the assert below
            errors.append(exc)

    def reader() -> None:
        try:
            for _ in range(60):
                cc_check(ws.store.get("busy"))
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [threading.Thread(target=writer, args=(q,))
               for q in ("PLN-Q1", "PLN-Q2", "PLN-Q3", "PLN-Q4")]
    threads += [threading.Thread(target=reader) for _ in range(3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    assert errors == []
    assert ws.store.head_sequence("busy") == 100  # genesis + 4 x 25 answers
    lines = log_path(ws, "busy").read_text().splitlines(keepends=True)
    decode_log_lines(lines)  # gap-free, linked, digests intact
