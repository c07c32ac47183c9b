"""Bundled fixture scripts: shipping drift, structure, resulting state."""

from __future__ import annotations

import json

from verimon import fixtures
from verimon.norms import _bundled_bytes
from verimon.status import Status, cc_check, nonconformity_metrics


def test_shipped_files_match_generators():
    shipped = {
        "case_study.fixture.json": fixtures.case_study_script(),
        "near_complete.fixture.json": fixtures.near_complete_script(),
        "case_study_params.json": fixtures.case_study_parameterization(),
    }
    for filename, expected in shipped.items():
        assert json.loads(_bundled_bytes(filename)) == expected, filename


def test_case_study_script_encodes_published_counts():
    script = fixtures.case_study_script()
    opened: dict[str, int] = {}
    for command in script["commands"]:
        if command["op"] == "open_observation":
            opened[command["item"]] = opened.get(command["item"], 0) + command.get("count", 1)
    by_process = {
        "planning": sum(opened[i] for i in
                        ("psac", "sdp", "svp", "scmp", "sqap", "req-std", "des-std", "cod-std")),
        "requirements": opened["srd"],
        "design": opened["sdd"],
        "coding-integration": opened["scb"],
        "integration": opened["svtr"],
        "verification-of-verification": opened["vrr"],
    }
    assert by_process == fixtures.CASE_STUDY_OPENED
    assert sum(by_process.values()) == 3606


def test_near_complete_fixture_state(workspace):
    workspace.run_script(fixtures.near_complete_script())
    project = workspace.store.get(fixtures.NEAR_COMPLETE_PROJECT)
    report = cc_check(project)
    assert report.project_status is Status.Pending

    reasons = [r.to_dict() for p in report.processes for r in p.pending_reasons]
    assert reasons == [
        {"kind": "Unfilled", "checklist": "pc-requirements"},
        {"kind": "OpenObservation", "observation": "OBS-2"},
    ]
    # exactly one answer and one closure away from Completed
    _, _, obs = project.find_observation("OBS-2")
    assert obs.state.value == "Resolved"


def test_near_complete_finishing_moves_complete_it(workspace):
    from verimon.project import Answer, AnswerValue, ObservationState

    workspace.run_script(fixtures.near_complete_script())
    pid = fixtures.NEAR_COMPLETE_PROJECT
    workspace.store.answer_checklist("ver1", pid, "pc-requirements", "REQ-Q3",
                                     Answer(AnswerValue.Yes))
    mutation, _ = workspace.store.transition_observation("ver1", pid, "OBS-2",
                                                         ObservationState.Closed, "verified")
    assert cc_check(mutation.project).project_status is Status.Completed


def test_case_study_metrics_and_completion(workspace):
    workspace.run_script(fixtures.case_study_script())
    project = workspace.store.get(fixtures.CASE_STUDY_PROJECT)
    metrics = nonconformity_metrics(project)
    got = {row.process_id: row.opened for row in metrics.per_process}
    assert got == fixtures.CASE_STUDY_OPENED
    assert metrics.totals.opened == 3606
    assert metrics.totals.closed == 3606
    assert cc_check(project).project_status is Status.Completed


def test_case_study_project_board_has_six_rows(workspace):
    from verimon.project import ProjectParameterization
    from verimon.status import view_project_status

    params = ProjectParameterization.from_dict(fixtures.case_study_parameterization())
    workspace.store.create_project("admin", params)
    rows = view_project_status(workspace.store.get(fixtures.CASE_STUDY_PROJECT))
    assert len(rows) == 6
    assert [r["process_id"] for r in rows] == list(fixtures.CASE_STUDY_OPENED)
