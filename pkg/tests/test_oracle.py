"""Equivalence of the status engine with the independent independent rule oracle.

The helpers here (bounded-exhaustive spaces, the per-project comparison)
are reused by the acceptance suite at its full published sizes; this module
exercises the machinery on the smaller bounds so failures localize fast.
"""

from __future__ import annotations

import random
from dataclasses import replace
from typing import Iterable, Iterator

from generators import (
    make_checklist,
    make_item,
    make_process,
    make_project,
    oracle_item_completed,
    oracle_process_completed,
    oracle_project_completed,
    process_specs,
    random_project,
)
from verimon.norms import ChecklistScope
from verimon.project import Project, VerificationProcess
from verimon.status import Status, cc_check

_BASE = make_project("probe", ())


def build_process(spec, process_id: str) -> VerificationProcess:
    pc_spec, items = spec
    return make_process(process_id, pc_spec, items)


def iter_single_process_projects(max_questions: int, max_items: int,
                                 max_observations: int) -> Iterator[Project]:
    for spec in process_specs(max_questions, max_items, max_observations):
        yield replace(_BASE, processes=(build_process(spec, "p0"),))


def iter_two_process_projects(specs_a: Iterable, specs_b: Iterable) -> Iterator[Project]:
    built_b = [build_process(s, "p1") for s in specs_b]
    for spec_a in specs_a:
        process_a = build_process(spec_a, "p0")
        for process_b in built_b:
            yield replace(_BASE, processes=(process_a, process_b))


def assert_matches_oracle(project: Project) -> None:
    """Full agreement check: project, process and item statuses, the
    completion conjunction rule, and reasons-empty equivalence."""
    report = cc_check(project)

    assert (report.project_status is Status.Completed) == oracle_project_completed(project)
    assert (report.project_status is Status.Completed) == all(
        p.process_status is Status.Completed for p in report.processes
    )
    for process, process_report in zip(project.processes, report.processes):
        assert (process_report.process_status is Status.Completed) == \
            oracle_process_completed(process)
        assert (process_report.process_status is Status.Completed) == \
            (process_report.pending_reasons == ())
        for item, item_report in zip(process.configuration_items, process_report.items):
            assert (item_report.item_status is Status.Completed) == oracle_item_completed(item)


# -- exhaustive (reduced bounds here; acceptance runs the full published sizes) --

def test_single_process_exhaustive_bound_one():
    count = 0
    for project in iter_single_process_projects(1, 1, 1):
        assert_matches_oracle(project)
        count += 1
    assert count == 105  # 5 checklist configs x (1 + 20 item configs)


def test_two_process_exhaustive_bound_one():
    specs = process_specs(1, 1, 1)
    count = 0
    for project in iter_two_process_projects(specs, specs):
        assert_matches_oracle(project)
        count += 1
    assert count == 105 * 105


def test_random_instances_match_oracle():
    rng = random.Random(20260808)
    for _ in range(300):
        assert_matches_oracle(random_project(rng))


# -- monotone completion -------------------------------------------------------------

def positive_deltas(project: Project, rng: random.Random) -> Project:
    """Apply a random sequence of positive-only deltas: answer unanswered
    questions with Yes, close Resolved observations."""
    from verimon.project import Answer, AnswerValue, ObservationState, ObservationTransition

    processes = []
    for process in project.processes:
        pc = process.process_checklist
        if rng.random() < 0.8:
            unanswered = [q.question_id for q in pc.questions if q.question_id not in pc.answers]
            picked = [q for q in unanswered if rng.random() < 0.6]
            if picked:
                answers = dict(pc.answers)
                answers.update({q: Answer(AnswerValue.Yes) for q in picked})
                pc = replace(pc, answers=answers)
        items = []
        for item in process.configuration_items:
            pdc = item.document_checklist
            unanswered = [q.question_id for q in pdc.questions if q.question_id not in pdc.answers]
            picked = [q for q in unanswered if rng.random() < 0.6]
            if picked:
                answers = dict(pdc.answers)
                answers.update({q: Answer(AnswerValue.Yes) for q in picked})
                pdc = replace(pdc, answers=answers)
            observations = []
            for obs in item.observations:
                if obs.state is ObservationState.Resolved and rng.random() < 0.6:
                    transition = ObservationTransition(
                        actor="vm1", from_state=ObservationState.Resolved,
                        to_state=ObservationState.Closed, comment="verified",
                        timestamp=obs.opened_at,
                    )
                    obs = replace(obs, state=ObservationState.Closed,
                                  transitions=obs.transitions + (transition,))
                observations.append(obs)
            items.append(replace(item, document_checklist=pdc, observations=tuple(observations)))
        processes.append(replace(process, process_checklist=pc, configuration_items=tuple(items)))
    return replace(project, processes=tuple(processes))


def completion_snapshot(project: Project) -> list:
    """(project, [process], [[item]]) statuses as booleans."""
    report = cc_check(project)
    return [
        report.project_status is Status.Completed,
        [p.process_status is Status.Completed for p in report.processes],
        [[i.item_status is Status.Completed for i in p.items] for p in report.processes],
    ]


def assert_monotone(before: list, after: list) -> None:
    assert not (before[0] and not after[0])
    for b, a in zip(before[1], after[1]):
        assert not (b and not a)
    for b_items, a_items in zip(before[2], after[2]):
        for b, a in zip(b_items, a_items):
            assert not (b and not a)


def run_monotone_trials(n: int, seed: int) -> int:
    rng = random.Random(seed)
    for trial in range(n):
        project = random_project(rng)
        before = completion_snapshot(project)
        for _ in range(rng.randint(1, 4)):
            project = positive_deltas(project, rng)
            after = completion_snapshot(project)
            assert_monotone(before, after)
            before = after
    return n


def test_monotone_completion_sample():
    assert run_monotone_trials(100, seed=99) == 100


def test_positive_deltas_eventually_complete_clean_projects():
    # a project without No answers and without Open observations must reach
    # Completed once every question is answered and every Resolved is closed
    rng = random.Random(5)
    checklist = make_checklist("pc-x", ChecklistScope.Process, (None, "Yes", None))
    item = make_item("x-i0", "x", (None, None), ("Resolved", "Closed"))
    project = make_project("clean", (
        replace(make_process("x", (), ()), process_checklist=checklist,
                configuration_items=(item,)),
    ))
    for _ in range(60):
        project = positive_deltas(project, rng)
    assert cc_check(project).project_status is Status.Completed
