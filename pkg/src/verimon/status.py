"""Pure status computation: the consistency and completeness check.

Everything in this module is a deterministic function of a project snapshot.
A checklist is Completed when it is filled (every question answered) and no
answer is No; NA answers are non-negative. An observation set is Completed
when every observation is Closed; resolving is not enough, closure is the
verifying act. A process is Completed when its process checklist and every
owned item (document checklist and observations) are Completed, and the
project is Completed exactly when every process is.

Pending reasons are enumerated exhaustively and deterministically: process
order, then the process checklist, then items in order (document checklist
before observations), questions in checklist order, observations in opening
order.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable

from .errors import UnknownItem, UnknownProcess, UnknownSelector
from .project import ChecklistInstance, ConfigurationItem, Observation, ObservationState, Project, AnswerValue


class Status(str, Enum):
    Pending = "Pending"
    Completed = "Completed"


def _both(a: Status, b: Status) -> Status:
    return Status.Completed if a is Status.Completed and b is Status.Completed else Status.Pending


@dataclass(frozen=True)
class PendingReason:
    kind: str  # Unfilled | NegativeAnswer | OpenObservation
    checklist: str | None = None
    question: str | None = None
    observation: str | None = None

    def to_dict(self) -> dict[str, str]:
        d: dict[str, str] = {"kind": self.kind}
        if self.checklist is not None:
            d["checklist"] = self.checklist
        if self.question is not None:
            d["question"] = self.question
        if self.observation is not None:
            d["observation"] = self.observation
        return d


@dataclass(frozen=True)
class ItemStatusReport:
    item_id: str
    pdc_status: Status
    observations_status: Status
    item_status: Status

    def to_dict(self) -> dict[str, str]:
        return {
            "item_id": self.item_id,
            "pdc_status": self.pdc_status.value,
            "observations_status": self.observations_status.value,
            "item_status": self.item_status.value,
        }


@dataclass(frozen=True)
class ProcessStatusReport:
    process_id: str
    name: str
    pc_status: Status
    items: tuple[ItemStatusReport, ...]
    process_status: Status
    pending_reasons: tuple[PendingReason, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "process_id": self.process_id,
            "name": self.name,
            "pc_status": self.pc_status.value,
            "items": [i.to_dict() for i in self.items],
            "process_status": self.process_status.value,
            "pending_reasons": [r.to_dict() for r in self.pending_reasons],
        }


@dataclass(frozen=True)
class ProjectStatusReport:
    project_id: str
    processes: tuple[ProcessStatusReport, ...]
    project_status: Status

    def to_dict(self) -> dict[str, Any]:
        return {
            "project_id": self.project_id,
            "processes": [p.to_dict() for p in self.processes],
            "project_status": self.project_status.value,
        }


# ---------------------------------------------------------------------------
# Elementary statuses
# ---------------------------------------------------------------------------

def checklist_status(checklist: ChecklistInstance) -> Status:
    """Completed iff every question is answered and no answer is No."""
    if not checklist.is_filled():
        return Status.Pending
    if any(a.value is AnswerValue.No for a in checklist.answers.values()):
        return Status.Pending
    return Status.Completed


def observations_status(observations: Iterable[Observation]) -> Status:
    """Completed iff every observation is Closed (vacuously for none)."""
    for obs in observations:
        if obs.state is not ObservationState.Closed:
            return Status.Pending
    return Status.Completed


def item_status(item: ConfigurationItem) -> ItemStatusReport:
    pdc = checklist_status(item.document_checklist)
    obs = observations_status(item.observations)
    return ItemStatusReport(
        item_id=item.item_id,
        pdc_status=pdc,
        observations_status=obs,
        item_status=_both(pdc, obs),
    )


def checklist_pending_reasons(checklist: ChecklistInstance) -> list[PendingReason]:
    """Every cause this checklist contributes, in question order."""
    reasons: list[PendingReason] = []
    if not checklist.is_filled():
        reasons.append(PendingReason(kind="Unfilled", checklist=checklist.instance_id))
    for q in checklist.questions:
        answer = checklist.answers.get(q.question_id)
        if answer is not None and answer.value is AnswerValue.No:
            reasons.append(PendingReason(kind="NegativeAnswer", checklist=checklist.instance_id,
                                         question=q.question_id))
    return reasons


# ---------------------------------------------------------------------------
# The check itself
# ---------------------------------------------------------------------------

def cc_check(project: Project) -> ProjectStatusReport:
    """Evaluate every process and fold the project completion rule: the project
    is Completed exactly when all of its processes are."""
    process_reports: list[ProcessStatusReport] = []
    for process in project.processes:
        pc_status = checklist_status(process.process_checklist)
        item_reports = tuple(item_status(i) for i in process.configuration_items)

        reasons: list[PendingReason] = list(checklist_pending_reasons(process.process_checklist))
        for item in process.configuration_items:
            reasons.extend(checklist_pending_reasons(item.document_checklist))
            for obs in item.observations:
                if obs.state is not ObservationState.Closed:
                    reasons.append(PendingReason(kind="OpenObservation", observation=obs.observation_id))

        completed = (pc_status is Status.Completed
                     and all(r.item_status is Status.Completed for r in item_reports))
        process_reports.append(ProcessStatusReport(
            process_id=process.process_id,
            name=process.name,
            pc_status=pc_status,
            items=item_reports,
            process_status=Status.Completed if completed else Status.Pending,
            pending_reasons=tuple(reasons),
        ))

    all_completed = all(r.process_status is Status.Completed for r in process_reports)
    return ProjectStatusReport(
        project_id=project.project_id,
        processes=tuple(process_reports),
        project_status=Status.Completed if all_completed else Status.Pending,
    )


# ---------------------------------------------------------------------------
# Progress and metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProcessProgress:
    process_id: str
    questions_answered: float  # over the process checklist plus all document checklists
    items_completed: float
    open_observations: int  # currently in state Open

    def to_dict(self) -> dict[str, Any]:
        return {
            "process_id": self.process_id,
            "questions_answered": self.questions_answered,
            "items_completed": self.items_completed,
            "open_observations": self.open_observations,
        }


@dataclass(frozen=True)
class ProgressSummary:
    project_id: str
    project_status: Status
    processes: tuple[ProcessProgress, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "project_id": self.project_id,
            "project_status": self.project_status.value,
            "processes": [p.to_dict() for p in self.processes],
        }


def _fraction(done: int, total: int) -> float:
    """Empty denominators count as complete, matching the vacuous-truth
    convention of the status rules."""
    return done / total if total else 1.0


def progress(project: Project) -> ProgressSummary:
    report = cc_check(project)
    rows: list[ProcessProgress] = []
    for process, process_report in zip(project.processes, report.processes):
        checklists = [process.process_checklist] + [i.document_checklist for i in process.configuration_items]
        total_q = sum(len(c.questions) for c in checklists)
        answered = sum(1 for c in checklists for q in c.questions if q.question_id in c.answers)
        items_done = sum(1 for r in process_report.items if r.item_status is Status.Completed)
        open_count = sum(1 for i in process.configuration_items for o in i.observations
                         if o.state is ObservationState.Open)
        rows.append(ProcessProgress(
            process_id=process.process_id,
            questions_answered=_fraction(answered, total_q),
            items_completed=_fraction(items_done, len(process.configuration_items)),
            open_observations=open_count,
        ))
    return ProgressSummary(project_id=project.project_id, project_status=report.project_status,
                           processes=tuple(rows))


@dataclass(frozen=True)
class ProcessCounts:
    process_id: str
    opened: int
    resolved: int
    closed: int
    still_open: int

    def to_dict(self) -> dict[str, int | str]:
        return {
            "process_id": self.process_id,
            "opened": self.opened,
            "resolved": self.resolved,
            "closed": self.closed,
            "still_open": self.still_open,
        }


@dataclass(frozen=True)
class NonConformityMetrics:
    project_id: str
    per_process: tuple[ProcessCounts, ...]
    totals: ProcessCounts

    def to_dict(self) -> dict[str, Any]:
        return {
            "project_id": self.project_id,
            "per_process": [p.to_dict() for p in self.per_process],
            "totals": {k: v for k, v in self.totals.to_dict().items() if k != "process_id"},
        }

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("process_id,opened,resolved,closed,still_open\r\n")
        for row in self.per_process:
            out.write(f"{row.process_id},{row.opened},{row.resolved},{row.closed},{row.still_open}\r\n")
        return out.getvalue()


def nonconformity_metrics(project: Project) -> NonConformityMetrics:
    """Counts per process of observations ever opened, by current state.
    Nothing is ever deleted, so opened = still_open + resolved + closed."""
    rows: list[ProcessCounts] = []
    for process in project.processes:
        observations = [o for i in process.configuration_items for o in i.observations]
        rows.append(ProcessCounts(
            process_id=process.process_id,
            opened=len(observations),
            resolved=sum(1 for o in observations if o.state is ObservationState.Resolved),
            closed=sum(1 for o in observations if o.state is ObservationState.Closed),
            still_open=sum(1 for o in observations if o.state is ObservationState.Open),
        ))
    totals = ProcessCounts(
        process_id="TOTAL",
        opened=sum(r.opened for r in rows),
        resolved=sum(r.resolved for r in rows),
        closed=sum(r.closed for r in rows),
        still_open=sum(r.still_open for r in rows),
    )
    return NonConformityMetrics(project_id=project.project_id, per_process=tuple(rows), totals=totals)


# ---------------------------------------------------------------------------
# Views (read-only projections)
# ---------------------------------------------------------------------------

def view_project_status(project: Project) -> list[dict[str, Any]]:
    """One row per verification process: the board-level grid."""
    report = cc_check(project)
    return [
        {
            "process_id": r.process_id,
            "name": r.name,
            "process_status": r.process_status.value,
            "pending_count": len(r.pending_reasons),
        }
        for r in report.processes
    ]


def view_process_status(project: Project, process_id: str) -> dict[str, Any]:
    """One process's checklist answers, with objective references."""
    try:
        process = project.process(process_id)
    except UnknownProcess:
        raise UnknownSelector(f"no process {process_id!r} in project {project.project_id!r}",
                              selector=process_id) from None
    pc = process.process_checklist
    return {
        "process_id": process.process_id,
        "name": process.name,
        "pc_status": checklist_status(pc).value,
        "checklist_id": pc.instance_id,
        "questions": [
            {
                "question_id": q.question_id,
                "text": q.text,
                "objective_refs": list(q.objective_refs),
                "answer": pc.answers[q.question_id].to_dict() if q.question_id in pc.answers else None,
            }
            for q in pc.questions
        ],
    }


def view_configuration_items(project: Project, process_id: str) -> list[dict[str, Any]]:
    """Per-item status rows of one process."""
    try:
        process = project.process(process_id)
    except UnknownProcess:
        raise UnknownSelector(f"no process {process_id!r} in project {project.project_id!r}",
                              selector=process_id) from None
    rows: list[dict[str, Any]] = []
    for item in process.configuration_items:
        report = item_status(item)
        rows.append({
            "item_id": item.item_id,
            "title": item.title,
            "version_label": item.version_label,
            "document_spec_ref": item.document_spec_ref,
            "checklist_id": item.document_checklist.instance_id,
            "pdc_status": report.pdc_status.value,
            "observations_status": report.observations_status.value,
            "item_status": report.item_status.value,
        })
    return rows


def view_observations(project: Project, item_id: str) -> list[dict[str, Any]]:
    """One item's observations with their full transition history."""
    try:
        _, item = project.find_item(item_id)
    except UnknownItem:
        raise UnknownSelector(f"no configuration item {item_id!r} in project {project.project_id!r}",
                              selector=item_id) from None
    return [o.to_dict() for o in item.observations]
