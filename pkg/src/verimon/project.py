"""Project state and the operations that change it.

A project is an immutable value: every operation validates its inputs,
checks the actor's permission and returns a ``Mutation`` holding the new
project plus a replayable event payload. The same operation code runs on
the live write path and during log replay, so replaying a project's event
history reconstructs exactly the live state.

Identifier conventions (deterministic, so replay regenerates them):
  process checklist   pc-<process_id>
  document checklist  pdc-<item_id>
  observations        OBS-<n>, n counting every observation ever opened
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

from .errors import (
    DocumentKindUnassignable,
    DuplicateItemId,
    DuplicateObservationId,
    EmptyText,
    IllegalTransition,
    LastManagerRemoval,
    MissingJustification,
    NoVerificationManager,
    PermissionDenied,
    UnknownChecklist,
    UnknownItem,
    UnknownObservation,
    UnknownProcess,
    UnknownQuestion,
    ValidationError,
)
from .events import EventType
from .norms import ChecklistScope, NormRegistry, NormTemplate, Question
from .roles import Action, Role, authorize

INITIAL_VERSION_LABEL = "initial"


class AnswerValue(str, Enum):
    Yes = "Yes"
    No = "No"
    NA = "NA"


class ObservationState(str, Enum):
    Open = "Open"
    Resolved = "Resolved"
    Closed = "Closed"


# legal lifecycle edges and the permission each one requires
_TRANSITION_ACTIONS: dict[tuple[ObservationState, ObservationState], Action] = {
    (ObservationState.Open, ObservationState.Resolved): Action.ResolveObservation,
    (ObservationState.Resolved, ObservationState.Closed): Action.CloseObservation,
    (ObservationState.Resolved, ObservationState.Open): Action.ReopenObservation,
}


@dataclass(frozen=True)
class Answer:
    value: AnswerValue
    justification: str | None = None

    def validate(self) -> "Answer":
        if self.value is AnswerValue.NA:
            if not (self.justification or "").strip():
                raise MissingJustification("an NA answer requires a non-empty justification")
        elif self.justification is not None:
            raise ValidationError("only NA answers carry a justification", value=self.value.value)
        return self

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"value": self.value.value}
        if self.value is AnswerValue.NA:
            d["justification"] = self.justification
        return d

    @classmethod
    def from_dict(cls, raw: Any) -> "Answer":
        if not isinstance(raw, dict) or "value" not in raw:
            raise ValidationError("answer must be an object with a 'value' field")
        extra = set(raw) - {"value", "justification"}
        if extra:
            raise ValidationError(f"answer has unknown field {sorted(extra)[0]!r}")
        try:
            value = AnswerValue(raw["value"])
        except ValueError:
            raise ValidationError(f"answer value must be one of Yes, No, NA, got {raw['value']!r}") from None
        return cls(value=value, justification=raw.get("justification")).validate()


@dataclass(frozen=True)
class ChecklistInstance:
    instance_id: str
    template_ref: str
    scope: ChecklistScope
    questions: tuple[Question, ...]
    answers: dict[str, Answer] = field(hash=False, default_factory=dict)

    def question_ids(self) -> tuple[str, ...]:
        return tuple(q.question_id for q in self.questions)

    def is_filled(self) -> bool:
        return all(q.question_id in self.answers for q in self.questions)

    def to_dict(self) -> dict[str, Any]:
        return {
            "instance_id": self.instance_id,
            "template_ref": self.template_ref,
            "scope": self.scope.value,
            "questions": [
                {"question_id": q.question_id, "text": q.text, "objective_refs": list(q.objective_refs)}
                for q in self.questions
            ],
            "answers": {qid: a.to_dict() for qid, a in self.answers.items()},
        }


@dataclass(frozen=True)
class ObservationTransition:
    actor: str
    from_state: ObservationState
    to_state: ObservationState
    comment: str
    timestamp: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "actor": self.actor,
            "from_state": self.from_state.value,
            "to_state": self.to_state.value,
            "comment": self.comment,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class Observation:
    observation_id: str
    item_ref: str
    author: str
    text: str
    opened_at: str
    state: ObservationState = ObservationState.Open
    transitions: tuple[ObservationTransition, ...] = ()

    def replayed_state(self) -> ObservationState:
        """Fold the transition history from Open; must equal ``state``."""
        current = ObservationState.Open
        for t in self.transitions:
            if t.from_state is not current or (t.from_state, t.to_state) not in _TRANSITION_ACTIONS:
                raise IllegalTransition(
                    f"history of {self.observation_id!r} does not replay", observation=self.observation_id
                )
            current = t.to_state
        return current

    def to_dict(self) -> dict[str, Any]:
        return {
            "observation_id": self.observation_id,
            "item_ref": self.item_ref,
            "author": self.author,
            "text": self.text,
            "opened_at": self.opened_at,
            "state": self.state.value,
            "transitions": [t.to_dict() for t in self.transitions],
        }


@dataclass(frozen=True)
class ConfigurationItem:
    item_id: str
    document_spec_ref: str
    title: str
    version_label: str
    document_checklist: ChecklistInstance
    owning_process: str
    observations: tuple[Observation, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "item_id": self.item_id,
            "document_spec_ref": self.document_spec_ref,
            "title": self.title,
            "version_label": self.version_label,
            "document_checklist": self.document_checklist.to_dict(),
            "owning_process": self.owning_process,
            "observations": [o.to_dict() for o in self.observations],
        }


@dataclass(frozen=True)
class User:
    user_id: str
    display_name: str
    role: Role

    def to_dict(self) -> dict[str, str]:
        return {"user_id": self.user_id, "display_name": self.display_name, "role": self.role.value}


@dataclass(frozen=True)
class ProjectParameterization:
    project_id: str
    norm_ref: str
    assurance_level: str
    life_cycle: str
    selected_processes: tuple[str, ...]
    initial_documents: tuple[tuple[str, str], ...]  # (document spec id, title)
    users: tuple[User, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "project_id": self.project_id,
            "norm_ref": self.norm_ref,
            "assurance_level": self.assurance_level,
            "life_cycle": self.life_cycle,
            "selected_processes": list(self.selected_processes),
            "initial_documents": [{"spec_id": s, "title": t} for s, t in self.initial_documents],
            "users": [u.to_dict() for u in self.users],
        }

    @classmethod
    def from_dict(cls, raw: Any) -> "ProjectParameterization":
        if not isinstance(raw, dict):
            raise ValidationError("parameterization must be a JSON object")
        required = {"project_id", "norm_ref", "assurance_level", "life_cycle",
                    "selected_processes", "initial_documents", "users"}
        missing = required - raw.keys()
        if missing:
            raise ValidationError(f"parameterization missing field {sorted(missing)[0]!r}")
        unknown = raw.keys() - required
        if unknown:
            raise ValidationError(f"parameterization has unknown field {sorted(unknown)[0]!r}")
        for key in ("project_id", "norm_ref", "assurance_level", "life_cycle"):
            if not isinstance(raw[key], str) or not raw[key]:
                raise ValidationError(f"parameterization field {key!r} must be a non-empty string")
        if not _is_safe_id(raw["project_id"]):
            raise ValidationError(f"project_id {raw['project_id']!r} contains unsafe characters")
        processes = raw["selected_processes"]
        if not isinstance(processes, list) or not all(isinstance(p, str) for p in processes):
            raise ValidationError("selected_processes must be a list of process ids")
        docs_raw = raw["initial_documents"]
        if not isinstance(docs_raw, list):
            raise ValidationError("initial_documents must be a list")
        docs: list[tuple[str, str]] = []
        for i, d in enumerate(docs_raw):
            if not isinstance(d, dict) or set(d) != {"spec_id", "title"}:
                raise ValidationError(f"initial_documents[{i}] must be an object with spec_id and title")
            if not isinstance(d["spec_id"], str) or not isinstance(d["title"], str):
                raise ValidationError(f"initial_documents[{i}]: spec_id and title must be strings")
            docs.append((d["spec_id"], d["title"]))
        users_raw = raw["users"]
        if not isinstance(users_raw, list):
            raise ValidationError("users must be a list")
        users: list[User] = []
        for i, u in enumerate(users_raw):
            if not isinstance(u, dict) or set(u) != {"user_id", "display_name", "role"}:
                raise ValidationError(f"users[{i}] must be an object with user_id, display_name, role")
            try:
                role = Role(u["role"])
            except ValueError:
                raise ValidationError(f"users[{i}]: unknown role {u['role']!r}") from None
            if not isinstance(u["user_id"], str) or not u["user_id"]:
                raise ValidationError(f"users[{i}]: user_id must be a non-empty string")
            users.append(User(user_id=u["user_id"], display_name=str(u["display_name"]), role=role))
        return cls(
            project_id=raw["project_id"],
            norm_ref=raw["norm_ref"],
            assurance_level=raw["assurance_level"],
            life_cycle=raw["life_cycle"],
            selected_processes=tuple(processes),
            initial_documents=tuple(docs),
            users=tuple(users),
        )


@dataclass(frozen=True)
class VerificationProcess:
    process_id: str
    name: str
    process_checklist: ChecklistInstance
    configuration_items: tuple[ConfigurationItem, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "process_id": self.process_id,
            "name": self.name,
            "process_checklist": self.process_checklist.to_dict(),
            "configuration_items": [i.to_dict() for i in self.configuration_items],
        }


@dataclass(frozen=True)
class Project:
    parameterization: ProjectParameterization
    processes: tuple[VerificationProcess, ...]
    created_at: str

    @property
    def project_id(self) -> str:
        return self.parameterization.project_id

    # -- lookups -------------------------------------------------------------

    def find_user(self, user_id: str) -> User | None:
        for u in self.parameterization.users:
            if u.user_id == user_id:
                return u
        return None

    def process(self, process_id: str) -> VerificationProcess:
        for p in self.processes:
            if p.process_id == process_id:
                return p
        raise UnknownProcess(f"project {self.project_id!r} has no process {process_id!r}", process=process_id)

    def find_checklist(self, instance_id: str) -> ChecklistInstance:
        for p in self.processes:
            if p.process_checklist.instance_id == instance_id:
                return p.process_checklist
            for item in p.configuration_items:
                if item.document_checklist.instance_id == instance_id:
                    return item.document_checklist
        raise UnknownChecklist(f"no checklist instance {instance_id!r}", checklist=instance_id)

    def find_item(self, item_id: str) -> tuple[VerificationProcess, ConfigurationItem]:
        for p in self.processes:
            for item in p.configuration_items:
                if item.item_id == item_id:
                    return p, item
        raise UnknownItem(f"no configuration item {item_id!r}", item=item_id)

    def find_observation(self, observation_id: str) -> tuple[VerificationProcess, ConfigurationItem, Observation]:
        located = self._locate_observation(observation_id)
        if located is None:
            raise UnknownObservation(f"no observation {observation_id!r}", observation=observation_id)
        p_idx, i_idx, o_idx = located
        process = self.processes[p_idx]
        item = process.configuration_items[i_idx]
        return process, item, item.observations[o_idx]

    def _locate_observation(self, observation_id: str) -> tuple[int, int, int] | None:
        for p_idx, p in enumerate(self.processes):
            for i_idx, item in enumerate(p.configuration_items):
                for o_idx, obs in enumerate(item.observations):
                    if obs.observation_id == observation_id:
                        return p_idx, i_idx, o_idx
        return None

    def all_items(self) -> list[ConfigurationItem]:
        return [item for p in self.processes for item in p.configuration_items]

    def all_observations(self) -> list[Observation]:
        return [obs for item in self.all_items() for obs in item.observations]

    def observation_count(self) -> int:
        return sum(len(item.observations) for p in self.processes for item in p.configuration_items)

    def element_set(self) -> frozenset[tuple[str, str]]:
        """Every monitored element as (kind, id): checklists, items, observations."""
        elements: set[tuple[str, str]] = set()
        for p in self.processes:
            elements.add(("checklist", p.process_checklist.instance_id))
            for item in p.configuration_items:
                elements.add(("item", item.item_id))
                elements.add(("checklist", item.document_checklist.instance_id))
                for obs in item.observations:
                    elements.add(("observation", obs.observation_id))
        return frozenset(elements)

    def to_dict(self) -> dict[str, Any]:
        return {
            "parameterization": self.parameterization.to_dict(),
            "processes": [p.to_dict() for p in self.processes],
            "created_at": self.created_at,
        }

    def summary(self) -> dict[str, Any]:
        p = self.parameterization
        return {
            "project_id": p.project_id,
            "norm_ref": p.norm_ref,
            "assurance_level": p.assurance_level,
            "life_cycle": p.life_cycle,
            "created_at": self.created_at,
        }


@dataclass(frozen=True)
class Mutation:
    """Outcome of one state-changing operation: the new project value, the
    event to audit, and the entity the operation produced or updated."""

    project: Project
    event_type: EventType
    payload: dict[str, Any]
    result: Any


def _is_safe_id(value: str) -> bool:
    import re

    return bool(re.match(r"^[A-Za-z0-9][A-Za-z0-9._-]*$", value))


def _require(project: Project, actor: str, action: Action) -> Role:
    user = project.find_user(actor)
    if user is None:
        raise PermissionDenied(f"user {actor!r} is not a member of project {project.project_id!r}",
                               actor=actor, action=action.value)
    if not authorize(user.role, action):
        raise PermissionDenied(
            f"role {user.role.value} of user {actor!r} may not perform {action.value}",
            actor=actor, role=user.role.value, action=action.value,
        )
    return user.role


def _replace_process(project: Project, updated: VerificationProcess) -> Project:
    processes = tuple(updated if p.process_id == updated.process_id else p for p in project.processes)
    return replace(project, processes=processes)


def _replace_item(project: Project, process_id: str, updated: ConfigurationItem) -> Project:
    process = project.process(process_id)
    items = tuple(updated if i.item_id == updated.item_id else i for i in process.configuration_items)
    return _replace_process(project, replace(process, configuration_items=items))


def _fresh_instance(instance_id: str, template_id: str, scope: ChecklistScope,
                    questions: tuple[Question, ...]) -> ChecklistInstance:
    return ChecklistInstance(
        instance_id=instance_id, template_ref=template_id, scope=scope, questions=questions, answers={}
    )


def _build_item(template: NormTemplate, level: str, process_id: str,
                spec_id: str, item_id: str, title: str, version_label: str) -> ConfigurationItem:
    spec = template.document_spec(spec_id)
    if spec is None:
        raise DocumentKindUnassignable(
            f"norm {template.norm_id!r} defines no document spec {spec_id!r}", spec=spec_id
        )
    doc_template = template.document_checklist_templates[spec.document_checklist_template]
    pdc = _fresh_instance(
        f"pdc-{item_id}", doc_template.template_id, ChecklistScope.Document,
        template.instance_questions(doc_template, level),
    )
    return ConfigurationItem(
        item_id=item_id,
        document_spec_ref=spec_id,
        title=title,
        version_label=version_label,
        document_checklist=pdc,
        owning_process=process_id,
    )


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def create_project(params: ProjectParameterization, registry: NormRegistry, timestamp: str) -> Mutation:
    """Instantiate a project from its parameterization.

    One verification process per selected process id, each with a fresh
    process checklist restricted to the questions applicable at the
    project's assurance level; one configuration item per initial document,
    attached to the first selected process whose template expects its spec.
    """
    template = registry.get(params.norm_ref)
    level = template.level(params.assurance_level).symbol

    if not params.selected_processes:
        raise ValidationError("selected_processes must not be empty", project=params.project_id)
    seen: set[str] = set()
    for pid in params.selected_processes:
        if pid in seen:
            raise ValidationError(f"process {pid!r} selected twice", process=pid)
        seen.add(pid)
        template.process_template(pid)  # raises UnknownProcess

    seen_users: set[str] = set()
    for user in params.users:
        if user.user_id in seen_users:
            raise ValidationError(f"duplicate user_id {user.user_id!r}", user=user.user_id)
        seen_users.add(user.user_id)
    if not any(u.role is Role.VerificationManager for u in params.users):
        raise NoVerificationManager(
            f"project {params.project_id!r} needs at least one VerificationManager"
        )

    processes: list[VerificationProcess] = []
    for pid in params.selected_processes:
        pt = template.process_template(pid)
        pc = _fresh_instance(
            f"pc-{pid}", pt.checklist_template.template_id, ChecklistScope.Process,
            template.instance_questions(pt.checklist_template, level),
        )
        processes.append(VerificationProcess(process_id=pid, name=pt.name, process_checklist=pc))

    by_id = {p.process_id: p for p in processes}
    item_ids: set[str] = set()
    for spec_id, title in params.initial_documents:
        owner = None
        for pid in params.selected_processes:
            if spec_id in template.process_template(pid).expected_document_kinds:
                owner = pid
                break
        if owner is None:
            raise DocumentKindUnassignable(
                f"document spec {spec_id!r} is not expected by any selected process", spec=spec_id
            )
        item_id = spec_id
        n = 2
        while item_id in item_ids:
            item_id = f"{spec_id}-{n}"
            n += 1
        item_ids.add(item_id)
        item = _build_item(template, level, owner, spec_id, item_id, title, INITIAL_VERSION_LABEL)
        process = by_id[owner]
        by_id[owner] = replace(process, configuration_items=process.configuration_items + (item,))

    project = Project(
        parameterization=params,
        processes=tuple(by_id[pid] for pid in params.selected_processes),
        created_at=timestamp,
    )
    return Mutation(project=project, event_type=EventType.ProjectCreated,
                    payload={"parameterization": params.to_dict()}, result=project)


def answer_checklist(project: Project, actor: str, instance_id: str, question_id: str,
                     answer: Answer) -> Mutation:
    """Record (or overwrite) one checklist answer; re-review is normal."""
    checklist = project.find_checklist(instance_id)
    action = (Action.AnswerProcessChecklist if checklist.scope is ChecklistScope.Process
              else Action.AnswerDocumentChecklist)
    _require(project, actor, action)
    if question_id not in checklist.question_ids():
        raise UnknownQuestion(
            f"checklist {instance_id!r} has no question {question_id!r}",
            checklist=instance_id, question=question_id,
        )
    answer.validate()
    updated = replace(checklist, answers={**checklist.answers, question_id: answer})
    new_project = _put_checklist(project, updated)
    return Mutation(
        project=new_project,
        event_type=EventType.ChecklistAnswered,
        payload={"instance_id": instance_id, "question_id": question_id, "answer": answer.to_dict()},
        result=updated,
    )


def _put_checklist(project: Project, updated: ChecklistInstance) -> Project:
    for p in project.processes:
        if p.process_checklist.instance_id == updated.instance_id:
            return _replace_process(project, replace(p, process_checklist=updated))
        for item in p.configuration_items:
            if item.document_checklist.instance_id == updated.instance_id:
                return _replace_item(project, p.process_id, replace(item, document_checklist=updated))
    raise UnknownChecklist(f"no checklist instance {updated.instance_id!r}", checklist=updated.instance_id)


def register_configuration_item(project: Project, actor: str, process_id: str, spec_id: str,
                                title: str, version_label: str, registry: NormRegistry,
                                item_id: str | None = None) -> Mutation:
    """Add a configuration item (with a fresh document checklist) to a process."""
    process = project.process(process_id)
    _require(project, actor, Action.RegisterItem)
    if not title.strip():
        raise ValidationError("item title must not be empty", item=item_id)
    if not version_label.strip():
        raise ValidationError("version_label must not be empty", item=item_id)

    template = registry.get(project.parameterization.norm_ref)
    pt = template.process_template(process_id)
    if spec_id not in pt.expected_document_kinds:
        raise DocumentKindUnassignable(
            f"process {process_id!r} does not expect documents of spec {spec_id!r}",
            process=process_id, spec=spec_id,
        )

    existing = {item.item_id for item in project.all_items()}
    if item_id is None:
        item_id = spec_id
        n = 2
        while item_id in existing:
            item_id = f"{spec_id}-{n}"
            n += 1
    elif item_id in existing:
        raise DuplicateItemId(f"item id {item_id!r} already registered", item=item_id)
    if not _is_safe_id(item_id):
        raise ValidationError(f"item id {item_id!r} contains unsafe characters", item=item_id)

    item = _build_item(template, project.parameterization.assurance_level, process_id,
                       spec_id, item_id, title, version_label)
    new_project = _replace_process(
        project, replace(process, configuration_items=process.configuration_items + (item,))
    )
    return Mutation(
        project=new_project,
        event_type=EventType.ItemRegistered,
        payload={"process_id": process_id, "spec_id": spec_id, "item_id": item_id,
                 "title": title, "version_label": version_label},
        result=item,
    )


def open_observation(project: Project, actor: str, item_id: str, text: str, timestamp: str,
                     observation_id: str | None = None) -> Mutation:
    """Open a non-conformity against a configuration item."""
    process, item = project.find_item(item_id)
    _require(project, actor, Action.OpenObservation)
    if not text.strip():
        raise EmptyText("observation text must not be empty", item=item_id)

    if observation_id is None:
        n = project.observation_count() + 1
        observation_id = f"OBS-{n}"
        while project._locate_observation(observation_id) is not None:
            n += 1
            observation_id = f"OBS-{n}"
    elif project._locate_observation(observation_id) is not None:
        raise DuplicateObservationId(f"observation id {observation_id!r} already exists",
                                     observation=observation_id)

    obs = Observation(observation_id=observation_id, item_ref=item_id, author=actor,
                      text=text, opened_at=timestamp)
    new_project = _replace_item(project, process.process_id,
                                replace(item, observations=item.observations + (obs,)))
    return Mutation(
        project=new_project,
        event_type=EventType.ObservationOpened,
        payload={"item_id": item_id, "observation_id": observation_id, "text": text},
        result=obs,
    )


def transition_observation(project: Project, actor: str, observation_id: str, to_state: ObservationState,
                           comment: str, timestamp: str) -> Mutation:
    """Move an observation along its lifecycle (resolve, close, or reopen)."""
    located = project._locate_observation(observation_id)
    if located is None:
        raise UnknownObservation(f"no observation {observation_id!r}", observation=observation_id)
    p_idx, i_idx, o_idx = located
    process = project.processes[p_idx]
    item = process.configuration_items[i_idx]
    obs = item.observations[o_idx]
    edge = (obs.state, to_state)
    action = _TRANSITION_ACTIONS.get(edge)
    if action is None:
        raise IllegalTransition(
            f"observation {observation_id!r} cannot move {obs.state.value} -> {to_state.value}",
            observation=observation_id, from_state=obs.state.value, to_state=to_state.value,
        )
    _require(project, actor, action)
    if not comment.strip():
        raise EmptyText("transition comment must not be empty", observation=observation_id)

    transition = ObservationTransition(actor=actor, from_state=obs.state, to_state=to_state,
                                       comment=comment, timestamp=timestamp)
    updated = replace(obs, state=to_state, transitions=obs.transitions + (transition,))
    observations = item.observations[:o_idx] + (updated,) + item.observations[o_idx + 1:]
    new_project = _replace_item(project, process.process_id, replace(item, observations=observations))
    return Mutation(
        project=new_project,
        event_type=EventType.ObservationTransitioned,
        payload={"observation_id": observation_id, "to_state": to_state.value, "comment": comment},
        result=updated,
    )


def assign_user(project: Project, actor: str, user_id: str, role: Role,
                display_name: str | None = None) -> Mutation:
    """Add a user or change an existing user's role."""
    _require(project, actor, Action.ManageUsers)
    existing = project.find_user(user_id)
    if existing is not None and existing.role is Role.VerificationManager and role is not Role.VerificationManager:
        managers = [u for u in project.parameterization.users if u.role is Role.VerificationManager]
        if len(managers) == 1:
            raise LastManagerRemoval(
                f"user {user_id!r} is the only VerificationManager of project {project.project_id!r}",
                user=user_id,
            )
    if display_name is None:
        display_name = existing.display_name if existing is not None else user_id

    user = User(user_id=user_id, display_name=display_name, role=role)
    params = project.parameterization
    if existing is None:
        users = params.users + (user,)
    else:
        users = tuple(user if u.user_id == user_id else u for u in params.users)
    new_project = replace(project, parameterization=replace(params, users=users))
    return Mutation(
        project=new_project,
        event_type=EventType.UserAssigned,
        payload={"user_id": user_id, "display_name": display_name, "role": role.value},
        result=user,
    )


def edit_parameterization(project: Project, actor: str, life_cycle: str) -> Mutation:
    """Relabel the project's life cycle. Structural fields (norm, level,
    processes) are fixed at instantiation; items and users evolve through
    their dedicated operations."""
    _require(project, actor, Action.EditProjectParameterization)
    if not life_cycle.strip():
        raise ValidationError("life_cycle must not be empty")
    params = replace(project.parameterization, life_cycle=life_cycle)
    new_project = replace(project, parameterization=params)
    return Mutation(
        project=new_project,
        event_type=EventType.ParameterizationEdited,
        payload={"life_cycle": life_cycle},
        result=new_project.parameterization,
    )


# ---------------------------------------------------------------------------
# Event application (replay path)
# ---------------------------------------------------------------------------

def apply_event(project: Project | None, event_type: str, actor: str, timestamp: str,
                payload: dict[str, Any], registry: NormRegistry) -> Mutation:
    """Apply one recorded event through the operation it originated from."""
    etype = EventType(event_type)
    if etype is EventType.ProjectCreated:
        params = ProjectParameterization.from_dict(payload["parameterization"])
        return create_project(params, registry, timestamp)
    assert project is not None
    if etype is EventType.ChecklistAnswered:
        return answer_checklist(project, actor, payload["instance_id"], payload["question_id"],
                                Answer.from_dict(payload["answer"]))
    if etype is EventType.ItemRegistered:
        return register_configuration_item(project, actor, payload["process_id"], payload["spec_id"],
                                           payload["title"], payload["version_label"], registry,
                                           item_id=payload["item_id"])
    if etype is EventType.ObservationOpened:
        return open_observation(project, actor, payload["item_id"], payload["text"], timestamp,
                                observation_id=payload["observation_id"])
    if etype is EventType.ObservationTransitioned:
        return transition_observation(project, actor, payload["observation_id"],
                                      ObservationState(payload["to_state"]), payload["comment"], timestamp)
    if etype is EventType.UserAssigned:
        return assign_user(project, actor, payload["user_id"], Role(payload["role"]),
                           display_name=payload["display_name"])
    if etype is EventType.ParameterizationEdited:
        return edit_parameterization(project, actor, payload["life_cycle"])
    raise ValidationError(f"unhandled event type {event_type!r}")  # pragma: no cover
