"""Role and permission policy.

Five fixed roles, thirteen fixed actions, one compiled-in allow matrix.
The allow sets grow by strict inclusion from Reader up to
VerificationManager; Administrator additionally holds the platform-scoped
actions (user, norm and project management).
"""

from __future__ import annotations

from enum import Enum


class Role(str, Enum):
    Administrator = "Administrator"
    VerificationManager = "VerificationManager"
    Verifier = "Verifier"
    Developer = "Developer"
    Reader = "Reader"


class Action(str, Enum):
    ReadStatus = "ReadStatus"
    ReadAll = "ReadAll"
    AnswerProcessChecklist = "AnswerProcessChecklist"
    AnswerDocumentChecklist = "AnswerDocumentChecklist"
    RegisterItem = "RegisterItem"
    OpenObservation = "OpenObservation"
    ResolveObservation = "ResolveObservation"
    CloseObservation = "CloseObservation"
    ReopenObservation = "ReopenObservation"
    EditProjectParameterization = "EditProjectParameterization"
    ManageUsers = "ManageUsers"
    ManageNorms = "ManageNorms"
    CreateProject = "CreateProject"


_READER = frozenset({Action.ReadStatus})
_DEVELOPER = _READER | {Action.ReadAll, Action.ResolveObservation}
_VERIFIER = _DEVELOPER | {
    Action.AnswerProcessChecklist,
    Action.AnswerDocumentChecklist,
    Action.RegisterItem,
    Action.OpenObservation,
    Action.CloseObservation,
    Action.ReopenObservation,
}
_MANAGER = _VERIFIER | {Action.EditProjectParameterization}
_ADMINISTRATOR = frozenset(Action)

ALLOW_MATRIX: dict[Role, frozenset[Action]] = {
    Role.Reader: _READER,
    Role.Developer: frozenset(_DEVELOPER),
    Role.Verifier: frozenset(_VERIFIER),
    Role.VerificationManager: frozenset(_MANAGER),
    Role.Administrator: _ADMINISTRATOR,
}


def authorize(role: Role, action: Action) -> bool:
    """True when the role may perform the action; anything not granted is denied."""
    return action in ALLOW_MATRIX[role]


def allowed_actions(role: Role) -> frozenset[Action]:
    return ALLOW_MATRIX[role]


def matrix_rows() -> list[dict[str, str]]:
    """Flat (role, action, allowed) rows, in stable enum order, for display."""
    return [
        {"role": role.value, "action": action.value, "allowed": "yes" if authorize(role, action) else "no"}
        for role in Role
        for action in Action
    ]
