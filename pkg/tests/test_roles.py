"""Permission policy: the full role/action grid, inclusion chain, default deny."""

from __future__ import annotations

from itertools import product

from verimon.roles import Action, Role, allowed_actions, authorize, matrix_rows

# Expected grid, frozen independently of roles.py: readers see status only;
# developers additionally read everything and may resolve their findings;
# verifiers run the verification work; managers also edit parameterization;
# administrators hold every action including the platform-scoped three.
EXPECTED_ALLOWED: dict[str, set[str]] = {
    "Reader": {"ReadStatus"},
    "Developer": {"ReadStatus", "ReadAll", "ResolveObservation"},
    "Verifier": {
        "ReadStatus", "ReadAll", "ResolveObservation",
        "AnswerProcessChecklist", "AnswerDocumentChecklist", "RegisterItem",
        "OpenObservation", "CloseObservation", "ReopenObservation",
    },
    "VerificationManager": {
        "ReadStatus", "ReadAll", "ResolveObservation",
        "AnswerProcessChecklist", "AnswerDocumentChecklist", "RegisterItem",
        "OpenObservation", "CloseObservation", "ReopenObservation",
        "EditProjectParameterization",
    },
    "Administrator": {
        "ReadStatus", "ReadAll", "ResolveObservation",
        "AnswerProcessChecklist", "AnswerDocumentChecklist", "RegisterItem",
        "OpenObservation", "CloseObservation", "ReopenObservation",
        "EditProjectParameterization",
        "ManageUsers", "ManageNorms", "CreateProject",
    },
}


def test_enumerations_are_exact():
    assert {r.value for r in Role} == set(EXPECTED_ALLOWED)
    assert len(list(Action)) == 13


def test_full_grid_matches_expected_matrix():
    for role, action in product(Role, Action):
        expected = action.value in EXPECTED_ALLOWED[role.value]
        assert authorize(role, action) == expected, (role, action)


def test_grid_is_total():
    # every pair yields a boolean, no exceptions
    results = [authorize(role, action) for role, action in product(Role, Action)]
    assert len(results) == 5 * 13
    assert all(isinstance(r, bool) for r in results)


def test_inclusion_chain():
    reader = allowed_actions(Role.Reader)
    developer = allowed_actions(Role.Developer)
    verifier = allowed_actions(Role.Verifier)
    manager = allowed_actions(Role.VerificationManager)
    admin = allowed_actions(Role.Administrator)
    assert reader < developer < verifier < manager
    assert manager <= admin and admin == frozenset(Action)


def test_role_boundary_examples():
    assert authorize(Role.Reader, Action.ReadStatus)
    assert not authorize(Role.Reader, Action.ReadAll)
    assert not authorize(Role.Developer, Action.AnswerDocumentChecklist)
    assert authorize(Role.Developer, Action.ResolveObservation)
    assert authorize(Role.VerificationManager, Action.AnswerProcessChecklist)
    assert not authorize(Role.VerificationManager, Action.ManageUsers)


def test_matrix_rows_cover_everything():
    rows = matrix_rows()
    assert len(rows) == 5 * 13
    for row in rows:
        expected = "yes" if row["action"] in EXPECTED_ALLOWED[row["role"]] else "no"
        assert row["allowed"] == expected
