"""Bundled fixture scripts and their generator.

The shipped JSON scripts under ``data/`` are produced by this module
(``python -m verimon.fixtures`` rewrites them); a test asserts the shipped
files match, so the compact generator here is the single source of truth.

``case-study``     a completed six-process project whose per-process
                   non-conformity counts reproduce the published aggregate
                   numbers of the motivating industrial project
``near-complete``  a small two-process project one answer and one closure
                   away from Completed, for demos and end-to-end tests
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

CASE_STUDY_PROJECT = "cockpit-display-upgrade"
NEAR_COMPLETE_PROJECT = "display-demo"

# observations ever opened, per process, as published for the case study
CASE_STUDY_OPENED = {
    "planning": 113,
    "requirements": 112,
    "design": 290,
    "coding-integration": 3003,
    "integration": 60,
    "verification-of-verification": 28,
}

# the planning total is spread over the five plans and three standards
_PLANNING_SPREAD = {
    "psac": 20, "sdp": 15, "svp": 18, "scmp": 14, "sqap": 12,
    "req-std": 12, "des-std": 11, "cod-std": 11,
}

_USERS = [
    {"user_id": "admin", "display_name": "Platform Administrator", "role": "Administrator"},
    {"user_id": "vm1", "display_name": "Verification Manager", "role": "VerificationManager"},
    {"user_id": "ver1", "display_name": "Verifier One", "role": "Verifier"},
    {"user_id": "ver2", "display_name": "Verifier Two", "role": "Verifier"},
    {"user_id": "dev1", "display_name": "Developer One", "role": "Developer"},
    {"user_id": "dev2", "display_name": "Developer Two", "role": "Developer"},
    {"user_id": "pm1", "display_name": "Project Manager", "role": "Reader"},
]

_PLANNING_DOCS = [
    ("psac", "Plan for Software Aspects of Certification"),
    ("sdp", "Software Development Plan"),
    ("svp", "Software Verification Plan"),
    ("scmp", "Software Configuration Management Plan"),
    ("sqap", "Software Quality Assurance Plan"),
    ("req-std", "Software Requirements Standard"),
    ("des-std", "Software Design Standard"),
    ("cod-std", "Software Code Standard"),
]

_ALL_PROCESSES = ["planning", "requirements", "design", "coding-integration",
                  "integration", "verification-of-verification"]

_PC_QUESTIONS = {
    "planning": ["PLN-Q1", "PLN-Q2", "PLN-Q3", "PLN-Q4"],
    "requirements": ["REQ-Q1", "REQ-Q2", "REQ-Q3"],
    "design": ["DES-Q1", "DES-Q2", "DES-Q3"],
    "coding-integration": ["COD-Q1", "COD-Q2", "COD-Q3"],
    "integration": ["INT-Q1", "INT-Q2", "INT-Q3"],
    "verification-of-verification": ["VOV-Q1", "VOV-Q2"],
}

_PDC_QUESTIONS = {
    "psac": ["PLAN-Q1", "PLAN-Q2", "PLAN-Q3", "PLAN-Q4"],
    "sdp": ["PLAN-Q1", "PLAN-Q2", "PLAN-Q3", "PLAN-Q4"],
    "svp": ["PLAN-Q1", "PLAN-Q2", "PLAN-Q3", "PLAN-Q4"],
    "scmp": ["PLAN-Q1", "PLAN-Q2", "PLAN-Q3", "PLAN-Q4"],
    "sqap": ["PLAN-Q1", "PLAN-Q2", "PLAN-Q3", "PLAN-Q4"],
    "req-std": ["STD-Q1", "STD-Q2", "STD-Q3"],
    "des-std": ["STD-Q1", "STD-Q2", "STD-Q3"],
    "cod-std": ["STD-Q1", "STD-Q2", "STD-Q3"],
    "srd": ["SRD-Q1", "SRD-Q2", "SRD-Q3"],
    "sdd": ["SDD-Q1", "SDD-Q2", "SDD-Q3"],
    "scb": ["SRC-Q1", "SRC-Q2", "SRC-Q3"],
    "svtr": ["TST-Q1", "TST-Q2", "TST-Q3"],
    "vrr": ["VR-Q1", "VR-Q2"],
}

_LATER_ITEMS = [
    # (process, spec, title, version)
    ("requirements", "srd", "Software Requirements Data", "1.0"),
    ("design", "sdd", "Design Description", "1.0"),
    ("coding-integration", "scb", "Source Code Baseline", "1.0"),
    ("integration", "svtr", "Software Verification Test Results", "1.0"),
    ("verification-of-verification", "vrr", "Verification Review Records", "1.0"),
]


def case_study_parameterization() -> dict[str, Any]:
    """The case study's project parameterization (demo norm, level B,
    V-Model, six processes, eight planning-phase documents)."""
    return {
        "project_id": CASE_STUDY_PROJECT,
        "norm_ref": "DO-178B-demo",
        "assurance_level": "B",
        "life_cycle": "V-Model",
        "selected_processes": list(_ALL_PROCESSES),
        "initial_documents": [{"spec_id": s, "title": t} for s, t in _PLANNING_DOCS],
        "users": [dict(u) for u in _USERS],
    }


def _answers(project_checklists: list[tuple[str, list[str]]], actor: str) -> list[dict[str, Any]]:
    commands = []
    for checklist, questions in project_checklists:
        for q in questions:
            commands.append({"op": "answer_checklist", "actor": actor,
                             "checklist": checklist, "question": q, "answer": "Yes"})
    return commands


def case_study_script() -> dict[str, Any]:
    commands: list[dict[str, Any]] = [
        {"op": "create_project", "actor": "admin", "params": case_study_parameterization()},
    ]
    for process, spec, title, version in _LATER_ITEMS:
        commands.append({"op": "register_item", "actor": "ver1", "process": process,
                         "spec": spec, "title": title, "version": version})

    pc_lists = [(f"pc-{p}", _PC_QUESTIONS[p]) for p in _ALL_PROCESSES]
    commands.extend(_answers(pc_lists, "ver1"))
    pdc_lists = [(f"pdc-{item}", qs) for item, qs in _PDC_QUESTIONS.items()]
    commands.extend(_answers(pdc_lists, "ver2"))

    opened_spread = dict(_PLANNING_SPREAD)
    opened_spread.update({
        "srd": CASE_STUDY_OPENED["requirements"],
        "sdd": CASE_STUDY_OPENED["design"],
        "scb": CASE_STUDY_OPENED["coding-integration"],
        "svtr": CASE_STUDY_OPENED["integration"],
        "vrr": CASE_STUDY_OPENED["verification-of-verification"],
    })
    for index, (item, count) in enumerate(opened_spread.items()):
        commands.append({
            "op": "open_observation",
            "actor": "ver1" if index % 2 == 0 else "ver2",
            "item": item,
            "text": f"Review finding on {item}: content requires correction or clarification",
            "count": count,
        })
    commands.append({"op": "resolve_close_all", "resolver": "dev1", "closer": "vm1"})

    return {
        "fixture_format": 1,
        "description": "Completed six-process certification project with the published "
                       "per-process non-conformity counts",
        "project_id": CASE_STUDY_PROJECT,
        "commands": commands,
    }


def near_complete_parameterization() -> dict[str, Any]:
    return {
        "project_id": NEAR_COMPLETE_PROJECT,
        "norm_ref": "DO-178B-demo",
        "assurance_level": "B",
        "life_cycle": "V-Model",
        "selected_processes": ["planning", "requirements"],
        "initial_documents": [
            {"spec_id": "psac", "title": "Plan for Software Aspects of Certification"},
            {"spec_id": "srd", "title": "Software Requirements Data"},
        ],
        "users": [dict(u) for u in _USERS],
    }


def near_complete_script() -> dict[str, Any]:
    """Everything answered and closed except one question (REQ-Q3 on the
    requirements process checklist) and one observation (OBS-2, Resolved)."""
    commands: list[dict[str, Any]] = [
        {"op": "create_project", "actor": "admin", "params": near_complete_parameterization()},
    ]
    commands.extend(_answers([
        ("pc-planning", _PC_QUESTIONS["planning"]),
        ("pdc-psac", _PDC_QUESTIONS["psac"]),
        ("pc-requirements", ["REQ-Q1", "REQ-Q2"]),
        ("pdc-srd", ["SRD-Q1", "SRD-Q2"]),
    ], "ver1"))
    commands.append({"op": "answer_checklist", "actor": "ver1", "checklist": "pdc-srd",
                     "question": "SRD-Q3", "answer": "NA",
                     "justification": "no derived requirements in this baseline"})
    commands.extend([
        {"op": "open_observation", "actor": "ver1", "item": "srd",
         "text": "Traceability table is missing two system requirements"},
        {"op": "transition_observation", "actor": "dev1", "observation": "OBS-1",
         "to": "Resolved", "comment": "table regenerated from the requirements database"},
        {"op": "transition_observation", "actor": "vm1", "observation": "OBS-1",
         "to": "Closed", "comment": "regenerated table reviewed"},
        {"op": "open_observation", "actor": "ver2", "item": "srd",
         "text": "Requirement wording of the display refresh rate is ambiguous"},
        {"op": "transition_observation", "actor": "dev1", "observation": "OBS-2",
         "to": "Resolved", "comment": "wording aligned with the interface specification"},
    ])
    return {
        "fixture_format": 1,
        "description": "Two-process project one answer and one closure away from Completed",
        "project_id": NEAR_COMPLETE_PROJECT,
        "commands": commands,
    }


BUNDLED_SCRIPTS = {
    "case-study": case_study_script,
    "near-complete": near_complete_script,
}


def bundled_script(name: str) -> dict[str, Any]:
    try:
        return BUNDLED_SCRIPTS[name]()
    except KeyError:
        raise KeyError(f"no bundled fixture {name!r}; available: {sorted(BUNDLED_SCRIPTS)}") from None


def data_dir() -> Path:
    return Path(__file__).parent / "data"


def write_bundled_files(target: Path | None = None) -> list[Path]:
    """Regenerate the shipped fixture scripts and the parameterization file."""
    target = target or data_dir()
    written = []
    outputs = {
        "case_study.fixture.json": case_study_script(),
        "near_complete.fixture.json": near_complete_script(),
        "case_study_params.json": case_study_parameterization(),
    }
    for filename, payload in outputs.items():
        path = target / filename
        path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        written.append(path)
    return written


if __name__ == "__main__":
    for path in write_bundled_files():
        print(path)
