from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

SRC = Path(__file__).resolve().parent.parent / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from verimon.app import Workspace  # noqa: E402
from verimon.norms import NormRegistry, load_bundled_template, load_norm_template  # noqa: E402
from verimon.project import ProjectParameterization  # noqa: E402


MINIMAL_TEMPLATE = {
    "norm_id": "mini",
    "title": "Smallest legal template",
    "assurance_levels": [
        {"symbol": "L1", "rank": 0, "failure_condition": "Catastrophic"},
    ],
    "processes": [
        {
            "process_id": "review",
            "name": "Review",
            "checklist_template": {
                "template_id": "pc-review",
                "scope": "Process",
                "questions": [{"question_id": "Q1", "text": "Is the work reviewed?", "objective_refs": []}],
            },
            "expected_document_kinds": [],
        }
    ],
    "documents": [],
    "objectives": [],
}


def template_bytes(doc: dict) -> bytes:
    return json.dumps(doc).encode("utf-8")


@pytest.fixture(scope="session")
def demo_template():
    return load_bundled_template()


@pytest.fixture()
def minimal_template():
    return load_norm_template(template_bytes(MINIMAL_TEMPLATE))


@pytest.fixture()
def registry(demo_template):
    reg = NormRegistry()
    reg.add(demo_template)
    return reg


@pytest.fixture()
def workspace(tmp_path):
    return Workspace(tmp_path / "store", sync=False)


def case_study_params() -> ProjectParameterization:
    from verimon.fixtures import case_study_parameterization

    return ProjectParameterization.from_dict(case_study_parameterization())


@pytest.fixture()
def case_study_parameterization_fixture():
    return case_study_params()
