"""Acceptance criteria, one test per criterion, at their full sizes and
tolerances. Each prints a single PASS line on success (run with -s to see
them); any failure fails the suite.

Criteria:
  1 case-study metrics reproduction (exact counts, < 5 s, via the CLI)
  2 scale note: the fixture encodes only the published aggregates
  3 consistency-check oracle equivalence (bounded exhaustive + >= 1000 random, < 60 s)
  4 completion conjunction rule on every generated instance
  5 monotone completion under positive-only deltas (500 instances)
  6 replay determinism (200 random operation sequences, byte equality)
  7 tamper evidence (100-record log, >= 1000 byte positions)
  8 permission grid (5 x 13) and inclusion chain
  9 API contract: read-after-write and audit coupling on an endpoint walk
"""

from __future__ import annotations

import json
import os
import random
import subprocess
import sys
import time
from itertools import product
from pathlib import Path

import pytest

from generators import process_specs, random_project, run_random_session
from test_oracle import (
    assert_matches_oracle,
    completion_snapshot,
    assert_monotone,
    iter_single_process_projects,
    iter_two_process_projects,
    positive_deltas,
)

SRC_DIR = str(Path(__file__).resolve().parent.parent / "src")


def report(line: str) -> None:
    print(f"\nPASS: {line}")


# -- 1: case-study metrics ------------------------------------------------------------

EXPECTED_OPENED = {
    "planning": 113,
    "requirements": 112,
    "design": 290,
    "coding-integration": 3003,
    "integration": 60,
    "verification-of-verification": 28,
}


def run_cli(store: Path, *argv: str) -> subprocess.CompletedProcess:
    env = dict(os.environ)
    env["PYTHONPATH"] = SRC_DIR + os.pathsep + env.get("PYTHONPATH", "")
    return subprocess.run(
        [sys.executable, "-m", "verimon.cli", "--store", str(store), *argv],
        capture_output=True, text=True, env=env,
    )


def test_criterion_1_case_study_metrics(tmp_path):
    store = tmp_path / "store"
    started = time.monotonic()
    load = run_cli(store, "fixtures", "load", "case-study")
    metrics = run_cli(store, "project", "metrics", "cockpit-display-upgrade", "--format", "csv")
    elapsed = time.monotonic() - started

    assert load.returncode == 0, load.stderr
    assert metrics.returncode == 0, metrics.stderr
    rows = [line.split(",") for line in metrics.stdout.strip().splitlines()[1:]]
    got = {row[0]: int(row[1]) for row in rows}
    assert got == EXPECTED_OPENED  # zero tolerance
    assert elapsed < 5.0, f"took {elapsed:.2f}s"
    report(f"criterion 1: case-study opened counts {sorted(got.values())} exact, "
           f"{elapsed:.2f}s < 5s")


def test_criterion_2_fixture_is_aggregate_only():
    """The underlying industrial project is not reproducible; the fixture
    must encode exactly its published per-process aggregates and nothing
    finer-grained than synthetic repeated findings."""
    from verimon import fixtures

    script = fixtures.case_study_script()
    opened = {}
    for command in script["commands"]:
        if command["op"] == "open_observation":
            opened[command["item"]] = opened.get(command["item"], 0) + command.get("count", 1)
    per_process = {
        "planning": sum(opened[i] for i in
                        ("psac", "sdp", "svp", "scmp", "sqap", "req-std", "des-std", "cod-std")),
        "requirements": opened["srd"],
        "design": opened["sdd"],
        "coding-integration": opened["scb"],
        "integration": opened["svtr"],
        "verification-of-verification": opened["vrr"],
    }
    assert per_process == EXPECTED_OPENED
    texts = {c["text"] for c in script["commands"] if c["op"] == "open_observation"}
    assert all("Review finding" in t for t in texts)  # synthetic, not real findings
    report("criterion 2: fixture encodes only the published aggregate counts "
           f"(total {sum(per_process.values())})")


# -- 3 + 4: oracle equivalence and the completion conjunction rule ------------------------------------------

_counts: dict[str, int] = {}


def test_criterion_3_oracle_equivalence():
    started = time.monotonic()
    checked = 0

    # exhaustive single-process space at the full published bounds
    for project in iter_single_process_projects(2, 2, 2):
        assert_matches_oracle(project)
        checked += 1
    single = checked

    # exhaustive two-process space at bound one
    small = process_specs(1, 1, 1)
    for project in iter_two_process_projects(small, small):
        assert_matches_oracle(project)
        checked += 1

    # stratified two-process sample over the full bound-two alphabet
    full = process_specs(2, 2, 2)
    sample = full[::997]
    for project in iter_two_process_projects(sample, sample):
        assert_matches_oracle(project)
        checked += 1

    # >= 1000 random larger instances
    rng = random.Random(42)
    for _ in range(1000):
        assert_matches_oracle(random_project(rng))
        checked += 1

    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"took {elapsed:.2f}s"
    _counts["oracle"] = checked
    report(f"criterion 3: consistency check equals independent rule oracle on {checked} instances "
           f"({single} bounded-exhaustive single-process), {elapsed:.1f}s < 60s")


def test_criterion_4_completion_conjunction():
    # assert_matches_oracle enforces the conjunction rule on every instance of
    # criterion 3; this re-checks it explicitly on a fresh random sample
    from verimon.status import Status, cc_check

    rng = random.Random(77)
    checked = 0
    for _ in range(2000):
        project = random_project(rng)
        report_ = cc_check(project)
        all_processes = all(p.process_status is Status.Completed for p in report_.processes)
        assert (report_.project_status is Status.Completed) == all_processes
        checked += 1
    total = checked + _counts.get("oracle", 0)
    report(f"criterion 4: completion conjunction rule holds on all {total} generated instances")


# -- 5: monotone completion -------------------------------------------------------------------

def test_criterion_5_monotone_completion():
    rng = random.Random(20260505)
    for trial in range(500):
        project = random_project(rng)
        before = completion_snapshot(project)
        for _ in range(rng.randint(1, 5)):
            project = positive_deltas(project, rng)
            after = completion_snapshot(project)
            assert_monotone(before, after)
            before = after
    report("criterion 5: positive-only deltas never flipped Completed to Pending "
           "(500 instances)")


# -- 6: replay determinism -----------------------------------------------------------------

def test_criterion_6_replay_determinism(tmp_path):
    from verimon.app import Workspace
    from verimon.canonical import canonical_bytes
    from verimon.store import replay

    ws = Workspace(tmp_path / "store", sync=False)
    for seed in range(200):
        rng = random.Random(50_000 + seed)
        project_id = f"replay-{seed}"
        run_random_session(ws.store, rng, project_id, n_ops=12)
        live = ws.store.get(project_id)
        reconstructed = replay(ws.store.records(project_id), ws.registry)
        assert canonical_bytes(reconstructed.to_dict()) == canonical_bytes(live.to_dict())
    report("criterion 6: live state equals replay(log) byte-for-byte "
           "(200 random operation sequences)")


# -- 7: tamper evidence ------------------------------------------------------------------------

def test_criterion_7_tamper_evidence(tmp_path):
    from verimon.app import Workspace
    from verimon.errors import ChainCorruption
    from verimon.events import decode_log_lines

    from verimon.project import Answer, AnswerValue

    ws = Workspace(tmp_path / "store", sync=False)
    rng = random.Random(7_777)
    run_random_session(ws.store, rng, "tamper-me", n_ops=90)
    while ws.store.head_sequence("tamper-me") + 1 < 100:
        ws.store.answer_checklist("ver1", "tamper-me", "pc-planning", "PLN-Q1",
                                  Answer(AnswerValue.Yes))
    assert ws.store.head_sequence("tamper-me") + 1 == 100

    path = ws.store.projects_dir / "tamper-me.log"
    blob = path.read_bytes()
    header_len = len(blob.split(b"\n", 1)[0]) + 1
    positions = rng.sample(range(header_len, len(blob)), 1200)

    detected = 0
    for position in positions:
        tampered = bytearray(blob)
        tampered[position] ^= 0x01
        lines = bytes(tampered).decode("utf-8", errors="replace").splitlines(keepends=True)
        with pytest.raises(ChainCorruption):
            decode_log_lines(lines)
        detected += 1
    assert detected == len(positions)
    report(f"criterion 7: all {detected} sampled single-byte flips in a 100-record log "
           "were detected")


# -- 8: permission grid --------------------------------------------------------------------------

def test_criterion_8_permission_grid():
    from test_roles import EXPECTED_ALLOWED
    from verimon.roles import Action, Role, allowed_actions, authorize

    for role, action in product(Role, Action):
        assert authorize(role, action) == (action.value in EXPECTED_ALLOWED[role.value])
    chain = [Role.Reader, Role.Developer, Role.Verifier, Role.VerificationManager]
    for lower, higher in zip(chain, chain[1:]):
        assert allowed_actions(lower) < allowed_actions(higher)
    assert allowed_actions(Role.Administrator) == frozenset(Action)
    report("criterion 8: all 65 (role, action) pairs match; inclusion chain "
           "Reader < Developer < Verifier < VerificationManager holds")


# -- 9: API contract ------------------------------------------------------------------------------

def test_criterion_9_api_contract(tmp_path):
    import requests

    from conftest import MINIMAL_TEMPLATE
    from verimon.app import Workspace
    from verimon.fixtures import bundled_script, case_study_parameterization
    from verimon.roles import Role
    from verimon.service import ApiService, AuthConfig

    ws = Workspace(tmp_path / "store", norm_dir=tmp_path / "norms", sync=False)
    ws.run_script(bundled_script("near-complete"))
    auth = AuthConfig(
        tokens={"t-admin": "admin", "t-ver1": "ver1", "t-pm1": "pm1"},
        platform_roles={"admin": Role.Administrator},
    )
    service = ApiService(ws, auth).start()
    base = service.base_url
    pid = "display-demo"

    def call(method, path, token, body=None, raw=None):
        headers = {"Authorization": f"Bearer {token}"}
        data = raw if raw is not None else (json.dumps(body).encode() if body is not None else None)
        return requests.request(method, base + path, data=data, headers=headers, timeout=10)

    def events() -> int:
        return ws.store.head_sequence(pid) + 1

    try:
        walked = 0
        # (method, path, body, expected 2xx) for every mutating endpoint
        mutations = [
            ("PUT", f"/projects/{pid}/checklists/pc-requirements/answers/REQ-Q3",
             {"value": "Yes"}, 200),
            ("POST", f"/projects/{pid}/processes/planning/items",
             {"spec_id": "sdp", "title": "Development Plan", "version_label": "1.0"}, 201),
            ("POST", f"/projects/{pid}/items/sdp/observations",
             {"text": "section numbering inconsistent"}, 201),
            ("POST", f"/projects/{pid}/observations/OBS-2/transitions",
             {"to_state": "Closed", "comment": "verified"}, 200),
            ("PUT", f"/projects/{pid}/users/pm2", {"role": "Reader"}, 200),
        ]
        for method, path, body, expected in mutations:
            before = events()
            response = call(method, path, "t-admin" if "/users/" in path else "t-ver1", body=body)
            assert response.status_code == expected, (path, response.text)
            assert events() == before + 1  # exactly one audit event
            embedded = response.json()["report"]
            follow_up = call("GET", f"/projects/{pid}/status", "t-ver1").json()
            assert embedded == follow_up  # read-after-write
            walked += 1

        # project creation appends exactly the genesis event of the new log
        created = call("POST", "/projects", "t-admin", body=case_study_parameterization())
        assert created.status_code == 201
        assert ws.store.head_sequence("cockpit-display-upgrade") == 0
        follow_up = call("GET", "/projects/cockpit-display-upgrade/status", "t-admin").json()
        assert created.json()["report"] == follow_up
        walked += 1

        # norm upload is registry-scoped: no project event
        before = events()
        uploaded = call("POST", "/norms", "t-admin", raw=json.dumps(MINIMAL_TEMPLATE).encode())
        assert uploaded.status_code == 201
        assert events() == before
        walked += 1

        # a 4xx on every mutating endpoint appends nothing
        failures = [
            ("PUT", f"/projects/{pid}/checklists/pc-requirements/answers/REQ-Q3",
             "t-pm1", {"value": "Yes"}, 403),
            ("PUT", f"/projects/{pid}/checklists/pc-requirements/answers/NOPE",
             "t-ver1", {"value": "Yes"}, 404),
            ("POST", f"/projects/{pid}/processes/planning/items",
             "t-ver1", {"spec_id": "sdd", "title": "x", "version_label": "1"}, 409),
            ("POST", f"/projects/{pid}/items/sdp/observations", "t-ver1", {"text": "  "}, 400),
            ("POST", f"/projects/{pid}/observations/OBS-1/transitions",
             "t-ver1", {"to_state": "Closed", "comment": "x"}, 409),
            ("PUT", f"/projects/{pid}/users/zz", "t-ver1", {"role": "Reader"}, 403),
            ("POST", "/projects", "t-ver1", case_study_parameterization(), 403),
            ("POST", "/norms", "t-ver1", MINIMAL_TEMPLATE, 403),
        ]
        for method, path, token, body, expected in failures:
            before = events()
            response = call(method, path, token, body=body)
            assert response.status_code == expected, (path, response.status_code, response.text)
            assert events() == before  # zero audit events on 4xx
            walked += 1
    finally:
        service.stop()

    report(f"criterion 9: endpoint walk ({walked} calls): read-after-write consistent, "
           "2xx appends exactly one event, 4xx appends none")
