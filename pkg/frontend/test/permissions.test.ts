import assert from "node:assert/strict";
import { test } from "node:test";

import { ALLOWED, allowed, transitionAction } from "../src/permissions.js";
import type { RoleName } from "../src/model.js";

const ROLES: RoleName[] = [
  "Reader",
  "Developer",
  "Verifier",
  "VerificationManager",
  "Administrator",
];

test("reader sees status only", () => {
  assert.equal(allowed("Reader", "ReadStatus"), true);
  assert.equal(allowed("Reader", "ReadAll"), false);
  assert.equal(allowed("Reader", "AnswerProcessChecklist"), false);
});

test("developer resolves but cannot answer or close", () => {
  assert.equal(allowed("Developer", "ResolveObservation"), true);
  assert.equal(allowed("Developer", "AnswerDocumentChecklist"), false);
  assert.equal(allowed("Developer", "CloseObservation"), false);
});

test("allow sets grow by inclusion", () => {
  for (let i = 0; i + 1 < ROLES.length; i += 1) {
    const lower = ALLOWED[ROLES[i]!];
    const higher = ALLOWED[ROLES[i + 1]!];
    for (const action of lower) {
      assert.ok(higher.has(action), `${ROLES[i + 1]} should inherit ${action}`);
    }
    assert.ok(higher.size > lower.size);
  }
});

test("administrator holds all thirteen actions", () => {
  assert.equal(ALLOWED.Administrator.size, 13);
});

test("transition edges map to the verification actions", () => {
  assert.equal(transitionAction("Open", "Resolved"), "ResolveObservation");
  assert.equal(transitionAction("Resolved", "Closed"), "CloseObservation");
  assert.equal(transitionAction("Resolved", "Open"), "ReopenObservation");
  assert.equal(transitionAction("Open", "Closed"), null);
  assert.equal(transitionAction("Closed", "Open"), null);
});
