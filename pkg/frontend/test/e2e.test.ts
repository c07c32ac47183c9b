// End-to-end loop against the real backend: a Verifier finishes the
// near-complete fixture through the dashboard controller and the project
// badge flips to Completed from the mutation responses alone (no refetch);
// the metrics chart equals the /metrics payload field for field.

import assert from "node:assert/strict";
import { after, before, test } from "node:test";
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";

import { ApiClient } from "../src/api.js";
import { DashboardController } from "../src/controller.js";
import type { Metrics, Session } from "../src/model.js";

const REPO_ROOT = resolve(import.meta.dirname, "..", "..", "..");
const PY_SRC = join(REPO_ROOT, "src");
const PYTHON = process.env.PYTHON ?? "python3";

let server: ChildProcess | null = null;
let baseUrl = "";

function cli(store: string, args: string[]) {
  const result = spawnSync(PYTHON, ["-m", "verimon.cli", "--store", store, ...args], {
    env: { ...process.env, PYTHONPATH: PY_SRC },
    encoding: "utf-8",
  });
  if (result.status !== 0) {
    throw new Error(`cli ${args.join(" ")} failed: ${result.stderr}`);
  }
  return result.stdout;
}

before(async () => {
  const dir = mkdtempSync(join(tmpdir(), "verimon-e2e-"));
  const store = join(dir, "store");
  cli(store, ["fixtures", "load", "near-complete"]);
  const tokens = join(dir, "tokens.json");
  writeFileSync(
    tokens,
    JSON.stringify({
      tokens: {
        "tok-ver1": "ver1",
        "tok-dev1": "dev1",
        "tok-pm1": "pm1",
      },
      platform_roles: {},
    }),
  );
  server = spawn(PYTHON, [
    "-m", "verimon.cli", "--store", store, "serve", "--port", "0", "--tokens", tokens,
  ], { env: { ...process.env, PYTHONPATH: PY_SRC, PYTHONUNBUFFERED: "1" } });

  baseUrl = await new Promise<string>((resolvePromise, rejectPromise) => {
    const timer = setTimeout(() => rejectPromise(new Error("server did not start")), 15000);
    let buffered = "";
    server!.stdout!.on("data", (chunk: Buffer) => {
      buffered += chunk.toString();
      const match = buffered.match(/serving on (http:\/\/[^\s]+)/);
      if (match !== null) {
        clearTimeout(timer);
        resolvePromise(match[1]!);
      }
    });
    server!.stderr!.on("data", () => undefined);
    server!.on("exit", (code) => rejectPromise(new Error(`server exited early: ${code}`)));
  });
});

after(() => {
  server?.kill();
});

function makeController(token: string, userId: string, role: Session["role"]) {
  const session: Session = { baseUrl, token, userId, role };
  return new DashboardController(new ApiClient(baseUrl, token), session);
}

test("verifier completes the project through the dashboard in single round trips", async () => {
  const controller = makeController("tok-ver1", "ver1", "Verifier");
  await controller.loadProjects();
  assert.deepEqual(
    controller.projects.map((p) => [p.project_id, p.your_role]),
    [["display-demo", "Verifier"]],
  );

  await controller.openProject("display-demo");
  assert.equal(controller.projectStatus, "Pending");
  const requirementsRow = controller.boardRows().find((r) => r.processId === "requirements");
  assert.equal(requirementsRow?.status, "Pending");

  // the checklist form: REQ-Q3 is the one unanswered question
  await controller.openProcess("requirements");
  assert.equal(controller.readOnlyBanner, false);
  const q3 = controller.processView!.questions.find((q) => q.question_id === "REQ-Q3");
  assert.equal(q3?.answer, null);

  // NA without justification is blocked client-side, mirroring the server rule
  const blocked = await controller.submitAnswer("pc-requirements", "REQ-Q3", {
    value: "NA",
    justification: "",
  });
  assert.equal(blocked, false);

  const answered = await controller.submitAnswer("pc-requirements", "REQ-Q3", {
    value: "Yes",
    justification: "",
  });
  assert.equal(answered, true);
  // badges updated from the response's recomputed report, no page reload:
  assert.equal(controller.processView!.pc_status, "Completed");
  assert.equal(controller.projectStatus, "Pending"); // OBS-2 still blocks

  // the observation panel: OBS-2 is Resolved, waiting for closure
  await controller.openItem("srd");
  const obs2 = controller.itemDetail!.observations.find((o) => o.observation_id === "OBS-2");
  assert.equal(obs2?.state, "Resolved");

  // an illegal attempt surfaces inline and keeps the draft comment
  const illegal = await controller.transitionObservation("OBS-1", "Closed", "poking a closed one");
  assert.equal(illegal, false);
  assert.equal(controller.inlineError, "IllegalTransition");
  assert.equal(controller.drafts.get("OBS-1"), "poking a closed one");

  // closing the final observation flips the project badge, without refetch
  const closed = await controller.transitionObservation("OBS-2", "Closed", "verified the rewording");
  assert.equal(closed, true);
  assert.equal(controller.projectStatus, "Completed");
  for (const row of controller.boardRows()) {
    assert.equal(row.status, "Completed", row.processId);
  }
  assert.equal(controller.drafts.has("OBS-2"), false);

  // the chart equals the /metrics payload field for field
  const response = await fetch(`${baseUrl}/projects/display-demo/metrics`, {
    headers: { Authorization: "Bearer tok-ver1" },
  });
  const metrics = (await response.json()) as Metrics;
  await controller.refresh();
  assert.deepEqual(
    controller.chartBars(),
    metrics.per_process.map((row) => ({
      processId: row.process_id,
      opened: row.opened,
      stillOpen: row.still_open,
    })),
  );

  // a follow-up GET agrees with what the dashboard rendered
  const statusNow = await new ApiClient(baseUrl, "tok-ver1").getStatus("display-demo");
  assert.equal(statusNow.project_status, "Completed");
});

test("reader session gets the read-only banner on 403", async () => {
  const controller = makeController("tok-pm1", "pm1", "Reader");
  await controller.loadProjects();
  await controller.openProject("display-demo");
  assert.notEqual(controller.report, null);

  await controller.openProcess("requirements");
  assert.equal(controller.readOnlyBanner, true);
  assert.equal(controller.processView, null);
});

test("developer sessions disable answering client-side and the server agrees", async () => {
  const controller = makeController("tok-dev1", "dev1", "Developer");
  await controller.loadProjects();
  await controller.openProject("display-demo");
  assert.equal(controller.canAnswer, false);

  // even if the UI were bypassed, the server denies it
  const outcome = await controller.submitAnswer("pc-requirements", "REQ-Q1", {
    value: "No",
    justification: "",
  });
  assert.equal(outcome, false);
  assert.equal(controller.inlineError, "PermissionDenied");
});
