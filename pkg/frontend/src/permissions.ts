// Mirror of the server's role/action matrix, used ONLY to enable and
// disable controls. The server is the enforcer; a mismatch here shows as a
// 403 banner, never as a wrong status.

import type { RoleName } from "./model.js";

export type ActionName =
  | "ReadStatus"
  | "ReadAll"
  | "AnswerProcessChecklist"
  | "AnswerDocumentChecklist"
  | "RegisterItem"
  | "OpenObservation"
  | "ResolveObservation"
  | "CloseObservation"
  | "ReopenObservation"
  | "EditProjectParameterization"
  | "ManageUsers"
  | "ManageNorms"
  | "CreateProject";

const READER: ActionName[] = ["ReadStatus"];
const DEVELOPER: ActionName[] = [...READER, "ReadAll", "ResolveObservation"];
const VERIFIER: ActionName[] = [
  ...DEVELOPER,
  "AnswerProcessChecklist",
  "AnswerDocumentChecklist",
  "RegisterItem",
  "OpenObservation",
  "CloseObservation",
  "ReopenObservation",
];
const MANAGER: ActionName[] = [...VERIFIER, "EditProjectParameterization"];
const ADMINISTRATOR: ActionName[] = [...MANAGER, "ManageUsers", "ManageNorms", "CreateProject"];

export const ALLOWED: Record<RoleName, ReadonlySet<ActionName>> = {
  Reader: new Set(READER),
  Developer: new Set(DEVELOPER),
  Verifier: new Set(VERIFIER),
  VerificationManager: new Set(MANAGER),
  Administrator: new Set(ADMINISTRATOR),
};

export function allowed(role: RoleName, action: ActionName): boolean {
  return ALLOWED[role].has(action);
}

export function transitionAction(from: string, to: string): ActionName | null {
  if (from === "Open" && to === "Resolved") return "ResolveObservation";
  if (from === "Resolved" && to === "Closed") return "CloseObservation";
  if (from === "Resolved" && to === "Open") return "ReopenObservation";
  return null;
}
