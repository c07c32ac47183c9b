// Dashboard state machine, independent of the DOM.
//
// Two rules shape everything here: statuses are never computed on the
// client (each badge is a field of the most recently fetched or returned
// server report), and mutations apply the report embedded in the server's
// response, so the board updates in a single round trip.

import { ApiClient, ApiError } from "./api.js";
import { allowed, transitionAction } from "./permissions.js";
import type {
  AnswerPayload,
  ItemDetail,
  Metrics,
  ProcessView,
  ProjectStatusReport,
  ProjectSummary,
  Session,
} from "./model.js";

export interface BoardRow {
  processId: string;
  name: string;
  status: string;
  pendingCount: number;
}

export interface ChartBar {
  processId: string;
  opened: number;
  stillOpen: number;
}

export interface AnswerDraft {
  value: "Yes" | "No" | "NA" | "";
  justification: string;
}

export function answerDraftValid(draft: AnswerDraft): boolean {
  if (draft.value === "") return false;
  if (draft.value === "NA") return draft.justification.trim().length > 0;
  return true;
}

export class DashboardController {
  projects: ProjectSummary[] = [];
  projectId: string | null = null;
  report: ProjectStatusReport | null = null;
  metrics: Metrics | null = null;
  processView: ProcessView | null = null;
  itemDetail: ItemDetail | null = null;
  readOnlyBanner = false;
  inlineError: string | null = null;
  // draft comment per observation id; kept when a transition is rejected
  drafts: Map<string, string> = new Map();

  constructor(
    private readonly api: ApiClient,
    readonly session: Session,
  ) {}

  // -- capability gating (controls only; the server still enforces) ----------

  get canAnswer(): boolean {
    return allowed(this.session.role, "AnswerProcessChecklist");
  }

  get canAnswerDocument(): boolean {
    return allowed(this.session.role, "AnswerDocumentChecklist");
  }

  get canOpenObservation(): boolean {
    return allowed(this.session.role, "OpenObservation");
  }

  canTransition(fromState: string, toState: string): boolean {
    const action = transitionAction(fromState, toState);
    return action !== null && allowed(this.session.role, action);
  }

  // -- loading ----------------------------------------------------------------

  async loadProjects(): Promise<void> {
    this.projects = (await this.api.getProjects()).projects;
  }

  async openProject(projectId: string): Promise<void> {
    this.projectId = projectId;
    this.report = await this.api.getStatus(projectId);
    this.metrics = await this.api.getMetrics(projectId);
  }

  async refresh(): Promise<void> {
    if (this.projectId === null) return;
    this.report = await this.api.getStatus(this.projectId);
    this.metrics = await this.api.getMetrics(this.projectId);
    if (this.processView !== null) {
      await this.openProcess(this.processView.process_id);
    }
  }

  async openProcess(processId: string): Promise<void> {
    if (this.projectId === null) throw new Error("no project selected");
    try {
      this.processView = await this.api.getProcess(this.projectId, processId);
      this.readOnlyBanner = false;
    } catch (error) {
      if (error instanceof ApiError && error.status === 403) {
        // readers see the status board only
        this.processView = null;
        this.readOnlyBanner = true;
        return;
      }
      throw error;
    }
  }

  async openItem(itemId: string): Promise<void> {
    if (this.projectId === null) throw new Error("no project selected");
    this.itemDetail = await this.api.getItem(this.projectId, itemId);
  }

  // -- view models (verbatim projections of server data) -----------------------

  get projectStatus(): string {
    return this.report?.project_status ?? "unknown";
  }

  boardRows(): BoardRow[] {
    if (this.report === null) return [];
    return this.report.processes.map((p) => ({
      processId: p.process_id,
      name: p.name,
      status: p.process_status,
      pendingCount: p.pending_reasons.length,
    }));
  }

  chartBars(): ChartBar[] {
    if (this.metrics === null) return [];
    return this.metrics.per_process.map((row) => ({
      processId: row.process_id,
      opened: row.opened,
      stillOpen: row.still_open,
    }));
  }

  // -- mutations (single round trip: apply the embedded report) -----------------

  private applyReport(report: ProjectStatusReport): void {
    this.report = report;
  }

  async submitAnswer(
    checklistId: string,
    questionId: string,
    draft: AnswerDraft,
  ): Promise<boolean> {
    if (this.projectId === null) throw new Error("no project selected");
    if (!answerDraftValid(draft)) {
      this.inlineError = "an NA answer needs a justification";
      return false;
    }
    const payload: AnswerPayload = { value: draft.value as AnswerPayload["value"] };
    if (draft.value === "NA") payload.justification = draft.justification;
    try {
      const response = await this.api.putAnswer(this.projectId, checklistId, questionId, payload);
      this.applyReport(response.report);
      this.inlineError = null;
      if (this.processView !== null && this.processView.checklist_id === checklistId) {
        for (const question of this.processView.questions) {
          if (question.question_id === questionId) question.answer = payload;
        }
        const updated = response.report.processes.find(
          (p) => p.process_id === this.processView?.process_id,
        );
        if (updated !== undefined) {
          this.processView.pc_status = updated.pc_status;
          this.processView.process_status = updated.process_status;
          this.processView.pending_reasons = updated.pending_reasons;
        }
      }
      return true;
    } catch (error) {
      this.inlineError = error instanceof ApiError ? error.errorCode : String(error);
      return false;
    }
  }

  async openObservation(itemId: string, text: string): Promise<boolean> {
    if (this.projectId === null) throw new Error("no project selected");
    try {
      const response = await this.api.postObservation(this.projectId, itemId, text);
      this.applyReport(response.report);
      this.inlineError = null;
      await this.openItem(itemId);
      return true;
    } catch (error) {
      this.inlineError = error instanceof ApiError ? error.errorCode : String(error);
      return false;
    }
  }

  async transitionObservation(
    observationId: string,
    toState: string,
    comment: string,
  ): Promise<boolean> {
    if (this.projectId === null) throw new Error("no project selected");
    this.drafts.set(observationId, comment);
    try {
      const response = await this.api.postTransition(this.projectId, observationId, toState, comment);
      this.applyReport(response.report);
      this.inlineError = null;
      this.drafts.delete(observationId);
      if (this.itemDetail !== null && response.observation !== undefined) {
        const rows = this.itemDetail.observations;
        const index = rows.findIndex((o) => o.observation_id === observationId);
        if (index >= 0) rows[index] = response.observation;
      }
      return true;
    } catch (error) {
      // the draft comment stays in this.drafts for the retry
      this.inlineError = error instanceof ApiError ? error.errorCode : String(error);
      return false;
    }
  }
}
