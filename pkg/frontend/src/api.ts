// Thin typed client for the monitoring service. The fetch implementation is
// injectable so tests can run against a recorded transport or a live server.

import type {
  AnswerPayload,
  ItemDetail,
  Metrics,
  ObservationView,
  ProcessView,
  ProjectStatusReport,
  ProjectSummary,
} from "./model.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorCode: string,
    message: string,
  ) {
    super(message);
  }
}

export interface MutationResponse {
  report: ProjectStatusReport;
  sequence: number;
  checklist?: unknown;
  observation?: ObservationView;
  item?: { item_id: string };
  users?: unknown[];
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = {
      method,
      headers: { Authorization: `Bearer ${this.token}` },
    };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      (init.headers as Record<string, string>)["Content-Type"] = "application/json";
    }
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const text = await response.text();
    let parsed: unknown = null;
    try {
      parsed = text ? JSON.parse(text) : null;
    } catch {
      throw new ApiError(response.status, "BadResponse", `unparseable response for ${path}`);
    }
    if (!response.ok) {
      const err = parsed as { error_code?: string; message?: string } | null;
      throw new ApiError(
        response.status,
        err?.error_code ?? "HttpError",
        err?.message ?? `HTTP ${response.status} for ${path}`,
      );
    }
    return parsed as T;
  }

  getProjects(): Promise<{ projects: ProjectSummary[] }> {
    return this.request("GET", "/projects");
  }

  getStatus(projectId: string): Promise<ProjectStatusReport> {
    return this.request("GET", `/projects/${projectId}/status`);
  }

  getMetrics(projectId: string): Promise<Metrics> {
    return this.request("GET", `/projects/${projectId}/metrics`);
  }

  getProcess(projectId: string, processId: string): Promise<ProcessView> {
    return this.request("GET", `/projects/${projectId}/processes/${processId}`);
  }

  getItem(projectId: string, itemId: string): Promise<ItemDetail> {
    return this.request("GET", `/projects/${projectId}/items/${itemId}`);
  }

  putAnswer(
    projectId: string,
    checklistId: string,
    questionId: string,
    answer: AnswerPayload,
  ): Promise<MutationResponse> {
    return this.request(
      "PUT",
      `/projects/${projectId}/checklists/${checklistId}/answers/${questionId}`,
      answer,
    );
  }

  postObservation(projectId: string, itemId: string, text: string): Promise<MutationResponse> {
    return this.request("POST", `/projects/${projectId}/items/${itemId}/observations`, { text });
  }

  postTransition(
    projectId: string,
    observationId: string,
    toState: string,
    comment: string,
  ): Promise<MutationResponse> {
    return this.request(
      "POST",
      `/projects/${projectId}/observations/${observationId}/transitions`,
      { to_state: toState, comment },
    );
  }

  postItem(
    projectId: string,
    processId: string,
    specId: string,
    title: string,
    versionLabel: string,
  ): Promise<MutationResponse> {
    return this.request("POST", `/projects/${projectId}/processes/${processId}/items`, {
      spec_id: specId,
      title,
      version_label: versionLabel,
    });
  }
}
