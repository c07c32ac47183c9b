// Server payload shapes. The dashboard renders these verbatim: every badge
// and number on screen traces back to one of these fields.

export type StatusValue = "Pending" | "Completed";

export type RoleName =
  | "Administrator"
  | "VerificationManager"
  | "Verifier"
  | "Developer"
  | "Reader";

export interface PendingReason {
  kind: string;
  checklist?: string;
  question?: string;
  observation?: string;
}

export interface ItemStatusReport {
  item_id: string;
  pdc_status: StatusValue;
  observations_status: StatusValue;
  item_status: StatusValue;
}

export interface ProcessStatusReport {
  process_id: string;
  name: string;
  pc_status: StatusValue;
  items: ItemStatusReport[];
  process_status: StatusValue;
  pending_reasons: PendingReason[];
}

export interface ProjectStatusReport {
  project_id: string;
  processes: ProcessStatusReport[];
  project_status: StatusValue;
}

export interface MetricsRow {
  process_id: string;
  opened: number;
  resolved: number;
  closed: number;
  still_open: number;
}

export interface Metrics {
  project_id: string;
  per_process: MetricsRow[];
  totals: { opened: number; resolved: number; closed: number; still_open: number };
}

export interface ProjectSummary {
  project_id: string;
  norm_ref: string;
  assurance_level: string;
  life_cycle: string;
  created_at: string;
  project_status: StatusValue;
  your_role: RoleName;
}

export interface AnswerPayload {
  value: "Yes" | "No" | "NA";
  justification?: string;
}

export interface QuestionRow {
  question_id: string;
  text: string;
  objective_refs: string[];
  answer: AnswerPayload | null;
}

export interface ItemRow {
  item_id: string;
  title: string;
  version_label: string;
  document_spec_ref: string;
  checklist_id: string;
  pdc_status: StatusValue;
  observations_status: StatusValue;
  item_status: StatusValue;
}

export interface ProcessView {
  process_id: string;
  name: string;
  pc_status: StatusValue;
  checklist_id: string;
  questions: QuestionRow[];
  items: ItemRow[];
  process_status: StatusValue;
  pending_reasons: PendingReason[];
}

export interface TransitionRecord {
  actor: string;
  from_state: string;
  to_state: string;
  comment: string;
  timestamp: string;
}

export interface ObservationView {
  observation_id: string;
  item_ref: string;
  author: string;
  text: string;
  opened_at: string;
  state: "Open" | "Resolved" | "Closed";
  transitions: TransitionRecord[];
}

export interface ItemDetail {
  item: { item_id: string; title: string; version_label: string; document_checklist: unknown };
  status: ItemStatusReport;
  observations: ObservationView[];
}

export interface Session {
  baseUrl: string;
  token: string;
  userId: string;
  role: RoleName;
}
