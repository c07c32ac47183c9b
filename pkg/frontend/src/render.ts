// HTML renderers: pure string builders over controller view models.
// No status is derived here; inputs are displayed as delivered.

import type { BoardRow, ChartBar } from "./controller.js";
import type { ItemDetail, ItemRow, ProcessView } from "./model.js";

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function badge(status: string): string {
  const kind = status === "Completed" ? "completed" : "pending";
  return `<span class="badge badge-${kind}">${escapeHtml(status)}</span>`;
}

export function renderBoard(projectId: string, projectStatus: string, rows: BoardRow[]): string {
  const body = rows
    .map(
      (row) => `<tr data-process="${escapeHtml(row.processId)}">
  <td class="process-name">${escapeHtml(row.name)}</td>
  <td>${badge(row.status)}</td>
  <td class="pending-count">${row.pendingCount}</td>
</tr>`,
    )
    .join("\n");
  return `<h2>${escapeHtml(projectId)} ${badge(projectStatus)}</h2>
<table class="board">
<thead><tr><th>Verification process</th><th>Status</th><th>Pending reasons</th></tr></thead>
<tbody>
${body}
</tbody>
</table>`;
}

export function renderChecklistForm(view: ProcessView, canAnswer: boolean): string {
  const disabled = canAnswer ? "" : " disabled";
  const rows = view.questions
    .map((question) => {
      const current = question.answer?.value ?? "";
      const options = ["Yes", "No", "NA"]
        .map(
          (value) =>
            `<label><input type="radio" name="${escapeHtml(question.question_id)}" value="${value}"` +
            `${current === value ? " checked" : ""}${disabled}> ${value}</label>`,
        )
        .join(" ");
      const refs = question.objective_refs.map(escapeHtml).join(", ");
      return `<tr data-question="${escapeHtml(question.question_id)}">
  <td>${escapeHtml(question.question_id)}</td>
  <td>${escapeHtml(question.text)}<div class="refs">${refs}</div></td>
  <td>${options}
    <input type="text" class="justification" placeholder="justification (required for NA)"${disabled}>
    <button class="submit-answer"${disabled}>Save</button>
  </td>
</tr>`;
    })
    .join("\n");
  return `<h3>${escapeHtml(view.name)} checklist ${badge(view.pc_status)}</h3>
<table class="checklist" data-checklist="${escapeHtml(view.checklist_id)}">
<tbody>
${rows}
</tbody>
</table>`;
}

export function renderItemsTable(items: ItemRow[]): string {
  const rows = items
    .map(
      (item) => `<tr data-item="${escapeHtml(item.item_id)}">
  <td><a href="#" class="open-item">${escapeHtml(item.title)}</a> <small>${escapeHtml(item.version_label)}</small></td>
  <td>${badge(item.pdc_status)}</td>
  <td>${badge(item.observations_status)}</td>
  <td>${badge(item.item_status)}</td>
</tr>`,
    )
    .join("\n");
  return `<table class="items">
<thead><tr><th>Configuration item</th><th>Checklist</th><th>Observations</th><th>Item</th></tr></thead>
<tbody>
${rows}
</tbody>
</table>`;
}

export function renderObservationPanel(
  detail: ItemDetail,
  caps: { open: boolean; resolve: boolean; close: boolean; reopen: boolean },
  drafts: Map<string, string>,
  inlineError: string | null,
): string {
  const rows = detail.observations
    .map((obs) => {
      const draft = drafts.get(obs.observation_id) ?? "";
      const controls: string[] = [];
      if (obs.state === "Open" && caps.resolve) controls.push(`<button class="transition" data-to="Resolved">Resolve</button>`);
      if (obs.state === "Resolved" && caps.close) controls.push(`<button class="transition" data-to="Closed">Close</button>`);
      if (obs.state === "Resolved" && caps.reopen) controls.push(`<button class="transition" data-to="Open">Reopen</button>`);
      const history = obs.transitions
        .map((t) => `<li>${escapeHtml(t.from_state)} to ${escapeHtml(t.to_state)} by ${escapeHtml(t.actor)}: ${escapeHtml(t.comment)}</li>`)
        .join("");
      return `<div class="observation" data-observation="${escapeHtml(obs.observation_id)}">
  <div>${escapeHtml(obs.observation_id)} ${badge(obs.state === "Closed" ? "Completed" : "Pending")} <em>${escapeHtml(obs.state)}</em></div>
  <p>${escapeHtml(obs.text)}</p>
  <ul class="history">${history}</ul>
  <input type="text" class="comment" value="${escapeHtml(draft)}" placeholder="comment">
  ${controls.join(" ")}
</div>`;
    })
    .join("\n");
  const openControl = caps.open
    ? `<div class="open-observation"><input type="text" class="new-observation-text" placeholder="describe the non-conformity"><button class="open-observation-btn">Open observation</button></div>`
    : "";
  const error = inlineError ? `<div class="inline-error">${escapeHtml(inlineError)}</div>` : "";
  return `<h3>${escapeHtml(detail.item.title)} observations</h3>
${error}
${rows || '<p class="empty">No observations recorded.</p>'}
${openControl}`;
}

export function renderChart(bars: ChartBar[]): string {
  const max = Math.max(1, ...bars.map((bar) => bar.opened));
  const rows = bars
    .map((bar) => {
      const width = (bar.opened / max) * 100;
      return `<div class="chart-row" data-process="${escapeHtml(bar.processId)}">
  <span class="chart-label">${escapeHtml(bar.processId)}</span>
  <div class="chart-bar" style="width:${width.toFixed(2)}%"></div>
  <span class="chart-value" data-opened="${bar.opened}" data-still-open="${bar.stillOpen}">${bar.opened} opened / ${bar.stillOpen} open</span>
</div>`;
    })
    .join("\n");
  return `<h3>Non-conformities by process</h3>
<div class="chart">
${rows}
</div>`;
}

export function renderReadOnlyBanner(): string {
  return `<div class="banner read-only">Read-only access: this session sees project status only.</div>`;
}
