// Browser bootstrap: login, navigation, polling. All state decisions live
// in DashboardController; this file only wires DOM events to it.

import { ApiClient } from "./api.js";
import { DashboardController, answerDraftValid, type AnswerDraft } from "./controller.js";
import {
  renderBoard,
  renderChart,
  renderChecklistForm,
  renderItemsTable,
  renderObservationPanel,
  renderReadOnlyBanner,
} from "./render.js";
import type { RoleName, Session } from "./model.js";

interface DashboardConfig {
  api_base_url: string;
  poll_interval_ms: number;
}

let controller: DashboardController | null = null;
let pollTimer: number | undefined;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node;
}

async function loadConfig(): Promise<DashboardConfig> {
  const response = await fetch("config.json");
  return (await response.json()) as DashboardConfig;
}

function renderAll(): void {
  if (controller === null) return;
  const board = el("board");
  if (controller.report !== null) {
    board.innerHTML = renderBoard(
      controller.report.project_id,
      controller.projectStatus,
      controller.boardRows(),
    );
  }
  el("chart").innerHTML = renderChart(controller.chartBars());
  const detailPane = el("detail");
  if (controller.readOnlyBanner) {
    detailPane.innerHTML = renderReadOnlyBanner();
  } else if (controller.processView !== null) {
    detailPane.innerHTML =
      renderChecklistForm(controller.processView, controller.canAnswer) +
      renderItemsTable(controller.processView.items);
  }
  const itemPane = el("item-pane");
  if (controller.itemDetail !== null) {
    itemPane.innerHTML = renderObservationPanel(
      controller.itemDetail,
      {
        open: controller.canOpenObservation,
        resolve: controller.canTransition("Open", "Resolved"),
        close: controller.canTransition("Resolved", "Closed"),
        reopen: controller.canTransition("Resolved", "Open"),
      },
      controller.drafts,
      controller.inlineError,
    );
  } else {
    itemPane.innerHTML = "";
  }
}

async function connect(event: Event): Promise<void> {
  event.preventDefault();
  const config = await loadConfig();
  const token = (el("token") as HTMLInputElement).value.trim();
  const userId = (el("user-id") as HTMLInputElement).value.trim();
  const role = (el("role") as HTMLSelectElement).value as RoleName;
  const session: Session = { baseUrl: config.api_base_url, token, userId, role };
  controller = new DashboardController(new ApiClient(session.baseUrl, session.token), session);

  await controller.loadProjects();
  const picker = el("project-picker") as HTMLSelectElement;
  picker.innerHTML = controller.projects
    .map((p) => `<option value="${p.project_id}">${p.project_id} (${p.project_status})</option>`)
    .join("");
  el("login").hidden = true;
  el("workspace").hidden = false;
  if (controller.projects.length > 0) {
    await openProject(controller.projects[0]!.project_id);
  }
  if (pollTimer !== undefined) window.clearInterval(pollTimer);
  pollTimer = window.setInterval(() => {
    void controller?.refresh().then(renderAll);
  }, config.poll_interval_ms);
}

async function openProject(projectId: string): Promise<void> {
  if (controller === null) return;
  await controller.openProject(projectId);
  renderAll();
}

function wireEvents(): void {
  el("connect-form").addEventListener("submit", (event) => void connect(event));
  (el("project-picker") as HTMLSelectElement).addEventListener("change", (event) => {
    const target = event.target as HTMLSelectElement;
    void openProject(target.value);
  });
  el("board").addEventListener("click", (event) => {
    const row = (event.target as HTMLElement).closest("tr[data-process]");
    if (row !== null && controller !== null) {
      void controller.openProcess(row.getAttribute("data-process")!).then(renderAll);
    }
  });
  el("detail").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (controller === null) return;
    if (target.classList.contains("submit-answer")) {
      const row = target.closest("tr[data-question]")!;
      const table = target.closest("table[data-checklist]")!;
      const picked = row.querySelector<HTMLInputElement>("input[type=radio]:checked");
      const justification = row.querySelector<HTMLInputElement>(".justification")!.value;
      const draft: AnswerDraft = {
        value: (picked?.value ?? "") as AnswerDraft["value"],
        justification,
      };
      if (!answerDraftValid(draft)) {
        window.alert("pick an answer; NA additionally needs a justification");
        return;
      }
      void controller
        .submitAnswer(table.getAttribute("data-checklist")!, row.getAttribute("data-question")!, draft)
        .then(renderAll);
    }
    if (target.classList.contains("open-item")) {
      event.preventDefault();
      const row = target.closest("tr[data-item]")!;
      void controller.openItem(row.getAttribute("data-item")!).then(renderAll);
    }
  });
  el("item-pane").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (controller === null || controller.itemDetail === null) return;
    if (target.classList.contains("transition")) {
      const box = target.closest("div[data-observation]")!;
      const comment = box.querySelector<HTMLInputElement>(".comment")!.value;
      void controller
        .transitionObservation(
          box.getAttribute("data-observation")!,
          target.getAttribute("data-to")!,
          comment,
        )
        .then(renderAll);
    }
    if (target.classList.contains("open-observation-btn")) {
      const text = el("item-pane").querySelector<HTMLInputElement>(".new-observation-text")!.value;
      void controller
        .openObservation(controller.itemDetail.item.item_id, text)
        .then(renderAll);
    }
  });
}

document.addEventListener("DOMContentLoaded", wireEvents);
