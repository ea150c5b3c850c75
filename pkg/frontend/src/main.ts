// Hash-routed single-page app over the curation service API.
// The service event log is the source of truth; this UI holds no state
// beyond the current session.

import { ApiClient } from "./api.js";
import { computeFigures, renderDashboard } from "./dashboard.js";
import { PatientView } from "./patientView.js";
import { OptimisticItem, VerdictSubmission } from "./verdict.js";
import type { CurationItem, LabelSpaces, QueuePage } from "./types.js";

const api = new ApiClient("", undefined, localStorage.getItem("reviewer") ?? "reviewer");
let labelSpaces: LabelSpaces = {};

function el<K extends keyof HTMLElementTagNameMap>(tag: K, cls?: string, text?: string) {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

function banner(message: string, kind: "error" | "stale" = "error"): void {
  const root = document.getElementById("banner")!;
  root.textContent = message;
  root.className = message ? `banner banner-${kind}` : "";
}

async function showQueue(root: HTMLElement, page = 0, status = "pending"): Promise<void> {
  root.textContent = "loading queue...";
  let data: QueuePage;
  try {
    data = await api.getQueue({ page, status: status || undefined });
    banner("");
  } catch {
    banner("queue unavailable — is the service running?", "stale");
    return;
  }
  root.textContent = "";
  const controls = el("div", "queue-controls");
  for (const s of ["pending", "accepted", "corrected", ""]) {
    const b = el("button", s === status ? "active" : "", s || "all");
    b.addEventListener("click", () => showQueue(root, 0, s));
    controls.appendChild(b);
  }
  controls.appendChild(el("span", "queue-total", `${data.total} items`));
  root.appendChild(controls);
  const table = el("table", "queue-table");
  const head = table.insertRow();
  for (const h of ["patient", "attribute", "prediction", "status", ""]) {
    const th = document.createElement("th");
    th.textContent = h;
    head.appendChild(th);
  }
  for (const item of data.items) {
    const tr = table.insertRow();
    tr.insertCell().textContent = item.patient_id;
    tr.insertCell().textContent = item.attribute;
    tr.insertCell().textContent =
      item.status === "corrected" ? `${item.corrected_class} (was ${item.predicted_class})`
        : item.predicted_class;
    const statusCell = tr.insertCell();
    statusCell.appendChild(el("span", `badge badge-${item.status}`, item.status));
    const open = el("button", "", "open");
    open.addEventListener("click", () => {
      location.hash = `#/patient/${item.patient_id}`;
    });
    tr.insertCell().appendChild(open);
  }
  root.appendChild(table);
  const pager = el("div", "pager");
  if (page > 0) {
    const prev = el("button", "", "prev");
    prev.addEventListener("click", () => showQueue(root, page - 1, status));
    pager.appendChild(prev);
  }
  if ((page + 1) * data.page_size < data.total) {
    const next = el("button", "", "next");
    next.addEventListener("click", () => showQueue(root, page + 1, status));
    pager.appendChild(next);
  }
  root.appendChild(pager);
}

function pickLabel(attribute: string, current: string): Promise<string | null> {
  // searchable picker scoped to the attribute's label space
  return new Promise((resolve) => {
    const overlay = el("div", "picker-overlay");
    const box = el("div", "picker");
    box.appendChild(el("h3", "", `correct ${attribute}`));
    const input = document.createElement("input");
    input.placeholder = "filter labels...";
    const list = el("ul", "picker-list");
    const codes = labelSpaces[attribute] ?? [];
    const refresh = () => {
      list.textContent = "";
      const needle = input.value.toLowerCase();
      for (const code of codes.filter((c) => c.toLowerCase().includes(needle))) {
        const li = el("li", code === current ? "current" : "", code);
        li.addEventListener("click", () => {
          document.body.removeChild(overlay);
          resolve(code);
        });
        list.appendChild(li);
      }
    };
    input.addEventListener("input", refresh);
    const cancel = el("button", "", "cancel");
    cancel.addEventListener("click", () => {
      document.body.removeChild(overlay);
      resolve(null);
    });
    box.appendChild(input);
    box.appendChild(list);
    box.appendChild(cancel);
    overlay.appendChild(box);
    document.body.appendChild(overlay);
    refresh();
    input.focus();
  });
}

async function submitWithRetry(item: CurationItem, verdict: "accept" | "correct",
                               correctedLabel?: string): Promise<void> {
  const optimistic = new OptimisticItem(item);
  optimistic.apply(verdict, correctedLabel);
  const submission = new VerdictSubmission(api, item.extraction_id, verdict, correctedLabel);
  for (let attempt = 0; attempt < 3; attempt++) {
    const outcome = await submission.send(); // event id reused on each retry
    if (outcome.ok && outcome.item) {
      optimistic.confirm(outcome.item);
      banner("");
      return;
    }
    if (outcome.validationMessage !== undefined) {
      optimistic.rollback();
      banner(outcome.validationMessage);
      return;
    }
  }
  optimistic.rollback();
  banner("network failure: verdict not recorded, try again");
}

async function showPatient(root: HTMLElement, patientId: string): Promise<void> {
  root.textContent = "loading patient...";
  try {
    const payload = await api.getPatient(patientId);
    banner("");
    root.textContent = "";
    const view = new PatientView(root, payload, {
      onVerdict: async (item, verdict) => {
        let corrected: string | undefined;
        if (verdict === "correct") {
          const picked = await pickLabel(item.attribute, item.predicted_class);
          if (!picked) return;
          corrected = picked;
        }
        await submitWithRetry(item, verdict, corrected);
        view.render();
      },
    });
    view.render();
    const first = payload.extractions[0];
    if (first) view.select(first);
  } catch (err) {
    root.textContent = "";
    banner(`patient ${patientId} unavailable: ${err}`);
  }
}

async function showDashboard(root: HTMLElement): Promise<void> {
  root.textContent = "loading stats...";
  try {
    const stats = await api.getStats();
    banner("");
    root.textContent = "";
    renderDashboard(root, computeFigures(stats));
  } catch {
    banner("stats endpoint unreachable — showing nothing", "stale");
  }
}

async function route(): Promise<void> {
  const root = document.getElementById("app")!;
  const hash = location.hash || "#/queue";
  if (hash.startsWith("#/patient/")) {
    await showPatient(root, decodeURIComponent(hash.slice("#/patient/".length)));
  } else if (hash.startsWith("#/dashboard")) {
    await showDashboard(root);
  } else {
    await showQueue(root);
  }
}

export async function start(): Promise<void> {
  try {
    labelSpaces = await api.getLabelSpaces();
  } catch {
    banner("label spaces unavailable — corrections disabled", "stale");
  }
  window.addEventListener("hashchange", route);
  document.addEventListener("keydown", (e) => {
    if (e.key === "q") location.hash = "#/queue";
    if (e.key === "d") location.hash = "#/dashboard";
  });
  await route();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void start();
}
