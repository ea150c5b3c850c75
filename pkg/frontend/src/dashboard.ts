// Progress dashboard: pure aggregation over the /api/stats payload.

import type { Stats } from "./types.js";

export interface DashboardFigures {
  pending: number;
  accepted: number;
  corrected: number;
  reviewed: number;
  acceptanceRate: number | null; // null when nothing reviewed yet
  correctionRate: number | null;
  perAttribute: { attribute: string; pending: number; reviewed: number }[];
  reviewers: { reviewer: string; verdicts: number }[];
}

export function computeFigures(stats: Stats): DashboardFigures {
  const accepted = stats.by_status.accepted ?? 0;
  const corrected = stats.by_status.corrected ?? 0;
  const reviewed = accepted + corrected;
  const perAttribute = Object.entries(stats.by_attribute)
    .map(([attribute, counts]) => ({
      attribute,
      pending: counts.pending ?? 0,
      reviewed: (counts.accepted ?? 0) + (counts.corrected ?? 0),
    }))
    .sort((a, b) => a.attribute.localeCompare(b.attribute));
  const reviewers = Object.entries(stats.reviewer_throughput)
    .map(([reviewer, verdicts]) => ({ reviewer, verdicts }))
    .sort((a, b) => b.verdicts - a.verdicts || a.reviewer.localeCompare(b.reviewer));
  return {
    pending: stats.by_status.pending ?? 0,
    accepted,
    corrected,
    reviewed,
    acceptanceRate: reviewed ? accepted / reviewed : null,
    correctionRate: reviewed ? corrected / reviewed : null,
    perAttribute,
    reviewers,
  };
}

export function renderDashboard(container: HTMLElement, figures: DashboardFigures): void {
  container.textContent = "";
  const summary = document.createElement("div");
  summary.className = "dash-summary";
  if (figures.reviewed === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No reviews yet. Open the queue to start.";
    summary.appendChild(empty);
  } else {
    const line = document.createElement("p");
    const acceptance = ((figures.acceptanceRate ?? 0) * 100).toFixed(0);
    line.textContent =
      `${figures.reviewed} reviewed (${figures.accepted} accepted, ` +
      `${figures.corrected} corrected, ${acceptance}% acceptance), ` +
      `${figures.pending} pending`;
    summary.appendChild(line);
  }
  container.appendChild(summary);

  const table = document.createElement("table");
  table.className = "dash-table";
  const head = table.insertRow();
  for (const h of ["attribute", "pending", "reviewed"]) {
    const th = document.createElement("th");
    th.textContent = h;
    head.appendChild(th);
  }
  for (const row of figures.perAttribute) {
    const tr = table.insertRow();
    tr.insertCell().textContent = row.attribute;
    tr.insertCell().textContent = String(row.pending);
    tr.insertCell().textContent = String(row.reviewed);
  }
  container.appendChild(table);

  if (figures.reviewers.length) {
    const list = document.createElement("ul");
    list.className = "dash-reviewers";
    for (const r of figures.reviewers) {
      const li = document.createElement("li");
      li.textContent = `${r.reviewer}: ${r.verdicts} verdicts`;
      list.appendChild(li);
    }
    container.appendChild(list);
  }
}
