// Three-pane patient screen: attributes | rationale | full notes.

import { renderHighlights } from "./highlight.js";
import type { HighlightSpan } from "./highlight.js";
import type { CurationItem, PatientPayload } from "./types.js";

export interface PatientViewHooks {
  onVerdict: (item: CurationItem, verdict: "accept" | "correct") => void;
}

/** Highlight spans for one extraction's rationale, grouped by document. */
export function spansByDocument(item: CurationItem): Map<string, HighlightSpan[]> {
  const out = new Map<string, HighlightSpan[]>();
  item.rationale.entries.forEach((entry, i) => {
    const spans = out.get(entry.doc_id) ?? [];
    spans.push({
      start: entry.char_start,
      end: entry.char_end,
      weight: entry.weight,
      id: `${item.extraction_id}:${i}`,
    });
    out.set(entry.doc_id, spans);
  });
  return out;
}

export class PatientView {
  private selected: CurationItem | null = null;
  private noteElements = new Map<string, HTMLElement>();
  private warnings: string[] = [];

  constructor(
    private root: HTMLElement,
    private payload: PatientPayload,
    private hooks: PatientViewHooks,
  ) {}

  render(): void {
    this.root.textContent = "";
    const grid = document.createElement("div");
    grid.className = "patient-grid";
    grid.appendChild(this.renderAttributes());
    grid.appendChild(this.renderRationale());
    grid.appendChild(this.renderNotes());
    this.root.appendChild(grid);
    if (this.warnings.length) {
      const warn = document.createElement("div");
      warn.className = "integrity-warning";
      warn.textContent = `data integrity: ${this.warnings.length} rationale span(s) ` +
        `outside their document were skipped`;
      this.root.prepend(warn);
    }
  }

  select(item: CurationItem): void {
    this.selected = item;
    this.render();
    const first = item.rationale.entries[0];
    if (first) {
      const el = this.noteElements.get(`${item.extraction_id}:0`);
      el?.scrollIntoView({ block: "center" });
    }
  }

  private renderAttributes(): HTMLElement {
    const pane = document.createElement("section");
    pane.className = "pane attributes-pane";
    for (const item of this.payload.extractions) {
      const row = document.createElement("div");
      row.className = `attr-row status-${item.status}` +
        (this.selected?.extraction_id === item.extraction_id ? " selected" : "");
      const label = item.status === "corrected" ? item.corrected_class : item.predicted_class;
      row.textContent = `${item.attribute}: ${label}`;
      if (item.status !== "pending") {
        const badge = document.createElement("span");
        badge.className = `badge badge-${item.status}`;
        badge.textContent = item.status;
        row.appendChild(badge);
      }
      row.addEventListener("click", () => this.select(item));
      const accept = document.createElement("button");
      accept.textContent = "accept";
      accept.addEventListener("click", (e) => {
        e.stopPropagation();
        this.hooks.onVerdict(item, "accept");
      });
      const correct = document.createElement("button");
      correct.textContent = "correct";
      correct.addEventListener("click", (e) => {
        e.stopPropagation();
        this.hooks.onVerdict(item, "correct");
      });
      row.appendChild(accept);
      row.appendChild(correct);
      pane.appendChild(row);
    }
    return pane;
  }

  private renderRationale(): HTMLElement {
    const pane = document.createElement("section");
    pane.className = "pane rationale-pane";
    const item = this.selected;
    if (!item) {
      pane.textContent = "Select an attribute to see its rationale.";
      return pane;
    }
    const docs = new Map(this.payload.documents.map((d) => [d.doc_id, d]));
    item.rationale.entries.forEach((entry, i) => {
      const doc = docs.get(entry.doc_id);
      const row = document.createElement("div");
      row.className = "rationale-entry";
      const head = document.createElement("div");
      head.className = "rationale-head";
      head.textContent = `${entry.weight.toFixed(3)} — ${entry.doc_id} (day ${doc?.date ?? "?"})`;
      const snippet = document.createElement("blockquote");
      snippet.textContent = doc ? doc.text.slice(entry.char_start, entry.char_end) : "";
      row.appendChild(head);
      row.appendChild(snippet);
      row.addEventListener("click", () => {
        const el = this.noteElements.get(`${item.extraction_id}:${i}`);
        el?.scrollIntoView({ block: "center" });
      });
      pane.appendChild(row);
    });
    return pane;
  }

  private renderNotes(): HTMLElement {
    const pane = document.createElement("section");
    pane.className = "pane notes-pane";
    this.noteElements.clear();
    this.warnings = [];
    const spans = this.selected ? spansByDocument(this.selected) : new Map<string, HighlightSpan[]>();
    for (const doc of this.payload.documents) {
      const head = document.createElement("h3");
      head.textContent = `${doc.doc_id} — ${doc.kind}, day ${doc.date}`;
      pane.appendChild(head);
      const body = document.createElement("pre");
      body.className = "note-text";
      const { elements, skipped } = renderHighlights(body, doc.text, spans.get(doc.doc_id) ?? []);
      for (const [id, el] of elements) this.noteElements.set(id, el);
      for (const s of skipped) this.warnings.push(`${doc.doc_id}@${s.start}:${s.end}`);
      pane.appendChild(body);
    }
    return pane;
  }
}
