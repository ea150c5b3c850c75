// In-memory stand-in for the curation service, faithful to its contract:
// idempotent event log, label-space validation, queue/patient/stats/export.
// Supports injecting a "lost response": the server applies the event but the
// client never sees the reply.

import type { CurationItem, PatientDocument } from "../src/types.js";

interface VerdictEvent {
  event_id: string;
  kind: "verdict";
  payload: {
    extraction_id: string;
    verdict: "accept" | "correct";
    corrected_label: string | null;
    reviewer_id: string | null;
  };
  ts: number;
}

export class MockService {
  items = new Map<string, CurationItem>();
  documents = new Map<string, PatientDocument[]>();
  labelSpaces: Record<string, string[]>;
  events: VerdictEvent[] = [];
  private seen = new Set<string>();
  private loseResponses = 0;

  constructor(labelSpaces: Record<string, string[]>) {
    this.labelSpaces = labelSpaces;
  }

  addPatient(patientId: string, docs: PatientDocument[], items: CurationItem[]): void {
    this.documents.set(patientId, docs);
    for (const item of items) this.items.set(item.extraction_id, item);
  }

  /** The next n verdict responses are lost after the server applies them. */
  loseNextResponses(n: number): void {
    this.loseResponses = n;
  }

  fetchFn = async (url: string | URL | Request, init?: RequestInit): Promise<Response> => {
    const path = typeof url === "string" ? url : url.toString();
    if (path.includes("/api/labelspaces")) {
      return json(this.labelSpaces);
    }
    if (path.includes("/api/queue")) {
      const params = new URL(path, "http://x").searchParams;
      const status = params.get("status");
      const attribute = params.get("attribute");
      let rows = [...this.items.values()]
        .filter((i) => (!status || i.status === status) && (!attribute || i.attribute === attribute))
        .sort((a, b) => a.patient_id.localeCompare(b.patient_id)
          || a.attribute.localeCompare(b.attribute));
      const page = Number(params.get("page") ?? "0");
      const total = rows.length;
      rows = rows.slice(page * 50, page * 50 + 50);
      return json({ items: rows, page, page_size: 50, total });
    }
    const patientMatch = path.match(/\/api\/patients\/([^/?]+)/);
    if (patientMatch) {
      const pid = decodeURIComponent(patientMatch[1]);
      const docs = this.documents.get(pid);
      if (!docs) return json({ code: "unknown_patient", message: pid }, 404);
      const extractions = [...this.items.values()].filter((i) => i.patient_id === pid);
      return json({ patient_id: pid, documents: docs, registry: null, extractions });
    }
    const verdictMatch = path.match(/\/api\/extractions\/([^/]+)\/verdict/);
    if (verdictMatch && init?.method === "POST") {
      const extractionId = decodeURIComponent(verdictMatch[1]);
      const body = JSON.parse(String(init.body));
      const item = this.items.get(extractionId);
      if (!item) return json({ code: "unknown_extraction", message: extractionId }, 404);
      if (body.verdict === "correct") {
        const space = this.labelSpaces[item.attribute] ?? [];
        if (!body.corrected_label) {
          return json({ code: "invalid_verdict", message: "corrected_label required" }, 422);
        }
        if (!space.includes(body.corrected_label)) {
          return json({ code: "invalid_verdict",
                        message: `label ${body.corrected_label} outside space` }, 422);
        }
      } else if (body.verdict !== "accept") {
        return json({ code: "invalid_verdict", message: body.verdict }, 422);
      }
      if (!this.seen.has(body.event_id)) {
        this.seen.add(body.event_id);
        this.events.push({
          event_id: body.event_id, kind: "verdict",
          payload: {
            extraction_id: extractionId, verdict: body.verdict,
            corrected_label: body.corrected_label ?? null,
            reviewer_id: (init.headers as Record<string, string>)?.["X-Reviewer-Id"] ?? null,
          },
          ts: Date.now() / 1000,
        });
        item.status = body.verdict === "accept" ? "accepted" : "corrected";
        item.corrected_class = body.verdict === "correct" ? body.corrected_label : null;
      }
      if (this.loseResponses > 0) {
        this.loseResponses -= 1;
        throw new TypeError("network error: response lost");
      }
      return json(item);
    }
    if (path.includes("/api/stats")) {
      const by_status = { pending: 0, accepted: 0, corrected: 0 };
      const by_attribute: Record<string, { pending: number; accepted: number; corrected: number }> = {};
      for (const item of this.items.values()) {
        by_status[item.status] += 1;
        by_attribute[item.attribute] ??= { pending: 0, accepted: 0, corrected: 0 };
        by_attribute[item.attribute][item.status] += 1;
      }
      const reviewed = by_status.accepted + by_status.corrected;
      const reviewer_throughput: Record<string, number> = {};
      for (const e of this.events) {
        const r = e.payload.reviewer_id ?? "anonymous";
        reviewer_throughput[r] = (reviewer_throughput[r] ?? 0) + 1;
      }
      return json({
        by_status, by_attribute,
        correction_rate: reviewed ? by_status.corrected / reviewed : 0,
        reviewer_throughput, total_events: this.events.length,
      });
    }
    if (path.includes("/api/export")) {
      const rows = [...this.items.values()]
        .filter((i) => i.status !== "pending")
        .map((i) => JSON.stringify({
          patient_id: i.patient_id, attribute: i.attribute,
          final_label: i.status === "corrected" ? i.corrected_class : i.predicted_class,
          source: i.status,
        }));
      return new Response(rows.join("\n") + (rows.length ? "\n" : ""),
                          { status: 200, headers: { "Content-Type": "application/x-ndjson" } });
    }
    return json({ code: "not_found", message: path }, 404);
  };
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function makeItem(patientId: string, attribute: string, predicted: string,
                         rationaleSpans: { doc_id: string; start: number; end: number;
                                           weight: number }[] = []): CurationItem {
  return {
    extraction_id: `${patientId}:${attribute}`,
    patient_id: patientId,
    attribute,
    predicted_class: predicted,
    top5: [{ label: predicted, prob: 0.9 }],
    rationale: {
      k: rationaleSpans.length,
      entries: rationaleSpans.map((s, i) => ({
        doc_id: s.doc_id, sentence_index: i, char_start: s.start, char_end: s.end,
        weight: s.weight, tokens: [],
      })),
    },
    status: "pending",
    corrected_class: null,
    reviewer_id: null,
    reviewed_at: null,
  };
}
