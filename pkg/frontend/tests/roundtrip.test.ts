// The full review loop against the mock service: queue -> patient ->
// byte-exact highlights -> correction -> export, plus idempotent retry
// after an injected network failure.

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { computeSegments } from "../src/highlight.js";
import { spansByDocument } from "../src/patientView.js";
import { VerdictSubmission } from "../src/verdict.js";
import { MockService, makeItem } from "./mockService.js";

const DOC_TEXT = "Specimen: needle core biopsy. Microscopic examination reveals " +
  "invasive ductal carcinoma. Biopsy confirms carcinoma of the upper outer " +
  "quadrant of the left breast. Margins are free of tumor.";

function makeService(): MockService {
  const service = new MockService({
    site: ["C50.4", "C50.2", "C18.2", "not-documented"],
    histology: ["8500", "8140", "not-documented"],
  });
  const evidenceStart = DOC_TEXT.indexOf("Biopsy confirms");
  const evidenceEnd = DOC_TEXT.indexOf(" Margins");
  service.addPatient(
    "P000001",
    [{ doc_id: "P000001-d00", kind: "Pathology", date: 100, text: DOC_TEXT }],
    [
      makeItem("P000001", "site", "C50.2",
               [{ doc_id: "P000001-d00", start: evidenceStart, end: evidenceEnd, weight: 0.7 }]),
      makeItem("P000001", "histology", "8500",
               [{ doc_id: "P000001-d00", start: 30, end: 92, weight: 0.5 }]),
    ],
  );
  return service;
}

describe("queue to export round trip", () => {
  let service: MockService;
  let api: ApiClient;

  beforeEach(() => {
    service = makeService();
    api = new ApiClient("http://svc", service.fetchFn, "tester");
  });

  it("loads the queue, opens the patient, and highlights match byte-exactly", async () => {
    const queue = await api.getQueue({ status: "pending" });
    expect(queue.total).toBe(2);
    const patient = await api.getPatient(queue.items[0].patient_id);
    const siteItem = patient.extractions.find((i) => i.attribute === "site")!;
    const byDoc = spansByDocument(siteItem);
    const doc = patient.documents[0];
    const spans = byDoc.get(doc.doc_id)!;
    const { segments, skipped } = computeSegments(doc.text, spans);
    expect(skipped).toEqual([]);
    expect(segments.map((s) => s.text).join("")).toBe(doc.text);
    const highlighted = segments.find((s) => s.weight !== null)!;
    const entry = siteItem.rationale.entries[0];
    expect(highlighted.text).toBe(doc.text.slice(entry.char_start, entry.char_end));
    expect(highlighted.text.startsWith("Biopsy confirms")).toBe(true);
  });

  it("submits a correction and the export carries the corrected label", async () => {
    const submission = new VerdictSubmission(api, "P000001:site", "correct", "C50.4");
    const outcome = await submission.send();
    expect(outcome.ok).toBe(true);
    expect(outcome.item?.status).toBe("corrected");
    expect(outcome.item?.corrected_class).toBe("C50.4");
    const exported = await api.getExport();
    const rows = exported.trim().split("\n").map((l) => JSON.parse(l));
    expect(rows).toHaveLength(1);
    expect(rows[0]).toMatchObject({
      patient_id: "P000001", attribute: "site",
      final_label: "C50.4", source: "corrected",
    });
  });

  it("rejects labels outside the attribute's space without changing state", async () => {
    const submission = new VerdictSubmission(api, "P000001:site", "correct", "Z99");
    const outcome = await submission.send();
    expect(outcome.ok).toBe(false);
    expect(outcome.validationMessage).toContain("outside");
    expect(service.items.get("P000001:site")!.status).toBe("pending");
    expect(service.events).toHaveLength(0);
  });

  it("idempotent resubmit after a lost response yields exactly one server event", async () => {
    service.loseNextResponses(1); // server applies the verdict, reply is lost
    const submission = new VerdictSubmission(api, "P000001:site", "correct", "C50.4");
    const first = await submission.send();
    expect(first.ok).toBe(false);
    expect(first.networkFailure).toBe(true);
    const retry = await submission.send(); // same event id
    expect(retry.ok).toBe(true);
    expect(retry.item?.status).toBe("corrected");
    expect(service.events).toHaveLength(1);
    expect(service.events[0].event_id).toBe(submission.eventId);
  });

  it("fresh submissions use distinct event ids", async () => {
    const a = new VerdictSubmission(api, "P000001:site", "accept");
    const b = new VerdictSubmission(api, "P000001:histology", "accept");
    expect(a.eventId).not.toBe(b.eventId);
    await a.send();
    await b.send();
    expect(service.events).toHaveLength(2);
  });
});
