// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";

import { computeFigures, renderDashboard } from "../src/dashboard.js";
import type { Stats } from "../src/types.js";

function stats(partial: Partial<Stats> = {}): Stats {
  return {
    by_status: { pending: 4, accepted: 3, corrected: 1 },
    by_attribute: {
      site: { pending: 2, accepted: 2, corrected: 1 },
      histology: { pending: 2, accepted: 1, corrected: 0 },
    },
    correction_rate: 0.25,
    reviewer_throughput: { alice: 3, bob: 1 },
    total_events: 4,
    ...partial,
  };
}

describe("computeFigures", () => {
  it("matches the stats payload exactly", () => {
    const figures = computeFigures(stats());
    expect(figures.accepted).toBe(3);
    expect(figures.corrected).toBe(1);
    expect(figures.pending).toBe(4);
    expect(figures.reviewed).toBe(4);
  });

  it("3 accepts and 1 correction give 75% acceptance", () => {
    const figures = computeFigures(stats());
    expect(figures.acceptanceRate).toBeCloseTo(0.75, 10);
    expect(figures.correctionRate).toBeCloseTo(0.25, 10);
  });

  it("zero reviews yields null rates", () => {
    const figures = computeFigures(stats({
      by_status: { pending: 8, accepted: 0, corrected: 0 },
      reviewer_throughput: {},
    }));
    expect(figures.acceptanceRate).toBeNull();
    expect(figures.reviewed).toBe(0);
  });

  it("sorts reviewers by throughput", () => {
    const figures = computeFigures(stats({ reviewer_throughput: { z: 1, a: 5 } }));
    expect(figures.reviewers[0]).toEqual({ reviewer: "a", verdicts: 5 });
  });
});

describe("renderDashboard", () => {
  it("shows the empty state with zero reviews", () => {
    const root = document.createElement("div");
    renderDashboard(root, computeFigures(stats({
      by_status: { pending: 8, accepted: 0, corrected: 0 },
    })));
    expect(root.querySelector(".empty-state")?.textContent).toContain("No reviews yet");
  });

  it("renders figures equal to the payload", () => {
    const root = document.createElement("div");
    renderDashboard(root, computeFigures(stats()));
    expect(root.textContent).toContain("4 reviewed");
    expect(root.textContent).toContain("75% acceptance");
    expect(root.textContent).toContain("alice: 3 verdicts");
    const rows = root.querySelectorAll(".dash-table tr");
    expect(rows.length).toBe(3); // header + 2 attributes
  });
});
