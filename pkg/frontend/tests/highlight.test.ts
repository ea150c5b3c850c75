import { describe, expect, it } from "vitest";

import { computeSegments, intensityClass } from "../src/highlight.js";

describe("computeSegments", () => {
  const text = "The upper outer quadrant of the left breast shows a mass.";

  it("reproduces the source text byte-exactly", () => {
    const { segments } = computeSegments(text, [
      { start: 4, end: 24, weight: 0.6 },
      { start: 52, end: 56, weight: 0.3 },
    ]);
    expect(segments.map((s) => s.text).join("")).toBe(text);
  });

  it("places highlights at exact offsets", () => {
    const { segments } = computeSegments(text, [{ start: 4, end: 24, weight: 0.6 }]);
    const marked = segments.filter((s) => s.weight !== null);
    expect(marked).toHaveLength(1);
    expect(marked[0].text).toBe(text.slice(4, 24));
  });

  it("renders two highlights for two rationale sentences", () => {
    const { segments } = computeSegments(text, [
      { start: 0, end: 3, weight: 0.5 },
      { start: 52, end: 56, weight: 0.2 },
    ]);
    expect(segments.filter((s) => s.weight !== null)).toHaveLength(2);
  });

  it("empty rationale renders plain text without error", () => {
    const { segments, skipped } = computeSegments(text, []);
    expect(segments).toEqual([{ text, weight: null }]);
    expect(skipped).toEqual([]);
  });

  it("skips spans outside the document and reports them", () => {
    const { segments, skipped } = computeSegments(text, [
      { start: 10, end: 9999, weight: 0.9 },
      { start: -2, end: 4, weight: 0.5 },
      { start: 4, end: 24, weight: 0.6 },
    ]);
    expect(skipped).toHaveLength(2);
    expect(segments.map((s) => s.text).join("")).toBe(text);
    expect(segments.filter((s) => s.weight !== null)).toHaveLength(1);
  });

  it("clips overlapping spans while preserving the text", () => {
    const { segments } = computeSegments(text, [
      { start: 0, end: 10, weight: 0.9 },
      { start: 5, end: 15, weight: 0.4 },
    ]);
    expect(segments.map((s) => s.text).join("")).toBe(text);
    const marked = segments.filter((s) => s.weight !== null);
    expect(marked[0].text).toBe(text.slice(0, 10));
    expect(marked[1].text).toBe(text.slice(10, 15));
  });
});

describe("intensityClass", () => {
  it("is monotone in weight", () => {
    const classes = ["hl-1", "hl-2", "hl-3", "hl-4"];
    const a = classes.indexOf(intensityClass(0.3, 0.6));
    const b = classes.indexOf(intensityClass(0.6, 0.6));
    expect(b).toBeGreaterThan(a);
  });

  it("0.6 vs 0.3 yields visibly higher intensity class", () => {
    expect(intensityClass(0.6, 0.6)).toBe("hl-4");
    expect(intensityClass(0.3, 0.6)).toBe("hl-2");
  });
});
