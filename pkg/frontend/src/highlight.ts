// Offset-based highlight computation. Kept DOM-free so the byte-exactness
// of spans against the source text is directly testable.

export interface HighlightSpan {
  start: number;
  end: number;
  weight: number;
  id?: string;
}

export interface Segment {
  text: string;
  weight: number | null; // null = unhighlighted
  id?: string;
}

export interface SegmentResult {
  segments: Segment[];
  skipped: HighlightSpan[]; // spans outside the document, surfaced as warnings
}

/** Split `text` into plain and highlighted segments.
 *
 * Invalid spans (outside the text, inverted) are skipped and reported, never
 * clamped: a wrong offset is a data-integrity problem the reviewer must see.
 * Overlapping spans are clipped against earlier (higher-priority) ones.
 * Concatenating the segment texts always reproduces `text` byte-exactly.
 */
export function computeSegments(text: string, spans: HighlightSpan[]): SegmentResult {
  const skipped: HighlightSpan[] = [];
  const valid: HighlightSpan[] = [];
  for (const span of spans) {
    if (span.start < 0 || span.end > text.length || span.start >= span.end) {
      skipped.push(span);
    } else {
      valid.push(span);
    }
  }
  valid.sort((a, b) => a.start - b.start || a.end - b.end);
  const clipped: HighlightSpan[] = [];
  let cursor = 0;
  for (const span of valid) {
    const start = Math.max(span.start, cursor);
    if (start >= span.end) continue; // fully covered by an earlier span
    clipped.push({ ...span, start });
    cursor = span.end;
  }
  const segments: Segment[] = [];
  let pos = 0;
  for (const span of clipped) {
    if (span.start > pos) segments.push({ text: text.slice(pos, span.start), weight: null });
    segments.push({ text: text.slice(span.start, span.end), weight: span.weight, id: span.id });
    pos = span.end;
  }
  if (pos < text.length) segments.push({ text: text.slice(pos), weight: null });
  if (text.length === 0) return { segments: [], skipped };
  return { segments, skipped };
}

/** Bucket a weight into one of four intensity classes, monotone in weight. */
export function intensityClass(weight: number, maxWeight: number): string {
  if (maxWeight <= 0) return "hl-1";
  const ratio = weight / maxWeight;
  if (ratio >= 0.85) return "hl-4";
  if (ratio >= 0.6) return "hl-3";
  if (ratio >= 0.35) return "hl-2";
  return "hl-1";
}

/** Render text with highlights into a container; returns highlight elements
 * keyed by span id for scroll-to-rationale behavior. */
export function renderHighlights(
  container: HTMLElement,
  text: string,
  spans: HighlightSpan[],
): { elements: Map<string, HTMLElement>; skipped: HighlightSpan[] } {
  const { segments, skipped } = computeSegments(text, spans);
  const maxWeight = Math.max(0, ...spans.map((s) => s.weight));
  container.textContent = "";
  const elements = new Map<string, HTMLElement>();
  for (const seg of segments) {
    if (seg.weight === null) {
      container.appendChild(document.createTextNode(seg.text));
    } else {
      const el = document.createElement("mark");
      el.textContent = seg.text;
      el.className = `hl ${intensityClass(seg.weight, maxWeight)}`;
      el.title = `attention ${seg.weight.toFixed(3)}`;
      if (seg.id) {
        el.dataset.spanId = seg.id;
        if (!elements.has(seg.id)) elements.set(seg.id, el);
      }
      container.appendChild(el);
    }
  }
  return { elements, skipped };
}
