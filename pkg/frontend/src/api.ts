import type { CurationItem, LabelSpaces, PatientPayload, QueuePage, Stats } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

export function newEventId(): string {
  // RFC4122-shaped random id; uniqueness is what the event log needs
  const bytes = new Uint8Array(16);
  crypto.getRandomValues(bytes);
  bytes[6] = (bytes[6] & 0x0f) | 0x40;
  bytes[8] = (bytes[8] & 0x3f) | 0x80;
  const hex = Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
  return `${hex.slice(0, 8)}-${hex.slice(8, 12)}-${hex.slice(12, 16)}-${hex.slice(16, 20)}-${hex.slice(20)}`;
}

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: typeof fetch = (...args) => fetch(...args),
    public reviewerId: string = "reviewer",
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(`${this.base}${path}`, {
      ...init,
      headers: {
        "Content-Type": "application/json",
        "X-Reviewer-Id": this.reviewerId,
        ...(init?.headers ?? {}),
      },
    });
    if (!resp.ok) {
      let code = "http_error";
      let message = `${resp.status}`;
      try {
        const body = await resp.json();
        code = body.code ?? code;
        message = body.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, code, message);
    }
    return resp.json() as Promise<T>;
  }

  getQueue(params: { attribute?: string; status?: string; page?: number } = {}): Promise<QueuePage> {
    const q = new URLSearchParams();
    if (params.attribute) q.set("attribute", params.attribute);
    if (params.status) q.set("status", params.status);
    if (params.page !== undefined) q.set("page", String(params.page));
    const suffix = q.toString() ? `?${q.toString()}` : "";
    return this.request<QueuePage>(`/api/queue${suffix}`);
  }

  getPatient(patientId: string): Promise<PatientPayload> {
    return this.request<PatientPayload>(`/api/patients/${encodeURIComponent(patientId)}`);
  }

  getStats(): Promise<Stats> {
    return this.request<Stats>("/api/stats");
  }

  getLabelSpaces(): Promise<LabelSpaces> {
    return this.request<LabelSpaces>("/api/labelspaces");
  }

  async getExport(): Promise<string> {
    const resp = await this.fetchFn(`${this.base}/api/export`);
    if (!resp.ok) throw new ApiError(resp.status, "http_error", `${resp.status}`);
    return resp.text();
  }

  submitVerdict(
    extractionId: string,
    eventId: string,
    verdict: "accept" | "correct",
    correctedLabel?: string,
  ): Promise<CurationItem> {
    return this.request<CurationItem>(
      `/api/extractions/${encodeURIComponent(extractionId)}/verdict`,
      {
        method: "POST",
        body: JSON.stringify({
          event_id: eventId,
          verdict,
          corrected_label: correctedLabel ?? null,
        }),
      },
    );
  }
}
