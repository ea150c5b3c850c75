// Verdict submission with optimistic update, rollback, and idempotent retry.

import { ApiClient, ApiError, newEventId } from "./api.js";
import type { CurationItem, ItemStatus } from "./types.js";

export interface SubmissionOutcome {
  ok: boolean;
  item?: CurationItem;
  validationMessage?: string; // 422 from the server
  networkFailure?: boolean;   // retryable with the same event id
}

/** One verdict attempt.  The event id is generated when the submission is
 * created and reused on every retry, so a response lost on the wire can be
 * retried without double-recording the verdict. */
export class VerdictSubmission {
  readonly eventId: string;
  private settled = false;

  constructor(
    private api: ApiClient,
    readonly extractionId: string,
    readonly verdict: "accept" | "correct",
    readonly correctedLabel?: string,
  ) {
    this.eventId = newEventId();
  }

  async send(): Promise<SubmissionOutcome> {
    if (this.settled) throw new Error("submission already settled");
    try {
      const item = await this.api.submitVerdict(
        this.extractionId, this.eventId, this.verdict, this.correctedLabel);
      this.settled = true;
      return { ok: true, item };
    } catch (err) {
      if (err instanceof ApiError) {
        this.settled = true; // server answered; retrying would repeat the mistake
        return { ok: false, validationMessage: err.message };
      }
      return { ok: false, networkFailure: true };
    }
  }
}

/** Optimistic queue-row state: apply locally, roll back on failure. */
export class OptimisticItem {
  private before: { status: ItemStatus; corrected: string | null };

  constructor(public item: CurationItem) {
    this.before = { status: item.status, corrected: item.corrected_class };
  }

  apply(verdict: "accept" | "correct", correctedLabel?: string): void {
    this.item.status = verdict === "accept" ? "accepted" : "corrected";
    this.item.corrected_class = verdict === "correct" ? (correctedLabel ?? null) : null;
  }

  rollback(): void {
    this.item.status = this.before.status;
    this.item.corrected_class = this.before.corrected;
  }

  confirm(server: CurationItem): void {
    Object.assign(this.item, server);
  }
}
