/**
 * Thin typed client for the review service API, with an offline queue:
 * submissions that fail at the network level are held locally, flagged
 * unsent, and can be flushed once the service is reachable again.
 */

import type {
  AgreementReport,
  Decision,
  AnnotationEvent,
  DecisionEvent,
  ExportedPaths,
  SpanRange,
  TaskSummary,
  TaskView,
  Verdict,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly violations: Array<{ kind: string; position: number; message: string }> = [],
  ) {
    super(message);
  }
}

interface QueuedSubmission {
  path: string;
  body: unknown;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private queue: QueuedSubmission[] = [];
  onQueueChange: ((pending: number) => void) | null = null;

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  get pendingCount(): number {
    return this.queue.length;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // non-JSON error bodies fall through with a generic message
    }
    if (!response.ok) {
      const detail =
        body && typeof body === "object" && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : `HTTP ${response.status}`;
      const violations =
        body && typeof body === "object" && "violations" in body
          ? ((body as { violations: ApiError["violations"] }).violations ?? [])
          : [];
      throw new ApiError(response.status, detail, violations);
    }
    return body as T;
  }

  /** POST JSON; network-level failures are queued for later flush. */
  private async submit<T>(path: string, payload: unknown): Promise<T | null> {
    try {
      return await this.request<T>(path, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
      });
    } catch (error) {
      if (error instanceof ApiError) throw error; // server said no: surface it
      this.queue.push({ path, body: payload });
      this.onQueueChange?.(this.queue.length);
      return null;
    }
  }

  /** Retry every queued submission in order; stops at the first failure. */
  async flushQueue(): Promise<number> {
    while (this.queue.length > 0) {
      const next = this.queue[0];
      try {
        await this.request(next.path, {
          method: "POST",
          headers: { "Content-Type": "application/json" },
          body: JSON.stringify(next.body),
        });
      } catch (error) {
        if (!(error instanceof ApiError)) break;
        // the server rejected it outright; drop rather than retry forever
      }
      this.queue.shift();
      this.onQueueChange?.(this.queue.length);
    }
    return this.queue.length;
  }

  listSamples(status?: "pending" | "done"): Promise<{ samples: TaskSummary[] }> {
    const query = status ? `?status=${status}` : "";
    return this.request(`/api/samples${query}`);
  }

  getSample(id: string): Promise<TaskView> {
    return this.request(`/api/samples/${encodeURIComponent(id)}`);
  }

  submitAnnotation(
    sampleId: string,
    annotatorId: string,
    payload: { verdict: Verdict } | { spans: SpanRange[] },
  ): Promise<AnnotationEvent | null> {
    return this.submit(`/api/samples/${encodeURIComponent(sampleId)}/annotations`, {
      annotator_id: annotatorId,
      ...payload,
    });
  }

  submitDecision(
    sampleId: string,
    decision: Decision,
    tgtText?: string,
  ): Promise<DecisionEvent | null> {
    const body: Record<string, unknown> = { decision };
    if (tgtText !== undefined) body.tgt_text = tgtText;
    return this.submit(`/api/samples/${encodeURIComponent(sampleId)}/decision`, body);
  }

  /** null means the service has no consensus/judgments yet (404/422). */
  async getAgreement(): Promise<AgreementReport | null> {
    try {
      return await this.request<AgreementReport>("/api/agreement");
    } catch (error) {
      if (error instanceof ApiError && (error.status === 404 || error.status === 422)) {
        return null;
      }
      throw error;
    }
  }

  exportFiles(): Promise<ExportedPaths> {
    return this.request("/api/export", { method: "POST" });
  }
}
