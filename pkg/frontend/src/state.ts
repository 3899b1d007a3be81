/**
 * Review session controller: task queue, span selection, submissions, and
 * the live agreement snapshot. Pure state transitions over the ApiClient;
 * the DOM layer subscribes via onChange and re-renders.
 */

import { ApiClient, ApiError } from "./api.js";
import { validateMarkdown } from "./markup.js";
import { selectionToSpans, tokenizeForSelection, type SelectableToken } from "./selection.js";
import type {
  AgreementReport,
  Decision,
  MarkupViolation,
  TaskSummary,
  TaskView,
  Verdict,
} from "./types.js";

export interface EditState {
  text: string;
  violations: MarkupViolation[];
}

export class ReviewController {
  tasks: TaskSummary[] = [];
  current: TaskView | null = null;
  currentIndex = -1;
  annotatorId = "";
  selectedTokens = new Map<number, SelectableToken>(); // keyed by token start
  edit: EditState | null = null;
  agreement: AgreementReport | null = null;
  statusLine = "";
  offline = false;

  onChange: (() => void) | null = null;

  constructor(readonly api: ApiClient) {
    api.onQueueChange = (pending) => {
      this.offline = pending > 0;
      this.notify();
    };
  }

  private notify(): void {
    this.onChange?.();
  }

  async load(): Promise<void> {
    this.tasks = (await this.api.listSamples()).samples;
    await this.refreshAgreement();
    if (this.tasks.length > 0) {
      await this.open(this.firstPendingIndex());
    } else {
      this.notify();
    }
  }

  private firstPendingIndex(): number {
    const pending = this.tasks.findIndex((t) => t.status === "pending");
    return pending === -1 ? 0 : pending;
  }

  async open(index: number): Promise<void> {
    if (this.tasks.length === 0) return;
    const clamped = Math.min(Math.max(index, 0), this.tasks.length - 1);
    this.currentIndex = clamped;
    this.current = await this.api.getSample(this.tasks[clamped].id);
    this.selectedTokens.clear();
    this.edit = null;
    this.statusLine = "";
    this.notify();
  }

  async openNext(): Promise<void> {
    await this.open(this.currentIndex + 1);
  }

  async openPrevious(): Promise<void> {
    await this.open(this.currentIndex - 1);
  }

  /** Advance to the next task still awaiting a decision, if any. */
  async advanceToPending(): Promise<void> {
    for (let step = 1; step <= this.tasks.length; step += 1) {
      const idx = (this.currentIndex + step) % this.tasks.length;
      if (this.tasks[idx].status === "pending") {
        await this.open(idx);
        return;
      }
    }
    this.notify();
  }

  targetTokens(): SelectableToken[] {
    const plain = this.current?.tgt_plain;
    return plain ? tokenizeForSelection(plain) : [];
  }

  toggleToken(token: SelectableToken): void {
    if (!token.selectable) return;
    if (this.selectedTokens.has(token.start)) {
      this.selectedTokens.delete(token.start);
    } else {
      this.selectedTokens.set(token.start, token);
    }
    this.notify();
  }

  private requireAnnotator(): boolean {
    if (this.annotatorId.trim() === "") {
      this.statusLine = "set an annotator id first";
      this.notify();
      return false;
    }
    return true;
  }

  private async refreshTask(): Promise<void> {
    if (!this.current) return;
    const id = this.current.id;
    this.current = await this.api.getSample(id);
    const summary = this.tasks[this.currentIndex];
    if (summary && summary.id === id) {
      summary.status = this.current.status;
      summary.annotation_count = this.current.annotations.length;
    }
  }

  /** Submit the currently selected tokens as the emphasized spans. */
  async submitSpans(): Promise<void> {
    if (!this.current || !this.requireAnnotator()) return;
    const spans = selectionToSpans(this.selectedTokens.values());
    if (spans.length === 0) {
      this.statusLine = "select at least one token, or use 'no emphasis'";
      this.notify();
      return;
    }
    await this.submitAnnotationPayload({ spans });
  }

  /** Explicit empty-span annotation: the target carries no emphasis. */
  async submitNoEmphasis(): Promise<void> {
    if (!this.current || !this.requireAnnotator()) return;
    await this.submitAnnotationPayload({ spans: [] });
  }

  async submitVerdict(verdict: Verdict): Promise<void> {
    if (!this.current || !this.requireAnnotator()) return;
    await this.submitAnnotationPayload({ verdict });
  }

  private async submitAnnotationPayload(
    payload: Parameters<ApiClient["submitAnnotation"]>[2],
  ): Promise<void> {
    if (!this.current) return;
    const acknowledged = await this.api.submitAnnotation(
      this.current.id,
      this.annotatorId.trim(),
      payload,
    );
    if (acknowledged === null) {
      this.statusLine = "offline: annotation queued, flagged unsent";
      this.notify();
      return;
    }
    this.selectedTokens.clear();
    await this.refreshTask();
    await this.refreshAgreement();
    this.statusLine = "annotation saved";
    this.notify();
  }

  startEdit(): void {
    if (!this.current) return;
    this.edit = { text: this.current.tgt_text ?? "", violations: [] };
    this.notify();
  }

  /** Live client-side validation; submission stays blocked while violations exist. */
  updateEdit(text: string): void {
    if (!this.edit) return;
    this.edit = { text, violations: validateMarkdown(text) };
    this.notify();
  }

  cancelEdit(): void {
    this.edit = null;
    this.notify();
  }

  async decide(decision: Decision): Promise<void> {
    if (!this.current) return;
    let tgtText: string | undefined;
    if (decision === "edit") {
      if (!this.edit) {
        this.startEdit();
        return;
      }
      if (this.edit.violations.length > 0) {
        this.statusLine = "fix markup violations before submitting the edit";
        this.notify();
        return;
      }
      tgtText = this.edit.text;
    }
    try {
      const acknowledged = await this.api.submitDecision(this.current.id, decision, tgtText);
      if (acknowledged === null) {
        this.statusLine = "offline: decision queued, flagged unsent";
        this.notify();
        return;
      }
    } catch (error) {
      if (error instanceof ApiError) {
        if (this.edit) this.edit.violations = error.violations as MarkupViolation[];
        this.statusLine = `rejected: ${error.message}`;
        this.notify();
        return;
      }
      throw error;
    }
    this.edit = null;
    await this.refreshTask();
    this.statusLine = `decision recorded: ${decision}`;
    await this.advanceToPending();
  }

  async refreshAgreement(): Promise<void> {
    this.agreement = await this.api.getAgreement();
  }

  async exportFiles(): Promise<void> {
    const paths = await this.api.exportFiles();
    this.statusLine = `exported: ${paths.benchmark}`;
    this.notify();
  }

  async flushQueue(): Promise<void> {
    const remaining = await this.api.flushQueue();
    this.offline = remaining > 0;
    this.statusLine = remaining > 0 ? `${remaining} submissions still unsent` : "queue flushed";
    await this.refreshTask();
    await this.refreshAgreement();
    this.notify();
  }
}
