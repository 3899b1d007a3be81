/**
 * Review session controller: task queue, span selection, submissions, and
 * the live agreement snapshot. Pure state transitions over the ApiClient;
 * the DOM layer subscribes via onChange and re-renders.
 */
import { ApiError } from "./api.js";
import { validateMarkdown } from "./markup.js";
import { selectionToSpans, tokenizeForSelection } from "./selection.js";
export class ReviewController {
    api;
    tasks = [];
    current = null;
    currentIndex = -1;
    annotatorId = "";
    selectedTokens = new Map(); // keyed by token start
    edit = null;
    agreement = null;
    statusLine = "";
    offline = false;
    onChange = null;
    constructor(api) {
        this.api = api;
        api.onQueueChange = (pending) => {
            this.offline = pending > 0;
            this.notify();
        };
    }
    notify() {
        this.onChange?.();
    }
    async load() {
        this.tasks = (await this.api.listSamples()).samples;
        await this.refreshAgreement();
        if (this.tasks.length > 0) {
            await this.open(this.firstPendingIndex());
        }
        else {
            this.notify();
        }
    }
    firstPendingIndex() {
        const pending = this.tasks.findIndex((t) => t.status === "pending");
        return pending === -1 ? 0 : pending;
    }
    async open(index) {
        if (this.tasks.length === 0)
            return;
        const clamped = Math.min(Math.max(index, 0), this.tasks.length - 1);
        this.currentIndex = clamped;
        this.current = await this.api.getSample(this.tasks[clamped].id);
        this.selectedTokens.clear();
        this.edit = null;
        this.statusLine = "";
        this.notify();
    }
    async openNext() {
        await this.open(this.currentIndex + 1);
    }
    async openPrevious() {
        await this.open(this.currentIndex - 1);
    }
    /** Advance to the next task still awaiting a decision, if any. */
    async advanceToPending() {
        for (let step = 1; step <= this.tasks.length; step += 1) {
            const idx = (this.currentIndex + step) % this.tasks.length;
            if (this.tasks[idx].status === "pending") {
                await this.open(idx);
                return;
            }
        }
        this.notify();
    }
    targetTokens() {
        const plain = this.current?.tgt_plain;
        return plain ? tokenizeForSelection(plain) : [];
    }
    toggleToken(token) {
        if (!token.selectable)
            return;
        if (this.selectedTokens.has(token.start)) {
            this.selectedTokens.delete(token.start);
        }
        else {
            this.selectedTokens.set(token.start, token);
        }
        this.notify();
    }
    requireAnnotator() {
        if (this.annotatorId.trim() === "") {
            this.statusLine = "set an annotator id first";
            this.notify();
            return false;
        }
        return true;
    }
    async refreshTask() {
        if (!this.current)
            return;
        const id = this.current.id;
        this.current = await this.api.getSample(id);
        const summary = this.tasks[this.currentIndex];
        if (summary && summary.id === id) {
            summary.status = this.current.status;
            summary.annotation_count = this.current.annotations.length;
        }
    }
    /** Submit the currently selected tokens as the emphasized spans. */
    async submitSpans() {
        if (!this.current || !this.requireAnnotator())
            return;
        const spans = selectionToSpans(this.selectedTokens.values());
        if (spans.length === 0) {
            this.statusLine = "select at least one token, or use 'no emphasis'";
            this.notify();
            return;
        }
        await this.submitAnnotationPayload({ spans });
    }
    /** Explicit empty-span annotation: the target carries no emphasis. */
    async submitNoEmphasis() {
        if (!this.current || !this.requireAnnotator())
            return;
        await this.submitAnnotationPayload({ spans: [] });
    }
    async submitVerdict(verdict) {
        if (!this.current || !this.requireAnnotator())
            return;
        await this.submitAnnotationPayload({ verdict });
    }
    async submitAnnotationPayload(payload) {
        if (!this.current)
            return;
        const acknowledged = await this.api.submitAnnotation(this.current.id, this.annotatorId.trim(), payload);
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
    startEdit() {
        if (!this.current)
            return;
        this.edit = { text: this.current.tgt_text ?? "", violations: [] };
        this.notify();
    }
    /** Live client-side validation; submission stays blocked while violations exist. */
    updateEdit(text) {
        if (!this.edit)
            return;
        this.edit = { text, violations: validateMarkdown(text) };
        this.notify();
    }
    cancelEdit() {
        this.edit = null;
        this.notify();
    }
    async decide(decision) {
        if (!this.current)
            return;
        let tgtText;
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
        }
        catch (error) {
            if (error instanceof ApiError) {
                if (this.edit)
                    this.edit.violations = error.violations;
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
    async refreshAgreement() {
        this.agreement = await this.api.getAgreement();
    }
    async exportFiles() {
        const paths = await this.api.exportFiles();
        this.statusLine = `exported: ${paths.benchmark}`;
        this.notify();
    }
    async flushQueue() {
        const remaining = await this.api.flushQueue();
        this.offline = remaining > 0;
        this.statusLine = remaining > 0 ? `${remaining} submissions still unsent` : "queue flushed";
        await this.refreshTask();
        await this.refreshAgreement();
        this.notify();
    }
}
