/**
 * Thin typed client for the review service API, with an offline queue:
 * submissions that fail at the network level are held locally, flagged
 * unsent, and can be flushed once the service is reachable again.
 */
export class ApiError extends Error {
    status;
    violations;
    constructor(status, message, violations = []) {
        super(message);
        this.status = status;
        this.violations = violations;
    }
}
export class ApiClient {
    baseUrl;
    fetchImpl;
    queue = [];
    onQueueChange = null;
    constructor(baseUrl = "", fetchImpl = (input, init) => fetch(input, init)) {
        this.baseUrl = baseUrl;
        this.fetchImpl = fetchImpl;
    }
    get pendingCount() {
        return this.queue.length;
    }
    async request(path, init) {
        const response = await this.fetchImpl(this.baseUrl + path, init);
        let body = null;
        try {
            body = await response.json();
        }
        catch {
            // non-JSON error bodies fall through with a generic message
        }
        if (!response.ok) {
            const detail = body && typeof body === "object" && "detail" in body
                ? String(body.detail)
                : `HTTP ${response.status}`;
            const violations = body && typeof body === "object" && "violations" in body
                ? (body.violations ?? [])
                : [];
            throw new ApiError(response.status, detail, violations);
        }
        return body;
    }
    /** POST JSON; network-level failures are queued for later flush. */
    async submit(path, payload) {
        try {
            return await this.request(path, {
                method: "POST",
                headers: { "Content-Type": "application/json" },
                body: JSON.stringify(payload),
            });
        }
        catch (error) {
            if (error instanceof ApiError)
                throw error; // server said no: surface it
            this.queue.push({ path, body: payload });
            this.onQueueChange?.(this.queue.length);
            return null;
        }
    }
    /** Retry every queued submission in order; stops at the first failure. */
    async flushQueue() {
        while (this.queue.length > 0) {
            const next = this.queue[0];
            try {
                await this.request(next.path, {
                    method: "POST",
                    headers: { "Content-Type": "application/json" },
                    body: JSON.stringify(next.body),
                });
            }
            catch (error) {
                if (!(error instanceof ApiError))
                    break;
                // the server rejected it outright; drop rather than retry forever
            }
            this.queue.shift();
            this.onQueueChange?.(this.queue.length);
        }
        return this.queue.length;
    }
    listSamples(status) {
        const query = status ? `?status=${status}` : "";
        return this.request(`/api/samples${query}`);
    }
    getSample(id) {
        return this.request(`/api/samples/${encodeURIComponent(id)}`);
    }
    submitAnnotation(sampleId, annotatorId, payload) {
        return this.submit(`/api/samples/${encodeURIComponent(sampleId)}/annotations`, {
            annotator_id: annotatorId,
            ...payload,
        });
    }
    submitDecision(sampleId, decision, tgtText) {
        const body = { decision };
        if (tgtText !== undefined)
            body.tgt_text = tgtText;
        return this.submit(`/api/samples/${encodeURIComponent(sampleId)}/decision`, body);
    }
    /** null means the service has no consensus/judgments yet (404/422). */
    async getAgreement() {
        try {
            return await this.request("/api/agreement");
        }
        catch (error) {
            if (error instanceof ApiError && (error.status === 404 || error.status === 422)) {
                return null;
            }
            throw error;
        }
    }
    exportFiles() {
        return this.request("/api/export", { method: "POST" });
    }
}
