import assert from "node:assert/strict";
import test from "node:test";
import { ApiClient } from "../src/api.js";
import { ReviewController } from "../src/state.js";
function taskView(id) {
    return {
        id,
        status: "pending",
        src_text: "**he** ran",
        tgt_text: "**他**跑了",
        candidates: [],
        judge_rationale: null,
        annotations: [],
        decision: null,
        src_plain: "he ran",
        src_spans: [[0, 2]],
        tgt_plain: "他跑了",
        tgt_spans: [[0, 1]],
    };
}
/** ApiClient over a canned in-memory service; records decision submissions. */
function fakeApi(recorded) {
    return new ApiClient("", async (input, init) => {
        const path = input.toString();
        if (init?.method === "POST") {
            recorded.push({ path, body: JSON.parse(String(init.body)) });
            return new Response(JSON.stringify({ ok: true }), { status: 200 });
        }
        if (path === "/api/samples") {
            return new Response(JSON.stringify({
                samples: [
                    { id: "s1", status: "pending", src_text: "", tgt_text: "", annotation_count: 0 },
                ],
            }), { status: 200 });
        }
        if (path === "/api/samples/s1") {
            return new Response(JSON.stringify(taskView("s1")), { status: 200 });
        }
        if (path === "/api/agreement") {
            return new Response(JSON.stringify({ detail: "no judgments" }), { status: 404 });
        }
        return new Response(JSON.stringify({ detail: "not found" }), { status: 404 });
    });
}
test("edit with malformed markup is blocked client-side", async () => {
    const recorded = [];
    const controller = new ReviewController(fakeApi(recorded));
    await controller.load();
    controller.startEdit();
    controller.updateEdit("**a");
    assert.equal(controller.edit.violations[0].kind, "UnbalancedDelimiter");
    await controller.decide("edit");
    assert.deepEqual(recorded.filter((r) => r.path.endsWith("/decision")), []);
    assert.match(controller.statusLine, /fix markup violations/);
    controller.updateEdit("**a**");
    assert.deepEqual(controller.edit.violations, []);
    await controller.decide("edit");
    const decisions = recorded.filter((r) => r.path.endsWith("/decision"));
    assert.equal(decisions.length, 1);
    assert.deepEqual(decisions[0].body, { decision: "edit", tgt_text: "**a**" });
});
test("annotation requires an annotator id", async () => {
    const recorded = [];
    const controller = new ReviewController(fakeApi(recorded));
    await controller.load();
    await controller.submitVerdict("match");
    assert.equal(recorded.length, 0);
    assert.match(controller.statusLine, /annotator id/);
});
test("network failure queues the submission and flags it unsent", async () => {
    let failing = true;
    const api = new ApiClient("", async (input, init) => {
        if (init?.method === "POST" && failing)
            throw new TypeError("fetch failed");
        if (init?.method === "POST") {
            return new Response(JSON.stringify({ ok: true }), { status: 200 });
        }
        if (input.toString() === "/api/samples") {
            return new Response(JSON.stringify({
                samples: [
                    { id: "s1", status: "pending", src_text: "", tgt_text: "", annotation_count: 0 },
                ],
            }), { status: 200 });
        }
        if (input.toString() === "/api/samples/s1") {
            return new Response(JSON.stringify(taskView("s1")), { status: 200 });
        }
        return new Response(JSON.stringify({ detail: "nope" }), { status: 404 });
    });
    const controller = new ReviewController(api);
    controller.annotatorId = "a1";
    await controller.load();
    await controller.submitVerdict("match");
    assert.equal(controller.offline, true);
    assert.equal(api.pendingCount, 1);
    assert.match(controller.statusLine, /queued.*unsent/);
    failing = false;
    await controller.flushQueue();
    assert.equal(api.pendingCount, 0);
    assert.equal(controller.offline, false);
});
