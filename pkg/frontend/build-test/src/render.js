/**
 * DOM layer: renders the whole app from controller state on every change.
 *
 * Highlighting only ever flows through parsed span offsets served by the
 * API (or computed locally by the markup parser for edit previews); raw
 * marker strings are never spliced into HTML.
 */
import { parseMarkdown } from "./markup.js";
function el(tag, className, text) {
    const node = document.createElement(tag);
    if (className)
        node.className = className;
    if (text !== undefined)
        node.textContent = text;
    return node;
}
/** Emphasized text rendered from plain + span offsets (code points). */
function highlighted(plain, spans) {
    const container = el("span", "tagged-text");
    const chars = Array.from(plain);
    let cursor = 0;
    for (const [start, end] of spans) {
        if (start > cursor) {
            container.appendChild(document.createTextNode(chars.slice(cursor, start).join("")));
        }
        container.appendChild(el("em", "emph", chars.slice(start, end).join("")));
        cursor = end;
    }
    if (cursor < chars.length) {
        container.appendChild(document.createTextNode(chars.slice(cursor).join("")));
    }
    return container;
}
function taskListItem(task, active, onOpen) {
    const item = el("li", `task ${task.status}${active ? " active" : ""}`);
    const button = el("button", "task-open", `${task.id} (${task.status})`);
    button.dataset.taskId = task.id;
    button.addEventListener("click", onOpen);
    item.appendChild(button);
    return item;
}
function dashboard(controller) {
    const panel = el("section", "dashboard");
    panel.appendChild(el("h2", undefined, "Judge vs. human agreement"));
    const report = controller.agreement;
    if (report === null) {
        panel.appendChild(el("p", "dashboard-empty", "no consensus yet"));
        return panel;
    }
    const table = el("table", "metrics");
    const head = el("tr");
    const row = el("tr");
    for (const key of ["accuracy", "precision", "recall", "f1"]) {
        head.appendChild(el("th", undefined, key));
        row.appendChild(el("td", `metric-${key}`, report[key].toFixed(3)));
    }
    table.appendChild(head);
    table.appendChild(row);
    panel.appendChild(table);
    panel.appendChild(el("p", "confusion", `tp ${report.tp} / fp ${report.fp} / fn ${report.fn} / tn ${report.tn} over ${report.resolved_samples} samples`));
    return panel;
}
function annotationPanel(controller) {
    const task = controller.current;
    const panel = el("section", "annotate");
    panel.appendChild(el("h2", undefined, "Mark emphasized spans on the target"));
    const line = el("p", "token-line");
    const selected = controller.selectedTokens;
    for (const token of controller.targetTokens()) {
        if (!token.selectable) {
            line.appendChild(document.createTextNode(token.text));
            continue;
        }
        const cell = el("button", `tok${selected.has(token.start) ? " selected" : ""}`, token.text);
        cell.dataset.start = String(token.start);
        cell.dataset.end = String(token.end);
        cell.addEventListener("click", () => controller.toggleToken(token));
        line.appendChild(cell);
    }
    panel.appendChild(line);
    const buttons = el("p", "actions");
    const submit = el("button", "submit-spans", "Submit spans (s)");
    submit.addEventListener("click", () => void controller.submitSpans());
    const noEmph = el("button", "submit-empty", "No emphasis (0)");
    noEmph.addEventListener("click", () => void controller.submitNoEmphasis());
    const match = el("button", "verdict-match", "Verdict: match (m)");
    match.addEventListener("click", () => void controller.submitVerdict("match"));
    const noMatch = el("button", "verdict-no-match", "Verdict: no match (n)");
    noMatch.addEventListener("click", () => void controller.submitVerdict("no_match"));
    for (const b of [submit, noEmph, match, noMatch])
        buttons.appendChild(b);
    panel.appendChild(buttons);
    if (task.annotations.length > 0) {
        const list = el("ul", "annotation-history");
        for (const event of task.annotations) {
            const payload = event.payload.verdict
                ? `verdict=${event.payload.verdict}`
                : `spans=${JSON.stringify(event.payload.spans)}`;
            list.appendChild(el("li", "annotation", `${event.annotator_id}: ${payload}`));
        }
        panel.appendChild(list);
    }
    return panel;
}
function decisionPanel(controller) {
    const panel = el("section", "decide");
    panel.appendChild(el("h2", undefined, "Benchmark decision"));
    const buttons = el("p", "actions");
    const accept = el("button", "decide-accept", "Accept (a)");
    accept.addEventListener("click", () => void controller.decide("accept"));
    const reject = el("button", "decide-reject", "Reject (r)");
    reject.addEventListener("click", () => void controller.decide("reject"));
    const edit = el("button", "decide-edit", "Edit target (e)");
    edit.addEventListener("click", () => {
        if (controller.edit)
            void controller.decide("edit");
        else
            controller.startEdit();
    });
    for (const b of [accept, reject, edit])
        buttons.appendChild(b);
    panel.appendChild(buttons);
    if (controller.edit) {
        const editor = el("div", "editor");
        const area = el("textarea", "edit-text");
        area.value = controller.edit.text;
        area.addEventListener("input", () => controller.updateEdit(area.value));
        editor.appendChild(area);
        const violations = el("ul", "violations");
        for (const v of controller.edit.violations) {
            violations.appendChild(el("li", "violation", `${v.kind} at ${v.position}: ${v.message}`));
        }
        editor.appendChild(violations);
        const submitEdit = el("button", "submit-edit", "Submit edit");
        submitEdit.disabled = controller.edit.violations.length > 0;
        submitEdit.addEventListener("click", () => void controller.decide("edit"));
        editor.appendChild(submitEdit);
        const preview = previewEdit(controller.edit.text);
        if (preview)
            editor.appendChild(preview);
        panel.appendChild(editor);
    }
    const decision = controller.current?.decision;
    if (decision) {
        panel.appendChild(el("p", "decision-state", `decided: ${decision.decision}`));
    }
    return panel;
}
function previewEdit(text) {
    // display flows through the parser, never through raw marker splicing
    let parsed;
    try {
        parsed = parseMarkdown(text);
    }
    catch {
        return null;
    }
    const p = el("p", "edit-preview");
    p.appendChild(document.createTextNode("preview: "));
    p.appendChild(highlighted(parsed.plain, parsed.spans));
    return p;
}
function taskPanel(controller) {
    const task = controller.current;
    const panel = el("section", "task-view");
    panel.appendChild(el("h2", undefined, `Sample ${task.id} [${task.status}]`));
    const source = el("p", "source");
    source.appendChild(el("strong", undefined, "source: "));
    if (task.src_plain !== undefined) {
        source.appendChild(highlighted(task.src_plain, task.src_spans ?? []));
    }
    panel.appendChild(source);
    if (task.src_audio) {
        const audio = el("audio", "src-audio");
        audio.controls = true;
        audio.src = task.src_audio;
        panel.appendChild(audio);
    }
    const target = el("p", "target");
    target.appendChild(el("strong", undefined, "target: "));
    if (task.tgt_plain !== undefined) {
        target.appendChild(highlighted(task.tgt_plain, task.tgt_spans ?? []));
    }
    panel.appendChild(target);
    if (task.judge_rationale) {
        panel.appendChild(el("p", "judge-rationale", `judge: ${task.judge_rationale}`));
    }
    if (task.candidates.length > 0) {
        const list = el("ul", "candidates");
        for (const candidate of task.candidates) {
            list.appendChild(el("li", `candidate${candidate.valid ? "" : " invalid"}`, `${candidate.expert_id}: ${candidate.text ?? "(transport failure)"}`));
        }
        panel.appendChild(list);
    }
    return panel;
}
/** Full re-render; cheap at desk scale and impossible to desynchronize. */
export function render(controller, root) {
    root.textContent = "";
    const header = el("header");
    header.appendChild(el("h1", undefined, "emphst review"));
    const annotator = el("input", "annotator-id");
    annotator.placeholder = "annotator id";
    annotator.value = controller.annotatorId;
    annotator.addEventListener("input", () => {
        controller.annotatorId = annotator.value;
    });
    header.appendChild(annotator);
    const exportButton = el("button", "export", "Export");
    exportButton.addEventListener("click", () => void controller.exportFiles());
    header.appendChild(exportButton);
    if (controller.offline) {
        const badge = el("span", "offline-badge", `unsent: ${controller.api.pendingCount}`);
        header.appendChild(badge);
        const flush = el("button", "flush", "Retry unsent");
        flush.addEventListener("click", () => void controller.flushQueue());
        header.appendChild(flush);
    }
    root.appendChild(header);
    if (controller.statusLine) {
        root.appendChild(el("p", "status", controller.statusLine));
    }
    const columns = el("div", "columns");
    const sidebar = el("nav", "sidebar");
    const list = el("ul", "tasks");
    controller.tasks.forEach((task, index) => {
        list.appendChild(taskListItem(task, index === controller.currentIndex, () => void controller.open(index)));
    });
    sidebar.appendChild(list);
    columns.appendChild(sidebar);
    const mainColumn = el("main", "main");
    if (controller.current) {
        mainColumn.appendChild(taskPanel(controller));
        mainColumn.appendChild(annotationPanel(controller));
        mainColumn.appendChild(decisionPanel(controller));
    }
    else {
        mainColumn.appendChild(el("p", undefined, "no tasks loaded"));
    }
    mainColumn.appendChild(dashboard(controller));
    columns.appendChild(mainColumn);
    root.appendChild(columns);
}
/** Keyboard-first flow; inactive while typing in inputs. */
export function bindHotkeys(controller, target) {
    target.addEventListener("keydown", (event) => {
        const active = target.activeElement;
        if (active instanceof HTMLInputElement ||
            active instanceof HTMLTextAreaElement) {
            return;
        }
        const key = event.key;
        switch (key) {
            case "j":
                void controller.openNext();
                break;
            case "k":
                void controller.openPrevious();
                break;
            case "s":
                void controller.submitSpans();
                break;
            case "0":
                void controller.submitNoEmphasis();
                break;
            case "m":
                void controller.submitVerdict("match");
                break;
            case "n":
                void controller.submitVerdict("no_match");
                break;
            case "a":
                void controller.decide("accept");
                break;
            case "r":
                void controller.decide("reject");
                break;
            case "e":
                if (controller.edit)
                    void controller.decide("edit");
                else
                    controller.startEdit();
                break;
            default:
                break;
        }
    });
}
