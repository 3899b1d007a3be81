/**
 * Client-side Markdown emphasis grammar, mirroring the service's validator.
 *
 * Used to block malformed edits before they reach the server and to derive
 * display spans for locally edited text. Offsets count Unicode code points
 * (the server's unit), not UTF-16 units, so CJK and emoji text agree with
 * the backend exactly. The verdicts are pinned to the shared fixture in
 * ../../tests/fixtures/markup_cases.json.
 */
/** Validate Markdown-dialect emphasis markup; empty result means well-formed. */
export function validateMarkdown(tagged) {
    return scan(Array.from(tagged)).violations;
}
/** Parse to plain text plus spans; throws Error on the first violation. */
export function parseMarkdown(tagged) {
    const { violations, plain, spans } = scan(Array.from(tagged));
    if (violations.length > 0) {
        const v = violations[0];
        throw new Error(`${v.kind}@${v.position}: ${v.message}`);
    }
    return { plain: plain.join(""), spans };
}
function scan(chars) {
    const violations = [];
    const plain = [];
    const spans = [];
    let openAt = null; // tagged offset of the opening delimiter
    let openPlain = 0;
    let i = 0;
    while (i < chars.length) {
        if (chars[i] !== "*") {
            plain.push(chars[i]);
            i += 1;
            continue;
        }
        let j = i;
        while (j < chars.length && chars[j] === "*")
            j += 1;
        const run = j - i;
        if (run === 1) {
            plain.push("*");
        }
        else if (run === 2) {
            if (openAt === null) {
                openAt = i;
                openPlain = plain.length;
            }
            else {
                const text = plain.slice(openPlain).join("");
                if (text.trim() === "") {
                    violations.push({
                        kind: "EmptySpan",
                        position: openAt,
                        message: "emphasized span is empty or whitespace-only",
                    });
                }
                else {
                    spans.push([openPlain, plain.length]);
                }
                openAt = null;
            }
        }
        else if (run % 2 === 1) {
            violations.push({
                kind: "EscapingUnsupported",
                position: i,
                message: `ambiguous run of ${run} '*' characters (no escape syntax)`,
            });
        }
        else {
            violations.push({
                kind: "EmptySpan",
                position: i,
                message: `run of ${run} '*' characters implies an empty or adjacent span`,
            });
        }
        i = j;
    }
    if (openAt !== null) {
        violations.push({
            kind: "UnbalancedDelimiter",
            position: openAt,
            message: "opening '**' is never closed",
        });
    }
    violations.sort((a, b) => a.position - b.position);
    return { violations, plain, spans };
}
