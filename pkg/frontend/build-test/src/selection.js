/**
 * Span selection over plain target text.
 *
 * Annotators click tokens rather than dragging ranges: CJK text exposes one
 * token per character, everything else snaps to whole whitespace-delimited
 * words. Offsets count Unicode code points to match the backend.
 */
const CJK_RANGES = [
    [0x2e80, 0x2eff], // radicals
    [0x3000, 0x303f], // CJK punctuation
    [0x3040, 0x30ff], // kana
    [0x3400, 0x4dbf],
    [0x4e00, 0x9fff],
    [0xf900, 0xfaff],
    [0xff00, 0xffef], // fullwidth forms
];
export function isCjk(char) {
    const cp = char.codePointAt(0);
    if (cp === undefined)
        return false;
    return CJK_RANGES.some(([lo, hi]) => cp >= lo && cp <= hi);
}
/** Split plain text into clickable tokens (code-point offsets). */
export function tokenizeForSelection(plain) {
    const chars = Array.from(plain);
    const tokens = [];
    let i = 0;
    while (i < chars.length) {
        const ch = chars[i];
        if (/\s/.test(ch)) {
            let j = i;
            while (j < chars.length && /\s/.test(chars[j]))
                j += 1;
            tokens.push({ start: i, end: j, text: chars.slice(i, j).join(""), selectable: false });
            i = j;
        }
        else if (isCjk(ch)) {
            tokens.push({ start: i, end: i + 1, text: ch, selectable: true });
            i += 1;
        }
        else {
            let j = i;
            while (j < chars.length && !/\s/.test(chars[j]) && !isCjk(chars[j]))
                j += 1;
            tokens.push({ start: i, end: j, text: chars.slice(i, j).join(""), selectable: true });
            i = j;
        }
    }
    return tokens;
}
/** Merge the selected tokens into disjoint spans, fusing adjacent ones. */
export function selectionToSpans(selected) {
    const ordered = [...selected].sort((a, b) => a.start - b.start);
    const spans = [];
    for (const token of ordered) {
        const last = spans[spans.length - 1];
        if (last && token.start <= last[1]) {
            last[1] = Math.max(last[1], token.end);
        }
        else {
            spans.push([token.start, token.end]);
        }
    }
    return spans;
}
