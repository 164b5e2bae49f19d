/**
 * Client-side mirror of the server's lacuna markup grammar.
 *
 * `[...]` = blank gap (one dot per missing character), `[abc]` = scholar's
 * reconstruction, combining dot below (U+0323) = damaged-but-read character.
 * Error codes use the same names the service returns in ApiError bodies, so
 * the editor can reject exactly what the service would reject.
 */

export const UNDERDOT = "̣";

export type SegmentKind = "visible" | "blank" | "reconstructed" | "damaged";

export interface Segment {
  kind: SegmentKind;
  text: string; // empty for blank gaps
  length: number;
}

export interface GapSpan {
  start: number; // logical character offset
  length: number;
}

export type MarkupErrorCode =
  | "UnbalancedBrackets"
  | "MixedBracketContent"
  | "EmptyBrackets"
  | "MarkupError";

export type ParseResult =
  | { ok: true; segments: Segment[]; gaps: GapSpan[]; logicalLength: number }
  | { ok: false; code: MarkupErrorCode; message: string };

function err(code: MarkupErrorCode, message: string): ParseResult {
  return { ok: false, code, message };
}

export function parseMarkup(raw: string): ParseResult {
  const line = raw.toLowerCase();
  const segments: Segment[] = [];
  let buf = "";
  let bracket: string | null = null;

  const emit = (seg: Segment) => {
    const last = segments[segments.length - 1];
    if (seg.kind === "visible" && last && last.kind === "visible") {
      last.text += seg.text;
      last.length += seg.length;
    } else {
      segments.push(seg);
    }
  };
  const flush = () => {
    if (buf) {
      emit({ kind: "visible", text: buf, length: buf.length });
      buf = "";
    }
  };

  for (const ch of line) {
    if (ch === "[") {
      if (bracket !== null) return err("UnbalancedBrackets", "nested '[' inside brackets");
      flush();
      bracket = "";
    } else if (ch === "]") {
      if (bracket === null) return err("UnbalancedBrackets", "']' with no matching '['");
      if (!bracket.length) return err("EmptyBrackets", "empty brackets");
      if (bracket.includes(UNDERDOT)) {
        return err("MixedBracketContent", "combining underdot inside brackets");
      }
      const dots = (bracket.match(/\./g) ?? []).length;
      if (dots === bracket.length) {
        emit({ kind: "blank", text: "", length: dots });
      } else if (dots === 0) {
        emit({ kind: "reconstructed", text: bracket, length: bracket.length });
      } else {
        return err("MixedBracketContent", `brackets mix dots and letters: [${bracket}]`);
      }
      bracket = null;
    } else if (ch === UNDERDOT) {
      if (bracket !== null) return err("MixedBracketContent", "combining underdot inside brackets");
      if (!buf) return err("MarkupError", "combining underdot with no base character");
      const base = buf.slice(-1);
      buf = buf.slice(0, -1);
      flush();
      emit({ kind: "damaged", text: base, length: 1 });
    } else if (bracket !== null) {
      bracket += ch;
    } else {
      buf += ch;
    }
  }
  if (bracket !== null) return err("UnbalancedBrackets", "unclosed '['");
  flush();

  const gaps: GapSpan[] = [];
  let pos = 0;
  for (const seg of segments) {
    if (seg.kind === "blank") gaps.push({ start: pos, length: seg.length });
    pos += seg.length;
  }
  return { ok: true, segments, gaps, logicalLength: pos };
}

/** Text as sent to the service: lowercased, underdots stripped. */
export function submitText(raw: string): string {
  return raw.toLowerCase().split(UNDERDOT).join("");
}
