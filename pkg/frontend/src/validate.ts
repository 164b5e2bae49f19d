/**
 * Pre-submission validation for rank queries, check-for-check in the same
 * order as the service, so the editor disables submission for exactly the
 * inputs the service would reject with a 400 (markup and length rules;
 * vocabulary membership is only known server-side).
 */

import { parseMarkup } from "./markup";

export type RejectCode =
  | "UnbalancedBrackets"
  | "MixedBracketContent"
  | "EmptyBrackets"
  | "MarkupError"
  | "NoGapPresent"
  | "MultipleGaps"
  | "NoCandidates"
  | "DuplicateCandidate"
  | "MixedCandidateLengths"
  | "LengthMismatch";

export type Validation =
  | { ok: true; gapLength: number }
  | { ok: false; code: RejectCode; message: string };

export function validateGapText(text: string): Validation {
  const parsed = parseMarkup(text);
  if (!parsed.ok) return { ok: false, code: parsed.code, message: parsed.message };
  if (parsed.gaps.length === 0) {
    return { ok: false, code: "NoGapPresent", message: "the line needs one [...] gap" };
  }
  if (parsed.gaps.length > 1) {
    return {
      ok: false,
      code: "MultipleGaps",
      message: "ranking supports exactly one blank gap; fill or bracket the others",
    };
  }
  return { ok: true, gapLength: parsed.gaps[0].length };
}

export function validateQuery(text: string, candidates: string[]): Validation {
  const gap = validateGapText(text);
  if (!gap.ok) return gap;
  if (candidates.length === 0) {
    return { ok: false, code: "NoCandidates", message: "add at least one candidate" };
  }
  if (new Set(candidates).size !== candidates.length) {
    return { ok: false, code: "DuplicateCandidate", message: "candidates must be unique" };
  }
  const lengths = new Set(candidates.map((c) => c.length));
  if (lengths.size > 1) {
    return {
      ok: false,
      code: "MixedCandidateLengths",
      message: `all candidates must share one length; got ${[...lengths].sort().join(", ")}`,
    };
  }
  const only = candidates[0].length;
  if (only !== gap.gapLength) {
    return {
      ok: false,
      code: "LengthMismatch",
      message: `candidates have length ${only} but the gap holds ${gap.gapLength}`,
    };
  }
  return gap;
}
