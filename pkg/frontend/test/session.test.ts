import { describe, expect, it } from "vitest";
import type { RankResult } from "../src/api";
import { WorkbenchSession, toModelResult } from "../src/session";
import { renderHistory } from "../src/view";

function fakeResult(texts: string[]): RankResult {
  const ranked = texts.map((text, i) => ({ text, log_prob: -1.5 - i, rank: i + 1 }));
  const rawText = JSON.stringify({ ranked });
  return { body: { ranked }, rawText, logProbTokens: ranked.map((r) => String(r.log_prob)) };
}

describe("WorkbenchSession", () => {
  it("allows at most two selected models", () => {
    const s = new WorkbenchSession();
    expect(s.selectModel("a")).toBe(true);
    expect(s.selectModel("b")).toBe(true);
    expect(s.selectModel("c")).toBe(false);
    s.deselectModel("a");
    expect(s.selectModel("c")).toBe(true);
  });

  it("permits one in-flight request per model", () => {
    const s = new WorkbenchSession();
    const seq = s.beginRequest("m");
    expect(seq).toBe(1);
    expect(s.beginRequest("m")).toBeNull();
    expect(s.canSubmit("m")).toBe(false);
    s.completeRequest("m", seq!, null);
    expect(s.canSubmit("m")).toBe(true);
    expect(s.beginRequest("other")).toBe(1);
  });

  it("drops responses that arrive out of order", () => {
    const s = new WorkbenchSession();
    s.text = "a[..]b";
    s.candidates = ["cd"];
    const first = s.beginRequest("m")!;
    s.completeRequest("m", first, null); // request failed / superseded
    const second = s.beginRequest("m")!;
    const fresh = toModelResult("m", s.text, s.candidates, fakeResult(["cd"]));
    // a late response carrying the first sequence number must be ignored
    expect(s.completeRequest("m", first, fresh)).toBe(false);
    expect(s.results.get("m")).toBeUndefined();
    expect(s.completeRequest("m", second, fresh)).toBe(true);
    expect(s.results.get("m")).toBe(fresh);
  });

  it("marks results stale when the query moves on", () => {
    const s = new WorkbenchSession();
    s.text = "a[..]b";
    s.candidates = ["cd", "ef"];
    const seq = s.beginRequest("m")!;
    s.completeRequest("m", seq, toModelResult("m", s.text, s.candidates, fakeResult(["cd", "ef"])));
    expect(s.isStale("m")).toBe(false);
    s.addCandidate("gh"); // candidate added after the run
    expect(s.isStale("m")).toBe(true);
    s.removeCandidate(2);
    expect(s.isStale("m")).toBe(false);
    s.text = "x[..]y";
    expect(s.isStale("m")).toBe(true);
  });

  it("keeps history append-only and exports it", () => {
    const s = new WorkbenchSession();
    expect(JSON.parse(s.exportSession())).toEqual({ version: 1, history: [] });
    s.text = "a[..]b";
    s.candidates = ["cd"];
    const seq = s.beginRequest("m")!;
    s.completeRequest("m", seq, toModelResult("m", s.text, s.candidates, fakeResult(["cd"])));
    s.recordStep();
    s.candidates = ["ef"];
    s.recordStep();
    expect(s.historySteps.length).toBe(2);
    expect(s.historySteps[0].candidates).toEqual(["cd"]);
    expect(s.historySteps[1].candidates).toEqual(["ef"]);
  });

  it("re-imports an export into an identical rendered history", () => {
    const s = new WorkbenchSession();
    s.text = "a[..]b";
    s.candidates = ["cd", "ef"];
    const seq = s.beginRequest("m")!;
    s.completeRequest("m", seq, toModelResult("m", s.text, s.candidates, fakeResult(["cd", "ef"])));
    s.recordStep();
    const exported = s.exportSession();

    const imported = WorkbenchSession.importSession(exported);
    expect(imported.exportSession()).toBe(exported);
    const before = renderHistory(s.historySteps).innerHTML;
    const after = renderHistory(imported.historySteps).innerHTML;
    expect(after).toBe(before);
  });

  it("rejects junk on import", () => {
    expect(() => WorkbenchSession.importSession('{"version":9}')).toThrow();
  });
});
