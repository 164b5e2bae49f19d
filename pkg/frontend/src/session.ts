/**
 * Client-side workbench state: current query, per-model results with
 * staleness tracking, and an append-only history that exports/imports as
 * JSON. Request sequence numbers guard against out-of-order responses; at
 * most one request may be in flight per model.
 */

import type { RankResult } from "./api";

export interface ModelRankResult {
  modelId: string;
  forText: string;
  forCandidates: string[];
  ranked: { text: string; logProbToken: string; rank: number }[];
  rawText: string;
}

export interface HistoryStep {
  text: string;
  candidates: string[];
  modelIds: string[];
  results: ModelRankResult[];
  at: string; // ISO timestamp
}

export interface SessionExport {
  version: 1;
  history: HistoryStep[];
}

export function toModelResult(
  modelId: string,
  text: string,
  candidates: string[],
  result: RankResult,
): ModelRankResult {
  return {
    modelId,
    forText: text,
    forCandidates: [...candidates],
    ranked: result.body.ranked.map((row, i) => ({
      text: row.text,
      logProbToken: result.logProbTokens[i],
      rank: row.rank,
    })),
    rawText: result.rawText,
  };
}

export class WorkbenchSession {
  text = "";
  candidates: string[] = [];
  selectedModels: string[] = [];
  results = new Map<string, ModelRankResult>();
  private history: HistoryStep[] = [];
  private seq = new Map<string, number>();
  private inFlight = new Set<string>();

  selectModel(id: string): boolean {
    if (this.selectedModels.includes(id)) return true;
    if (this.selectedModels.length >= 2) return false; // compare at most two
    this.selectedModels.push(id);
    return true;
  }

  deselectModel(id: string): void {
    this.selectedModels = this.selectedModels.filter((m) => m !== id);
  }

  addCandidate(candidate: string): void {
    this.candidates.push(candidate);
  }

  removeCandidate(index: number): void {
    this.candidates.splice(index, 1);
  }

  /** A result is stale when the query has moved on since it was scored. */
  isStale(modelId: string): boolean {
    const result = this.results.get(modelId);
    if (!result) return false;
    return (
      result.forText !== this.text ||
      JSON.stringify(result.forCandidates) !== JSON.stringify(this.candidates)
    );
  }

  canSubmit(modelId: string): boolean {
    return !this.inFlight.has(modelId);
  }

  /** Returns the sequence number for this request, or null if one is
   * already in flight for the model. */
  beginRequest(modelId: string): number | null {
    if (this.inFlight.has(modelId)) return null;
    this.inFlight.add(modelId);
    const next = (this.seq.get(modelId) ?? 0) + 1;
    this.seq.set(modelId, next);
    return next;
  }

  /** Accepts the response only if it is the latest request for the model. */
  completeRequest(modelId: string, seq: number, result: ModelRankResult | null): boolean {
    this.inFlight.delete(modelId);
    if (seq !== this.seq.get(modelId)) return false; // stale response dropped
    if (result) this.results.set(modelId, result);
    return result !== null;
  }

  recordStep(): void {
    this.history.push({
      text: this.text,
      candidates: [...this.candidates],
      modelIds: [...this.selectedModels],
      results: [...this.results.values()],
      at: new Date().toISOString(),
    });
  }

  appendImported(steps: readonly HistoryStep[]): void {
    this.history.push(...steps);
  }

  get historySteps(): readonly HistoryStep[] {
    return this.history;
  }

  exportSession(): string {
    const payload: SessionExport = { version: 1, history: this.history };
    return JSON.stringify(payload, null, 2);
  }

  static importSession(json: string): WorkbenchSession {
    const payload = JSON.parse(json) as SessionExport;
    if (payload.version !== 1 || !Array.isArray(payload.history)) {
      throw new Error("not a workbench session export");
    }
    const session = new WorkbenchSession();
    session.history = payload.history;
    return session;
  }
}
