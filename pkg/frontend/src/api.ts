/**
 * Typed client for the model service (/models, /predict, /rank).
 *
 * Rank responses keep the raw body text and the lexical log-probability
 * tokens extracted from it, so the UI can display byte-for-byte what the
 * service sent rather than a re-serialized float.
 */

export interface ModelInfo {
  id: string;
  masking: string;
  config: Record<string, unknown>;
  dev_accuracy: number | null;
}

export interface TopKEntry {
  char: string;
  log_prob: number;
}

export interface PredictResponse {
  filled_text: string;
  positions: { index: number; top_k: TopKEntry[] }[];
}

export interface RankedRow {
  text: string;
  log_prob: number;
  rank: number;
}

export interface RankResponse {
  ranked: RankedRow[];
}

export interface RankResult {
  body: RankResponse;
  rawText: string;
  /** log_prob digits exactly as serialized by the service, in row order */
  logProbTokens: string[];
}

export interface ApiError {
  code: string;
  message: string;
  detail?: string;
}

export class ServiceError extends Error {
  constructor(
    public status: number,
    public body: ApiError,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

export function extractLogProbTokens(rawJson: string): string[] {
  const tokens: string[] = [];
  const pattern = /"log_prob"\s*:\s*(-?[0-9][0-9.eE+-]*)/g;
  for (const match of rawJson.matchAll(pattern)) tokens.push(match[1]);
  return tokens;
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<{ body: T; rawText: string }> {
  const resp = await fetch(base + path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const rawText = await resp.text();
  const body = JSON.parse(rawText);
  if (!resp.ok) throw new ServiceError(resp.status, body as ApiError);
  return { body: body as T, rawText };
}

export class WorkbenchApi {
  constructor(private base: string = "") {}

  async models(): Promise<ModelInfo[]> {
    return (await request<ModelInfo[]>(this.base, "/models")).body;
  }

  async predict(modelId: string, text: string, topK = 10): Promise<PredictResponse> {
    const r = await request<PredictResponse>(this.base, "/predict", {
      method: "POST",
      body: JSON.stringify({ model_id: modelId, text, top_k: topK }),
    });
    return r.body;
  }

  async rank(modelId: string, text: string, candidates: string[]): Promise<RankResult> {
    const r = await request<RankResponse>(this.base, "/rank", {
      method: "POST",
      body: JSON.stringify({ model_id: modelId, text, candidates }),
    });
    return { body: r.body, rawText: r.rawText, logProbTokens: extractLogProbTokens(r.rawText) };
  }
}
