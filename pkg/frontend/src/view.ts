/**
 * DOM builders. Pure functions from data to elements; no fetching, no
 * number formatting beyond echoing service-provided tokens.
 */

import type { ModelInfo, PredictResponse } from "./api";
import type { Segment } from "./markup";
import type { HistoryStep, ModelRankResult } from "./session";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderGapPreview(segments: Segment[]): HTMLElement {
  const root = el("div", "gap-preview");
  for (const seg of segments) {
    if (seg.kind === "blank") {
      const span = el("span", "segment gap", "·".repeat(seg.length));
      span.title = `${seg.length}-character gap`;
      root.appendChild(span);
    } else if (seg.kind === "reconstructed") {
      root.appendChild(el("span", "segment reconstructed", seg.text));
    } else if (seg.kind === "damaged") {
      root.appendChild(el("span", "segment damaged", seg.text));
    } else {
      root.appendChild(el("span", "segment visible", seg.text));
    }
  }
  return root;
}

export function renderModelPicker(
  models: ModelInfo[],
  selected: string[],
  onToggle: (id: string, on: boolean) => void,
): HTMLElement {
  const root = el("div", "model-picker");
  for (const m of models) {
    const label = el("label", "model-option");
    const box = el("input");
    box.type = "checkbox";
    box.value = m.id;
    box.checked = selected.includes(m.id);
    box.addEventListener("change", () => onToggle(m.id, box.checked));
    label.appendChild(box);
    const acc = m.dev_accuracy == null ? "" : ` (dev acc ${m.dev_accuracy})`;
    label.appendChild(el("span", undefined, ` ${m.id} — ${m.masking}${acc}`));
    root.appendChild(label);
  }
  return root;
}

export function renderPredictions(modelId: string, resp: PredictResponse): HTMLElement {
  const root = el("div", "predictions");
  root.appendChild(el("h3", undefined, `${modelId}: ${resp.filled_text}`));
  for (const pos of resp.positions) {
    const table = el("table", "topk");
    const caption = el("caption", undefined, `position ${pos.index}`);
    table.appendChild(caption);
    const head = el("tr");
    head.appendChild(el("th", undefined, "char"));
    head.appendChild(el("th", undefined, "log prob"));
    table.appendChild(head);
    for (const entry of pos.top_k) {
      const row = el("tr");
      row.appendChild(el("td", undefined, entry.char));
      row.appendChild(el("td", undefined, String(entry.log_prob)));
      table.appendChild(row);
    }
    root.appendChild(table);
  }
  return root;
}

export function renderRankTable(result: ModelRankResult, stale: boolean): HTMLElement {
  const root = el("div", stale ? "rank-table stale" : "rank-table");
  root.dataset.modelId = result.modelId;
  const title = el("h3", undefined, result.modelId + (stale ? " (stale)" : ""));
  root.appendChild(title);
  if (stale) {
    root.appendChild(
      el("p", "stale-note", "query changed since this run; re-score to refresh"),
    );
  }
  const table = el("table", "ranking");
  const head = el("tr");
  head.appendChild(el("th", undefined, "rank"));
  head.appendChild(el("th", undefined, "candidate"));
  head.appendChild(el("th", undefined, "log prob"));
  table.appendChild(head);
  for (const row of result.ranked) {
    const tr = el("tr");
    tr.appendChild(el("td", "rank", String(row.rank)));
    tr.appendChild(el("td", "candidate", row.text));
    tr.appendChild(el("td", "logprob", row.logProbToken));
    table.appendChild(tr);
  }
  root.appendChild(table);
  return root;
}

export function renderCompare(
  results: ModelRankResult[],
  isStale: (modelId: string) => boolean,
): HTMLElement {
  const root = el("div", "compare-view");
  for (const result of results) {
    root.appendChild(renderRankTable(result, isStale(result.modelId)));
  }
  return root;
}

export function renderHistory(steps: readonly HistoryStep[]): HTMLElement {
  const root = el("ol", "history");
  for (const step of steps) {
    const item = el("li", "history-step");
    item.appendChild(el("code", undefined, step.text));
    item.appendChild(
      el("span", "candidates", ` [${step.candidates.join(", ")}] via ${step.modelIds.join(" + ")}`),
    );
    for (const result of step.results) {
      const summary = result.ranked
        .map((r) => `${r.rank}. ${r.text} (${r.logProbToken})`)
        .join("  ");
      item.appendChild(el("div", "history-result", `${result.modelId}: ${summary}`));
    }
    root.appendChild(item);
  }
  return root;
}
