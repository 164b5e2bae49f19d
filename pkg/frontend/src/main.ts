import { ServiceError, WorkbenchApi } from "./api";
import { parseMarkup, submitText } from "./markup";
import { WorkbenchSession, toModelResult } from "./session";
import { validateGapText, validateQuery } from "./validate";
import {
  renderCompare,
  renderGapPreview,
  renderHistory,
  renderModelPicker,
  renderPredictions,
} from "./view";
import "./style.css";

const api = new WorkbenchApi(import.meta.env.VITE_API_BASE ?? "");
const session = new WorkbenchSession();

const $ = (id: string) => document.getElementById(id)!;

function setStatus(message: string, isError = false) {
  const node = $("status");
  node.textContent = message;
  node.className = isError ? "status error" : "status";
}

function refreshEditor() {
  const text = (
    $("gap-text") as HTMLTextAreaElement
  ).value.trim();
  session.text = submitText(text);
  const preview = $("preview");
  preview.replaceChildren();
  const parsed = parseMarkup(text);
  if (parsed.ok) {
    preview.appendChild(renderGapPreview(parsed.segments));
  }
  const verdict = validateGapText(text);
  const note = $("editor-note");
  if (!text) {
    note.textContent = "paste a manuscript line with one [...] gap";
    note.className = "hint";
  } else if (verdict.ok) {
    note.textContent = `one gap of ${verdict.gapLength} character(s)`;
    note.className = "hint ok";
  } else {
    note.textContent = `${verdict.code}: ${verdict.message}`;
    note.className = "hint error";
  }
  refreshButtons();
  refreshResults();
}

function refreshCandidates() {
  const list = $("candidate-list");
  list.replaceChildren();
  session.candidates.forEach((candidate, i) => {
    const item = document.createElement("li");
    const code = document.createElement("code");
    code.textContent = candidate;
    item.appendChild(code);
    const remove = document.createElement("button");
    remove.textContent = "remove";
    remove.addEventListener("click", () => {
      session.removeCandidate(i);
      refreshCandidates();
    });
    item.appendChild(remove);
    list.appendChild(item);
  });
  refreshButtons();
  refreshResults();
}

function refreshButtons() {
  const gapOk = validateGapText(session.text).ok;
  ($("predict-btn") as HTMLButtonElement).disabled = !gapOk || session.selectedModels.length === 0;
  const queryOk = validateQuery(session.text, session.candidates).ok;
  ($("rank-btn") as HTMLButtonElement).disabled = !queryOk || session.selectedModels.length === 0;
  const verdict = validateQuery(session.text, session.candidates);
  $("rank-note").textContent = verdict.ok ? "" : `${verdict.code}: ${verdict.message}`;
}

function refreshResults() {
  const box = $("results");
  box.replaceChildren();
  const results = session.selectedModels
    .map((id) => session.results.get(id))
    .filter((r): r is NonNullable<typeof r> => Boolean(r));
  if (results.length) {
    box.appendChild(renderCompare(results, (id) => session.isStale(id)));
  }
}

function refreshHistory() {
  const box = $("history-box");
  box.replaceChildren();
  box.appendChild(renderHistory(session.historySteps));
}

async function loadModels() {
  try {
    const models = await api.models();
    const picker = $("models");
    picker.replaceChildren();
    picker.appendChild(
      renderModelPicker(models, session.selectedModels, (id, on) => {
        if (on && !session.selectModel(id)) {
          setStatus("compare at most two models", true);
          loadModels();
          return;
        }
        if (!on) session.deselectModel(id);
        refreshButtons();
        refreshResults();
      }),
    );
  } catch (error) {
    setStatus(`cannot reach service: ${error}`, true);
  }
}

async function runPredict() {
  const box = $("prediction-box");
  box.replaceChildren();
  for (const modelId of session.selectedModels) {
    try {
      const resp = await api.predict(modelId, session.text);
      box.appendChild(renderPredictions(modelId, resp));
    } catch (error) {
      setStatus(describe(error), true);
    }
  }
}

async function runRank() {
  const text = session.text;
  const candidates = [...session.candidates];
  await Promise.all(
    session.selectedModels.map(async (modelId) => {
      const seq = session.beginRequest(modelId);
      if (seq === null) return; // one in-flight request per model
      try {
        const result = await api.rank(modelId, text, candidates);
        session.completeRequest(modelId, seq, toModelResult(modelId, text, candidates, result));
      } catch (error) {
        session.completeRequest(modelId, seq, null);
        setStatus(describe(error), true);
      }
    }),
  );
  session.recordStep();
  refreshResults();
  refreshHistory();
  setStatus("scored");
}

function describe(error: unknown): string {
  if (error instanceof ServiceError) {
    return `${error.status} ${error.body.code}: ${error.body.message}`;
  }
  return String(error);
}

function bind() {
  $("gap-text").addEventListener("input", refreshEditor);
  $("add-candidate").addEventListener("click", () => {
    const input = $("candidate-input") as HTMLInputElement;
    const value = submitText(input.value.trim());
    if (value) {
      session.addCandidate(value);
      input.value = "";
      refreshCandidates();
    }
  });
  $("predict-btn").addEventListener("click", runPredict);
  $("rank-btn").addEventListener("click", runRank);
  $("export-btn").addEventListener("click", () => {
    const blob = new Blob([session.exportSession()], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "workbench-session.json";
    link.click();
    URL.revokeObjectURL(link.href);
  });
  $("import-input").addEventListener("change", async (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      const imported = WorkbenchSession.importSession(await file.text());
      session.appendImported(imported.historySteps);
      refreshHistory();
      setStatus(`imported ${imported.historySteps.length} steps`);
    } catch (error) {
      setStatus(describe(error), true);
    }
  });
  loadModels();
  refreshEditor();
  refreshCandidates();
}

if (typeof document !== "undefined" && document.getElementById("gap-text")) {
  bind();
}
