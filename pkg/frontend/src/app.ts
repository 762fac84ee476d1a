// DOM wiring for the review page: thin glue around ApiClient/ReviewSession.

import { ApiClient, ApiRequestError, HistorySummary, dataUrlToBase64 } from "./api.js";
import { ReviewSession } from "./session.js";

const api = new ApiClient();
let session = new ReviewSession(api);

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function banner(message: string, kind: "error" | "info" = "error"): void {
  const box = byId<HTMLDivElement>("banner");
  box.textContent = message;
  box.className = `banner ${kind}`;
  box.hidden = message === "";
}

function describeError(err: unknown): string {
  if (err instanceof ApiRequestError) {
    switch (err.error.code) {
      case "no_card_found":
        return `No card found on the ${err.error.side ?? "given"} side. Retake the photo.`;
      case "bad_image":
      case "bad_base64":
        return "That file is not a readable image. Choose a PNG or JPEG photo.";
      case "unknown_id":
        return "This entry no longer exists on the server. Reload the page.";
      default:
        return `Server rejected the request (${err.error.code}).`;
    }
  }
  return "Server unreachable. Check that the service is running.";
}

function readFileAsBase64(file: File): Promise<string> {
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onerror = () => reject(reader.error);
    reader.onload = () => resolve(dataUrlToBase64(String(reader.result)));
    reader.readAsDataURL(file);
  });
}

function refreshButtons(): void {
  byId<HTMLButtonElement>("fetch-btn").disabled = !session.canFetch;
  byId<HTMLButtonElement>("save-btn").disabled = !session.canSave;
}

function renderFields(): void {
  const table = byId<HTMLTableSectionElement>("fields-body");
  table.replaceChildren();
  for (const row of session.fields()) {
    const tr = document.createElement("tr");

    const name = document.createElement("td");
    name.textContent = `${row.name} (${row.side})`;

    const value = document.createElement("td");
    const input = document.createElement("input");
    input.type = "text";
    input.value = row.buffer;
    input.addEventListener("input", () => {
      session.edit(row.name, input.value);
      tr.classList.toggle("dirty", session.isDirty(row.name));
    });
    value.appendChild(input);

    const meta = document.createElement("td");
    const pct = Math.round(row.extracted.confidence * 100);
    meta.textContent = row.extracted.correction_applied
      ? `${pct}% · corrected from “${row.extracted.raw_text}”`
      : `${pct}%`;

    tr.append(name, value, meta);
    table.appendChild(tr);
  }
}

function renderHistory(entries: HistorySummary[]): void {
  const list = byId<HTMLUListElement>("history-list");
  list.replaceChildren();
  if (entries.length === 0) {
    const li = document.createElement("li");
    li.textContent = "No reviewed cards yet.";
    li.className = "empty";
    list.appendChild(li);
    return;
  }
  for (const entry of entries) {
    const li = document.createElement("li");
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = `${entry.created_at} — ${entry.status}`;
    link.addEventListener("click", async (ev) => {
      ev.preventDefault();
      await openEntry(entry.id);
    });
    li.appendChild(link);
    list.appendChild(li);
  }
}

async function openEntry(id: string): Promise<void> {
  try {
    const entry = await api.entry(id);
    const detail = byId<HTMLPreElement>("entry-detail");
    const lines: string[] = [];
    for (const side of [entry.front, entry.back]) {
      for (const [name, fv] of Object.entries(side.fields)) {
        const value = entry.edited_fields[name] ?? fv.corrected_text;
        const edited = name in entry.edited_fields ? " (edited)" : "";
        lines.push(`${name}: ${value}${edited}`);
      }
    }
    detail.textContent = lines.join("\n");
    detail.hidden = false;
  } catch (err) {
    banner(describeError(err));
  }
}

function download(filename: string, text: string): void {
  const blob = new Blob([text], { type: "text/plain;charset=utf-8" });
  const url = URL.createObjectURL(blob);
  const link = document.createElement("a");
  link.href = url;
  link.download = filename;
  link.click();
  URL.revokeObjectURL(url);
}

async function refreshHistory(): Promise<void> {
  try {
    renderHistory(await api.history());
  } catch (err) {
    banner(describeError(err));
  }
}

function bindImageInput(inputId: string, assign: (b64: string) => void): void {
  byId<HTMLInputElement>(inputId).addEventListener("change", async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    assign(await readFileAsBase64(file));
    refreshButtons();
  });
}

export function init(): void {
  bindImageInput("front-input", (b64) => session.selectFront(b64));
  bindImageInput("back-input", (b64) => session.selectBack(b64));

  byId<HTMLButtonElement>("fetch-btn").addEventListener("click", async () => {
    banner("");
    refreshButtons();
    try {
      const resp = await session.fetchExtraction();
      renderFields();
      if (resp.warnings.length > 0) {
        banner(resp.warnings.join("; "), "info");
      }
    } catch (err) {
      banner(describeError(err));
    } finally {
      refreshButtons();
    }
  });

  byId<HTMLButtonElement>("save-btn").addEventListener("click", async () => {
    banner("");
    try {
      const text = await session.save();
      download(`${session.response?.id ?? "card"}.txt`, text);
      await refreshHistory();
    } catch (err) {
      banner(describeError(err));
    } finally {
      refreshButtons();
    }
  });

  byId<HTMLButtonElement>("reset-btn").addEventListener("click", () => {
    session = new ReviewSession(api);
    byId<HTMLTableSectionElement>("fields-body").replaceChildren();
    byId<HTMLInputElement>("front-input").value = "";
    byId<HTMLInputElement>("back-input").value = "";
    banner("");
    refreshButtons();
  });

  refreshButtons();
  void refreshHistory();
}

if (typeof document !== "undefined" && document.getElementById("fetch-btn")) {
  init();
}
