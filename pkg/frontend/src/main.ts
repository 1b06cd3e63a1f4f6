/** Application wiring: options panel, free-text and CSV entry, result
 * rendering, decision log and export. Everything talks to the backend
 * through ApiClient only. */

import { ApiClient, type NameResult } from "./api.js";
import { BATCH_SIZE, runInBatches } from "./batching.js";
import { columnValues, parseCsv, type ParsedCsv } from "./csv.js";
import { DecisionLog } from "./decisions.js";
import { renderDetails, renderPanel } from "./dom.js";
import { toPanelModel, type CandidateView } from "./events.js";
import { parseNameList, validateNames } from "./names.js";
import {
  DEFAULT_OPTIONS,
  K_MAX,
  K_MIN,
  MODES,
  buildMapRequest,
  type Mode,
  type UiOptions,
} from "./options.js";

export interface App {
  root: HTMLElement;
  api: ApiClient;
  decisions: DecisionLog;
  options(): UiOptions;
  /** Names behind the panels currently on screen (for on-demand re-runs). */
  currentNames(): string[];
  exportCsv(): string;
}

function field(doc: Document, labelText: string, control: HTMLElement): HTMLElement {
  const wrap = doc.createElement("label");
  wrap.className = "field";
  const span = doc.createElement("span");
  span.textContent = labelText;
  wrap.appendChild(span);
  wrap.appendChild(control);
  return wrap;
}

export function createApp(doc: Document, api: ApiClient): App {
  const state = {
    options: { ...DEFAULT_OPTIONS },
    currentNames: [] as string[],
    parsedCsv: null as ParsedCsv | null,
    busy: false,
  };
  const decisions = new DecisionLog();

  const root = doc.createElement("div");
  root.className = "termmapper";

  // -- header ---------------------------------------------------------------
  const header = doc.createElement("header");
  const title = doc.createElement("h1");
  title.textContent = "termmapper review";
  const healthBadge = doc.createElement("span");
  healthBadge.id = "health";
  healthBadge.textContent = "checking...";
  header.appendChild(title);
  header.appendChild(healthBadge);
  root.appendChild(header);

  api
    .health()
    .then((health) => {
      healthBadge.textContent = health.status;
      healthBadge.className = health.status === "ok" ? "health-ok" : "health-degraded";
    })
    .catch(() => {
      healthBadge.textContent = "unreachable";
      healthBadge.className = "health-down";
    });

  // -- options --------------------------------------------------------------
  const optionsBox = doc.createElement("section");
  optionsBox.className = "options";

  const modeSelect = doc.createElement("select");
  modeSelect.id = "mode";
  for (const mode of MODES) {
    const option = doc.createElement("option");
    option.value = mode;
    option.textContent = mode;
    modeSelect.appendChild(option);
  }
  modeSelect.value = state.options.mode;
  modeSelect.addEventListener("change", () => {
    state.options.mode = modeSelect.value as Mode;
  });

  const kSlider = doc.createElement("input");
  kSlider.id = "k";
  kSlider.type = "range";
  kSlider.min = String(K_MIN);
  kSlider.max = String(K_MAX);
  kSlider.value = String(state.options.k);
  const kValue = doc.createElement("span");
  kValue.id = "k-value";
  kValue.textContent = String(state.options.k);
  kSlider.addEventListener("input", () => {
    state.options.k = Number(kSlider.value);
    kValue.textContent = kSlider.value;
  });

  const exactInput = doc.createElement("input");
  exactInput.id = "exact-threshold";
  exactInput.type = "number";
  exactInput.step = "0.01";
  exactInput.min = "0.01";
  exactInput.max = "1";
  exactInput.value = String(state.options.exactMatchThreshold);
  exactInput.addEventListener("change", () => {
    state.options.exactMatchThreshold = Number(exactInput.value);
  });

  const similarityInput = doc.createElement("input");
  similarityInput.id = "similarity-threshold";
  similarityInput.type = "number";
  similarityInput.step = "1";
  similarityInput.min = "0";
  similarityInput.max = "100";
  similarityInput.value = String(state.options.similarityThreshold);
  similarityInput.addEventListener("change", () => {
    state.options.similarityThreshold = Number(similarityInput.value);
  });

  const vocabularyInput = doc.createElement("input");
  vocabularyInput.id = "vocabulary";
  vocabularyInput.type = "text";
  vocabularyInput.value = (state.options.vocabularyFilter ?? []).join(", ");
  vocabularyInput.placeholder = "blank = all vocabularies";
  vocabularyInput.addEventListener("change", () => {
    const parts = parseNameList(vocabularyInput.value);
    state.options.vocabularyFilter = parts.length > 0 ? parts : null;
  });

  const checkboxes: [string, keyof UiOptions][] = [
    ["synonym matching", "includeSynonyms"],
    ["fetch synonyms", "fetchSynonyms"],
    ["fetch ancestors", "fetchAncestors"],
    ["fetch relationships", "fetchRelationships"],
  ];
  const checkboxControls: HTMLElement[] = [];
  for (const [label, key] of checkboxes) {
    const box = doc.createElement("input");
    box.type = "checkbox";
    box.id = key;
    box.checked = Boolean(state.options[key]);
    box.addEventListener("change", () => {
      (state.options as unknown as Record<string, boolean>)[key] = box.checked;
    });
    checkboxControls.push(field(doc, label, box));
  }

  const rerunButton = doc.createElement("button");
  rerunButton.id = "rerun";
  rerunButton.textContent = "re-run current names";
  rerunButton.disabled = true;
  rerunButton.addEventListener("click", () => {
    if (state.currentNames.length > 0) void runNames(state.currentNames, { replace: true });
  });

  optionsBox.appendChild(field(doc, "mode", modeSelect));
  const kField = field(doc, "top-k", kSlider);
  kField.appendChild(kValue);
  optionsBox.appendChild(kField);
  optionsBox.appendChild(field(doc, "exact-match threshold", exactInput));
  optionsBox.appendChild(field(doc, "similarity threshold", similarityInput));
  optionsBox.appendChild(field(doc, "vocabularies", vocabularyInput));
  for (const control of checkboxControls) optionsBox.appendChild(control);
  optionsBox.appendChild(rerunButton);
  root.appendChild(optionsBox);

  // -- free-text entry --------------------------------------------------------
  const entry = doc.createElement("section");
  entry.className = "entry";

  const namesInput = doc.createElement("textarea");
  namesInput.id = "names-input";
  namesInput.placeholder = "comma-separated informal names, e.g. Tylenol, Advil";
  const submitButton = doc.createElement("button");
  submitButton.id = "submit-names";
  submitButton.textContent = "map names";
  submitButton.disabled = true;
  const entryError = doc.createElement("p");
  entryError.id = "entry-error";
  entryError.className = "error";

  namesInput.addEventListener("input", () => {
    const names = parseNameList(namesInput.value);
    submitButton.disabled = state.busy || validateNames(names) !== null;
  });
  submitButton.addEventListener("click", () => {
    const names = parseNameList(namesInput.value);
    if (validateNames(names) === null) void runNames(names, { replace: true });
  });

  entry.appendChild(namesInput);
  entry.appendChild(submitButton);
  entry.appendChild(entryError);

  // -- CSV entry ---------------------------------------------------------------
  const csvBox = doc.createElement("div");
  csvBox.className = "csv-upload";

  const csvInput = doc.createElement("input");
  csvInput.id = "csv-file";
  csvInput.type = "file";
  csvInput.accept = ".csv,text/csv";

  const columnSelect = doc.createElement("select");
  columnSelect.id = "csv-column";
  columnSelect.hidden = true;

  const runCsvButton = doc.createElement("button");
  runCsvButton.id = "run-csv";
  runCsvButton.textContent = "map column";
  runCsvButton.hidden = true;

  const progress = doc.createElement("progress");
  progress.id = "csv-progress";
  progress.hidden = true;
  const progressText = doc.createElement("span");
  progressText.id = "csv-progress-text";

  csvInput.addEventListener("change", () => {
    const file = csvInput.files?.[0];
    if (!file) return;
    void file
      .text()
      .then((text) => {
        const parsed = parseCsv(text);
        if (parsed.rows.length === 0) {
          throw new Error("no data rows under the header");
        }
        state.parsedCsv = parsed;
        columnSelect.textContent = "";
        for (const column of state.parsedCsv.header) {
          const option = doc.createElement("option");
          option.value = column;
          option.textContent = column;
          columnSelect.appendChild(option);
        }
        columnSelect.hidden = false;
        runCsvButton.hidden = false;
        entryError.textContent = "";
      })
      .catch((problem: unknown) => {
        state.parsedCsv = null;
        columnSelect.hidden = true;
        runCsvButton.hidden = true;
        entryError.textContent = `not a usable CSV file: ${String(
          problem instanceof Error ? problem.message : problem,
        )}`;
      });
  });

  runCsvButton.addEventListener("click", () => {
    if (!state.parsedCsv || !columnSelect.value) return;
    const names = columnValues(state.parsedCsv, columnSelect.value);
    if (names.length === 0) {
      entryError.textContent = "selected column has no values";
      return;
    }
    void runCsvNames(names);
  });

  csvBox.appendChild(csvInput);
  csvBox.appendChild(columnSelect);
  csvBox.appendChild(runCsvButton);
  csvBox.appendChild(progress);
  csvBox.appendChild(progressText);
  entry.appendChild(csvBox);
  root.appendChild(entry);

  // -- decisions bar -------------------------------------------------------------
  const decisionsBar = doc.createElement("section");
  decisionsBar.className = "decisions-bar";
  const acceptedCount = doc.createElement("span");
  acceptedCount.id = "accepted-count";
  acceptedCount.textContent = "0 accepted";
  const exportButton = doc.createElement("button");
  exportButton.id = "export-decisions";
  exportButton.textContent = "export decisions CSV";
  exportButton.disabled = true;
  decisionsBar.appendChild(acceptedCount);
  decisionsBar.appendChild(exportButton);
  root.appendChild(decisionsBar);

  // -- results ---------------------------------------------------------------------
  const results = doc.createElement("section");
  results.id = "results";
  root.appendChild(results);

  function refreshDecisionsBar(): void {
    acceptedCount.textContent = `${decisions.size} accepted`;
    exportButton.disabled = decisions.size === 0;
  }

  function findPanel(name: string): HTMLElement | null {
    for (const panel of results.querySelectorAll<HTMLElement>("section.result-panel")) {
      if (panel.dataset.name === name) return panel;
    }
    return null;
  }

  const handlers = {
    onAccept(name: string, candidate: CandidateView): void {
      decisions.accept(name, candidate);
      refreshDecisionsBar();
      const panel = findPanel(name);
      if (panel) {
        for (const row of panel.querySelectorAll("tr.candidate")) {
          const accepted = row.getAttribute("data-concept-id") === String(candidate.conceptId);
          row.classList.toggle("accepted", accepted);
          const button = row.querySelector("button.accept");
          if (button) button.textContent = accepted ? "Accepted" : "Accept";
        }
      }
    },
    onExpand(candidate: CandidateView, row: HTMLTableRowElement): void {
      const existing = row.nextElementSibling;
      if (existing && existing.classList.contains("details-row")) {
        existing.remove();
        return;
      }
      void api
        .conceptDetails(candidate.conceptId, {
          synonyms: true,
          ancestors: true,
          relationships: true,
        })
        .then((details) => {
          const detailsRow = doc.createElement("tr");
          detailsRow.className = "details-row";
          const cell = doc.createElement("td");
          cell.colSpan = 6;
          cell.appendChild(renderDetails(doc, details));
          detailsRow.appendChild(cell);
          row.after(detailsRow);
        })
        .catch((problem: unknown) => {
          entryError.textContent = `detail fetch failed: ${String(problem)}`;
        });
    },
    onRetry(oldName: string, newName: string): void {
      const index = state.currentNames.indexOf(oldName);
      if (index >= 0) state.currentNames[index] = newName;
      void runSingle(newName, oldName);
    },
  };

  function appendResults(batch: NameResult[]): void {
    for (const result of batch) {
      const model = toPanelModel(result);
      const accepted = decisions.acceptedFor(model.name);
      results.appendChild(renderPanel(doc, model, handlers, accepted?.conceptId));
    }
  }

  function setBusy(busy: boolean): void {
    state.busy = busy;
    submitButton.disabled = busy || validateNames(parseNameList(namesInput.value)) !== null;
    runCsvButton.disabled = busy;
    rerunButton.disabled = busy || state.currentNames.length === 0;
  }

  async function runNames(names: string[], { replace }: { replace: boolean }): Promise<void> {
    entryError.textContent = "";
    setBusy(true);
    try {
      const request = buildMapRequest(names, state.options);
      const batch = await api.mapNames(request);
      if (replace) results.textContent = "";
      state.currentNames = [...names];
      appendResults(batch);
    } catch (problem: unknown) {
      entryError.textContent = String(problem instanceof Error ? problem.message : problem);
    } finally {
      setBusy(false);
    }
  }

  async function runSingle(name: string, replacePanelFor: string): Promise<void> {
    entryError.textContent = "";
    setBusy(true);
    try {
      const request = buildMapRequest([name], state.options);
      const batch = await api.mapNames(request);
      const old = findPanel(replacePanelFor);
      const model = toPanelModel(batch[0]!);
      const panel = renderPanel(doc, model, handlers, decisions.acceptedFor(model.name)?.conceptId);
      if (old) {
        old.replaceWith(panel);
      } else {
        results.appendChild(panel);
      }
    } catch (problem: unknown) {
      entryError.textContent = String(problem instanceof Error ? problem.message : problem);
    } finally {
      setBusy(false);
    }
  }

  async function runCsvNames(names: string[]): Promise<void> {
    entryError.textContent = "";
    setBusy(true);
    results.textContent = "";
    state.currentNames = [...names];
    progress.hidden = false;
    progress.max = names.length;
    progress.value = 0;
    progressText.textContent = `0 / ${names.length}`;
    try {
      await runInBatches(
        names,
        (batch) => api.mapNames(buildMapRequest(batch, state.options)),
        ({ done, total, batch }) => {
          progress.value = done;
          progressText.textContent = `${done} / ${total}`;
          appendResults(batch);
        },
        BATCH_SIZE,
      );
    } catch (problem: unknown) {
      entryError.textContent = String(problem instanceof Error ? problem.message : problem);
    } finally {
      setBusy(false);
    }
  }

  function exportCsv(): string {
    const csv = decisions.toCsv();
    // Browser download; guarded so non-browser test environments can call it.
    const view = doc.defaultView;
    if (view && typeof view.URL?.createObjectURL === "function") {
      const blob = new view.Blob([csv], { type: "text/csv" });
      const link = doc.createElement("a");
      link.href = view.URL.createObjectURL(blob);
      link.download = "decisions.csv";
      link.click();
      view.URL.revokeObjectURL(link.href);
    }
    return csv;
  }
  exportButton.addEventListener("click", () => {
    exportCsv();
  });

  return {
    root,
    api,
    decisions,
    options: () => ({ ...state.options }),
    currentNames: () => [...state.currentNames],
    exportCsv,
  };
}

/** Browser entry point; the API base URL comes from <meta name="api-base">. */
export function mount(doc: Document): App | null {
  const host = doc.getElementById("app");
  if (!host) return null;
  const base = doc.querySelector('meta[name="api-base"]')?.getAttribute("content") ?? "";
  const app = createApp(doc, new ApiClient(base));
  host.appendChild(app.root);
  return app;
}

declare const window: (Window & { __TERMMAPPER_TEST__?: boolean }) | undefined;

if (typeof window !== "undefined" && !window.__TERMMAPPER_TEST__) {
  if (window.document.readyState === "loading") {
    window.document.addEventListener("DOMContentLoaded", () => mount(window.document));
  } else {
    mount(window.document);
  }
}
