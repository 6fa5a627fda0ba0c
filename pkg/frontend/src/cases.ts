// Case-base browser: paginated list, detail view, purge with confirmation.

import { api, ApiError } from "./api.js";
import type { AppState } from "./main.js";
import type { Store } from "./store.js";

export const PAGE_SIZE = 10;

export async function loadCasePage(store: Store<AppState>, offset: number): Promise<void> {
  try {
    const page = await api.listCases(offset, PAGE_SIZE);
    store.set({ caseList: page, caseDetail: null, casesError: null });
  } catch (err) {
    store.set({ casesError: errorText(err) });
  }
}

export async function loadCaseDetail(store: Store<AppState>, caseId: string): Promise<void> {
  try {
    const detail = await api.getCase(caseId);
    store.set({ caseDetail: detail, casesError: null });
  } catch (err) {
    store.set({ casesError: errorText(err) });
  }
}

async function purgeCase(store: Store<AppState>, caseId: string): Promise<void> {
  if (!window.confirm(`Remove case ${caseId} from the case base?`)) return;
  try {
    await api.deleteCase(caseId);
    const offset = store.get().caseList?.offset ?? 0;
    await loadCasePage(store, offset);
  } catch (err) {
    store.set({ casesError: errorText(err) });
  }
}

export function renderCases(root: HTMLElement, store: Store<AppState>): void {
  const state = store.get();
  root.innerHTML = "";
  const panel = el("section", "panel cases");
  panel.append(el("h2", "", "Case base"));

  if (state.casesError) {
    panel.append(el("p", "error", state.casesError));
  }

  if (state.caseDetail) {
    panel.append(detailView(store, state));
    root.append(panel);
    return;
  }

  const page = state.caseList;
  if (!page) {
    panel.append(el("p", "loading", "Loading cases…"));
    root.append(panel);
    void loadCasePage(store, 0);
    return;
  }

  panel.append(el("p", "case-count", `${page.total} stored case(s)`));
  const table = el("div", "case-table");
  for (const record of page.items) {
    const row = el("div", "case-row");
    row.dataset.caseId = record.id;
    const openLink = document.createElement("a");
    openLink.href = `#/cases/${encodeURIComponent(record.id)}`;
    openLink.textContent = record.id;
    openLink.className = "case-link";
    row.append(openLink);
    row.append(el("span", "case-status", record.judgment.status));
    row.append(el("span", "case-created", record.created_at));
    row.append(el("span", "case-solution", excerpt(record.solution)));
    const purgeButton = document.createElement("button");
    purgeButton.textContent = "Purge";
    purgeButton.className = "purge-button";
    purgeButton.addEventListener("click", () => void purgeCase(store, record.id));
    row.append(purgeButton);
    table.append(row);
  }
  panel.append(table);

  const nav = el("div", "page-nav");
  const prev = document.createElement("button");
  prev.id = "cases-prev";
  prev.textContent = "Previous";
  prev.disabled = page.offset === 0;
  prev.addEventListener("click", () => void loadCasePage(store, Math.max(0, page.offset - PAGE_SIZE)));
  const next = document.createElement("button");
  next.id = "cases-next";
  next.textContent = "Next";
  next.disabled = page.offset + page.items.length >= page.total;
  next.addEventListener("click", () => void loadCasePage(store, page.offset + PAGE_SIZE));
  nav.append(prev, el("span", "page-info", `${page.offset + 1}–${page.offset + page.items.length} of ${page.total}`), next);
  panel.append(nav);
  root.append(panel);
}

function detailView(store: Store<AppState>, state: AppState): HTMLElement {
  const record = state.caseDetail!;
  const view = el("div", "case-detail");
  view.dataset.caseId = record.id;

  const back = document.createElement("a");
  back.href = "#/cases";
  back.textContent = "← back to list";
  view.append(back);

  view.append(el("h3", "", record.id));
  const fields: [string, string][] = [
    ["created", record.created_at],
    ["status", record.status],
    ["judgment", `${record.judgment.status} (ratio ${record.judgment.ratio.toFixed(4)})`],
    ["developmental age", `${record.judgment.developmental_age_months.toFixed(1)} months`],
    ["width", `${record.judgment.width} (${record.judgment.width_status})`],
    ["reliability", `${record.judgment.reliability} (${record.judgment.dont_know_count} don't know)`],
    ["bone age", record.bone_age_months === null ? "not recorded" : `${record.bone_age_months} months`],
    ["revised by", record.revised_by ?? "(not revised)"],
    ["usage count", String(record.usage_count)],
    ["source", record.source_tag],
    ["sheet digest", record.sheet_digest],
  ];
  const dl = el("div", "field-list");
  for (const [label, value] of fields) {
    const row = el("div", "field-row");
    row.append(el("span", "field-label", label), el("span", "field-value", value));
    dl.append(row);
  }
  view.append(dl);

  view.append(el("h4", "", "Recommendation"));
  const solution = el("p", "case-solution-full", record.solution || "(empty)");
  solution.id = "detail-solution";
  view.append(solution);

  view.append(el("h4", "", "Feature vector"));
  const features = el("div", "field-list");
  for (const [name, value] of Object.entries(record.features)) {
    const row = el("div", "field-row");
    row.append(el("span", "field-label", name), el("span", "field-value", String(value)));
    features.append(row);
  }
  view.append(features);

  const purgeButton = document.createElement("button");
  purgeButton.textContent = "Purge this case";
  purgeButton.className = "purge-button";
  purgeButton.addEventListener("click", async () => {
    if (!window.confirm(`Remove case ${record.id} from the case base?`)) return;
    try {
      await api.deleteCase(record.id);
      window.location.hash = "#/cases";
      await loadCasePage(store, 0);
    } catch (err) {
      store.set({ casesError: errorText(err) });
    }
  });
  view.append(purgeButton);
  return view;
}

function excerpt(text: string): string {
  return text.length > 60 ? `${text.slice(0, 57)}…` : text;
}

function errorText(err: unknown): string {
  return err instanceof ApiError ? `${err.code}: ${err.message}` : "network failure, please retry";
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}
