// App shell: hash routing between the questionnaire, the review screen and
// the case browser. Single store; renders re-run on every state change.

import { api } from "./api.js";
import { loadCaseDetail, loadCasePage, renderCases } from "./cases.js";
import { renderQuestionnaire } from "./questionnaire.js";
import { renderReview } from "./review.js";
import { Store } from "./store.js";
import type { Answer, CaseListResponse, CaseView, ScaleDocument, SessionView } from "./types.js";

export type Route = "screen" | "review" | "cases";

export interface AppState {
  route: Route;
  scale: ScaleDocument | null;
  scaleError: string | null;
  // questionnaire
  answers: Record<string, Answer>;
  physicalAge: number | null;
  stepIndex: number;
  shortCircuit: boolean;
  submitting: boolean;
  questionnaireError: string | null;
  // review
  session: SessionView | null;
  editBuffer: string;
  reviser: string;
  reviewNotice: string | null;
  retainedCaseId: string | null;
  // case browser
  caseList: CaseListResponse | null;
  caseDetail: CaseView | null;
  casesError: string | null;
}

export function initialState(): AppState {
  return {
    route: "screen",
    scale: null,
    scaleError: null,
    answers: {},
    physicalAge: null,
    stepIndex: 0,
    shortCircuit: false,
    submitting: false,
    questionnaireError: null,
    session: null,
    editBuffer: "",
    reviser: "",
    reviewNotice: null,
    retainedCaseId: null,
    caseList: null,
    caseDetail: null,
    casesError: null,
  };
}

export function routeFromHash(hash: string): { route: Route; caseId: string | null } {
  if (hash.startsWith("#/cases/")) {
    return { route: "cases", caseId: decodeURIComponent(hash.slice("#/cases/".length)) };
  }
  if (hash.startsWith("#/cases")) return { route: "cases", caseId: null };
  if (hash.startsWith("#/review")) return { route: "review", caseId: null };
  return { route: "screen", caseId: null };
}

export function createApp(root: HTMLElement): Store<AppState> {
  const store = new Store<AppState>(initialState());

  const header = document.createElement("header");
  header.className = "app-header";
  const title = document.createElement("h1");
  title.textContent = "Developmental screening console";
  header.append(title);
  const nav = document.createElement("nav");
  for (const [hash, label, id] of [
    ["#/screen", "Screen", "nav-screen"],
    ["#/cases", "Case base", "nav-cases"],
  ] as const) {
    const link = document.createElement("a");
    link.href = hash;
    link.id = id;
    link.textContent = label;
    nav.append(link);
  }
  header.append(nav);

  const banner = document.createElement("div");
  banner.id = "scale-error";
  banner.className = "error banner";
  banner.hidden = true;

  const outlet = document.createElement("main");
  outlet.id = "outlet";

  root.innerHTML = "";
  root.append(header, banner, outlet);

  function render(): void {
    const state = store.get();
    banner.hidden = state.scaleError === null;
    banner.textContent = state.scaleError ?? "";
    switch (state.route) {
      case "screen":
        renderQuestionnaire(outlet, store);
        break;
      case "review":
        renderReview(outlet, store);
        break;
      case "cases":
        renderCases(outlet, store);
        break;
    }
  }

  function applyHash(): void {
    const { route, caseId } = routeFromHash(window.location.hash);
    store.set({ route });
    if (route === "cases") {
      if (caseId) {
        void loadCaseDetail(store, caseId);
      } else {
        void loadCasePage(store, 0);
      }
    }
  }

  store.subscribe(render);
  window.addEventListener("hashchange", applyHash);

  void api
    .scale()
    .then((scale) => store.set({ scale, scaleError: null }))
    .catch(() => store.set({ scaleError: "Could not load the scale from the service. Is it running?" }));

  applyHash();
  return store;
}

declare global {
  interface Window {
    DELAYSCREEN_API?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  createApp(document.getElementById("app") as HTMLElement);
}
