// Review screen: judgment summary, precedent match cards with similarity
// bars and per-index contribution breakdown, solution editing, retain.

import { api, ApiError } from "./api.js";
import type { AppState } from "./main.js";
import type { Store } from "./store.js";
import type { MatchView } from "./types.js";

const STATUS_LABELS: Record<string, string> = {
  delay: "Developmental delay",
  normal: "Normal development",
  edge: "At the edge of normal",
};

export function renderReview(root: HTMLElement, store: Store<AppState>): void {
  const state = store.get();
  root.innerHTML = "";
  const session = state.session;
  if (!session) {
    const empty = el("section", "panel");
    empty.append(el("p", "", "No screening session yet."));
    const link = document.createElement("a");
    link.href = "#/screen";
    link.textContent = "Start a questionnaire";
    empty.append(link);
    root.append(empty);
    return;
  }

  const closed = session.state === "closed";
  const panel = el("section", `panel review${closed ? " read-only" : ""}`);

  // judgment
  const judgment = session.judgment;
  const judgmentCard = el("div", "judgment-card");
  judgmentCard.id = "judgment";
  const badge = el("span", `status-badge status-${judgment.status}`, STATUS_LABELS[judgment.status] ?? judgment.status);
  judgmentCard.append(badge);
  judgmentCard.append(
    el("p", "judgment-line", `Developmental/physical age ratio: ${judgment.ratio.toFixed(4)}`),
    el("p", "judgment-line", `Developmental age: ${judgment.developmental_age_months.toFixed(1)} months`),
    el(
      "p",
      "judgment-line",
      `Profile width: ${judgment.width} group(s): ${judgment.width_status === "too_wide" ? "too wide" : "normal range"}`,
    ),
    el(
      "p",
      "judgment-line",
      `Reliability: ${judgment.reliability} (${judgment.dont_know_count} don't-know answers)`,
    ),
  );
  for (const note of session.annotations) {
    judgmentCard.append(el("p", "warning annotation", note));
  }
  panel.append(judgmentCard);

  // matches
  panel.append(el("h2", "", `Similar past cases (${session.matches.length})`));
  const list = el("div", "match-list");
  if (session.matches.length === 0) {
    list.append(el("p", "", "Case base is empty; no precedents to show."));
  }
  for (const match of session.matches) {
    list.append(matchCard(match));
  }
  panel.append(list);

  // revision area
  const editor = el("div", "editor");
  editor.append(el("h2", "", "Recommendation"));
  const textarea = document.createElement("textarea");
  textarea.id = "solution-editor";
  textarea.rows = 4;
  textarea.value = state.editBuffer;
  textarea.disabled = closed;
  textarea.addEventListener("input", () => store.set({ editBuffer: textarea.value }));
  editor.append(textarea);

  const reviserField = el("label", "field");
  reviserField.append("Reviser name");
  const reviser = document.createElement("input");
  reviser.type = "text";
  reviser.id = "reviser-name";
  reviser.value = state.reviser;
  reviser.disabled = closed;
  reviser.addEventListener("input", () => store.set({ reviser: reviser.value }));
  reviserField.append(reviser);
  editor.append(reviserField);

  const actions = el("div", "actions");
  const saveButton = document.createElement("button");
  saveButton.id = "save-revision";
  saveButton.textContent = "Save revision";
  saveButton.disabled = closed || state.reviser.trim() === "";
  saveButton.addEventListener("click", async () => {
    const current = store.get();
    if (!current.session) return;
    try {
      const updated = await api.revise(current.session.session_id, {
        reviser: current.reviser.trim(),
        solution: current.editBuffer,
      });
      store.set({ session: updated, editBuffer: updated.proposed_solution, reviewNotice: "revision saved" });
    } catch (err) {
      store.set({ reviewNotice: errorText(err) });
    }
  });

  const retainButton = document.createElement("button");
  retainButton.id = "retain-case";
  retainButton.className = "primary";
  retainButton.textContent = "Verify & retain case";
  retainButton.disabled = closed || state.reviser.trim() === "";
  retainButton.addEventListener("click", async () => {
    const current = store.get();
    if (!current.session) return;
    try {
      // persist any pending edit before retention closes the session
      const revised = await api.revise(current.session.session_id, {
        reviser: current.reviser.trim(),
        solution: current.editBuffer,
      });
      const outcome = await api.retain(revised.session_id);
      const notice =
        outcome.outcome === "merged"
          ? `merged with existing case ${outcome.case_id}`
          : `added as case ${outcome.case_id}`;
      store.set({
        session: { ...revised, state: "closed" },
        reviewNotice: notice,
        retainedCaseId: outcome.case_id,
      });
    } catch (err) {
      store.set({ reviewNotice: errorText(err) });
    }
  });

  actions.append(saveButton, retainButton);
  editor.append(actions);
  if (state.reviewNotice) {
    const notice = el("p", "notice", state.reviewNotice);
    notice.id = "review-notice";
    editor.append(notice);
  }
  if (closed) {
    editor.append(el("p", "closed-note", "Session closed; the case is stored in the case base."));
    const fresh = document.createElement("button");
    fresh.id = "new-screening";
    fresh.textContent = "Start a new screening";
    fresh.addEventListener("click", () => {
      store.set({
        answers: {},
        physicalAge: null,
        stepIndex: 0,
        submitting: false,
        questionnaireError: null,
        session: null,
        editBuffer: "",
        reviewNotice: null,
        route: "screen",
      });
      window.location.hash = "#/screen";
    });
    editor.append(fresh);
  }
  panel.append(editor);
  root.append(panel);
}

function matchCard(match: MatchView): HTMLElement {
  const card = el("div", "match-card");
  card.dataset.caseId = match.case_id;

  const header = el("div", "match-header");
  header.append(el("span", "match-rank", `#${match.rank}`));
  header.append(el("span", "match-id", match.case_id));
  header.append(el("span", "match-value", `${(match.score.value * 100).toFixed(1)}%`));
  card.append(header);

  const bar = el("div", "similarity-bar");
  const fill = el("div", "similarity-fill");
  fill.style.width = `${(match.score.value * 100).toFixed(1)}%`;
  bar.append(fill);
  card.append(bar);

  card.append(el("p", "match-solution", match.solution || "(no recommendation recorded)"));

  const details = document.createElement("details");
  details.className = "breakdown";
  const summary = document.createElement("summary");
  summary.textContent = "Why this case matched";
  details.append(summary);
  const table = el("div", "breakdown-table");
  for (const [index, part] of Object.entries(match.score.per_index)) {
    const row = el("div", "breakdown-row");
    row.append(el("span", "breakdown-name", index));
    const rowBar = el("div", "breakdown-bar");
    const rowFill = el("div", "breakdown-fill");
    rowFill.style.width = `${(part.similarity * 100).toFixed(0)}%`;
    rowBar.append(rowFill);
    row.append(rowBar);
    row.append(el("span", "breakdown-value", part.weighted.toFixed(4)));
    table.append(row);
  }
  details.append(table);
  card.append(details);
  return card;
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
