// Questionnaire wizard: stepwise answer entry by category and age group.
// All helpers are pure so the gating rules are unit-testable.

import { api, ApiError } from "./api.js";
import type { AppState } from "./main.js";
import type { Store } from "./store.js";
import type { Answer, ScaleDocument, ScaleQuestion } from "./types.js";

export const DONT_KNOW_LIMIT = 16;
export const PHYSIOLOGICAL = "physiological";

export interface Step {
  category: string;
  groupIndex: number;
  startMonth: number;
  endMonth: number;
  questions: ScaleQuestion[];
}

export function buildSteps(scale: ScaleDocument): Step[] {
  const categories = scale.categories.map((c) => c.id).filter((id) => id !== PHYSIOLOGICAL);
  const steps: Step[] = [];
  for (const category of categories) {
    for (const group of scale.age_groups) {
      const questions = scale.questions.filter(
        (q) => q.category === category && q.age_group === group.index,
      );
      if (questions.length > 0) {
        steps.push({
          category,
          groupIndex: group.index,
          startMonth: group.start_month,
          endMonth: group.end_month,
          questions,
        });
      }
    }
  }
  return steps;
}

export function developmentalQuestionIds(scale: ScaleDocument): string[] {
  return scale.questions.filter((q) => q.category !== PHYSIOLOGICAL).map((q) => q.id);
}

export function answeredCount(scale: ScaleDocument, answers: Record<string, Answer>): number {
  return developmentalQuestionIds(scale).filter((id) => answers[id] !== undefined).length;
}

export function completionFraction(scale: ScaleDocument, answers: Record<string, Answer>): number {
  const ids = developmentalQuestionIds(scale);
  return ids.length === 0 ? 0 : answeredCount(scale, answers) / ids.length;
}

export function dontKnowCount(answers: Record<string, Answer>): number {
  return Object.values(answers).filter((a) => a === "dont_know").length;
}

export function canSubmit(
  scale: ScaleDocument,
  answers: Record<string, Answer>,
  physicalAge: number | null,
): boolean {
  if (physicalAge === null || !(physicalAge > 0) || physicalAge > 72) return false;
  return developmentalQuestionIds(scale).every((id) => answers[id] !== undefined);
}

// Short-circuit helper: answer every still-open question of a category in
// this group and above as No. The sheet stays complete; nothing is skipped
// for scoring.
export function fillCategoryRemainder(
  scale: ScaleDocument,
  answers: Record<string, Answer>,
  category: string,
  fromGroup: number,
): Record<string, Answer> {
  const next: Record<string, Answer> = { ...answers };
  for (const q of scale.questions) {
    if (q.category === category && q.age_group >= fromGroup && next[q.id] === undefined) {
      next[q.id] = "no";
    }
  }
  return next;
}

const CATEGORY_LABELS: Record<string, string> = {
  language: "Language & communication",
  social: "Social interaction",
  gross_motor: "Gross motor",
  fine_motor: "Fine motor",
  sensory_cognitive: "Sensory & cognitive",
};

export function categoryLabel(id: string): string {
  return CATEGORY_LABELS[id] ?? id;
}

const ANSWER_LABELS: [Answer, string][] = [
  ["yes", "Yes"],
  ["no", "No"],
  ["dont_know", "Don't know"],
];

export function renderQuestionnaire(root: HTMLElement, store: Store<AppState>): void {
  const state = store.get();
  const scale = state.scale;
  root.innerHTML = "";
  if (!scale) {
    root.append(el("p", "loading", "Loading scale…"));
    return;
  }

  const steps = buildSteps(scale);
  const stepIndex = Math.min(state.stepIndex, steps.length - 1);
  const step = steps[stepIndex];
  if (!step) return;

  const panel = el("section", "panel questionnaire");

  // basic info
  const basics = el("div", "basics");
  const ageField = el("label", "field") as HTMLLabelElement;
  ageField.append("Physical age (months)");
  const ageInput = document.createElement("input");
  ageInput.type = "number";
  ageInput.min = "0.1";
  ageInput.max = "72";
  ageInput.step = "0.1";
  ageInput.id = "physical-age";
  if (state.physicalAge !== null) ageInput.value = String(state.physicalAge);
  ageInput.addEventListener("input", () => {
    const value = parseFloat(ageInput.value);
    store.set({ physicalAge: Number.isFinite(value) ? value : null });
  });
  ageField.append(ageInput);
  basics.append(ageField);
  panel.append(basics);

  // progress + reliability marker
  const fraction = completionFraction(scale, state.answers);
  const progress = el("div", "progress");
  const bar = el("div", "progress-bar");
  bar.style.width = `${Math.round(fraction * 100)}%`;
  progress.append(bar);
  panel.append(progress);
  panel.append(
    el(
      "p",
      "progress-text",
      `${answeredCount(scale, state.answers)} of ${developmentalQuestionIds(scale).length} questions answered`,
    ),
  );

  const dk = dontKnowCount(state.answers);
  const dkLine = el("p", "dk-counter", `Don't know: ${dk} / ${DONT_KNOW_LIMIT} allowed`);
  dkLine.id = "dk-counter";
  panel.append(dkLine);
  if (dk > DONT_KNOW_LIMIT) {
    const warning = el(
      "p",
      "warning unreliable-warning",
      `More than ${DONT_KNOW_LIMIT} "don't know" answers: the result will be unreliable and a diagnostic assessment will be required.`,
    );
    warning.id = "unreliable-warning";
    panel.append(warning);
  }

  // current step
  const heading = el(
    "h2",
    "step-title",
    `${categoryLabel(step.category)} · age group ${step.groupIndex} (${step.startMonth}–${step.endMonth} months)`,
  );
  panel.append(heading);
  panel.append(el("p", "step-count", `Step ${stepIndex + 1} of ${steps.length}`));

  for (const question of step.questions) {
    const row = el("div", "question-row");
    row.dataset.question = question.id;
    row.append(el("span", "question-label", `Item ${question.order}: developmental milestone ${question.id}`));
    const options = el("div", "options");
    for (const [value, label] of ANSWER_LABELS) {
      const wrap = el("label", "option");
      const input = document.createElement("input");
      input.type = "radio";
      input.name = question.id;
      input.value = value;
      input.checked = state.answers[question.id] === value;
      input.addEventListener("change", () => {
        store.set({ answers: { ...store.get().answers, [question.id]: value } });
      });
      wrap.append(input, label);
      options.append(wrap);
    }
    row.append(options);
    panel.append(row);
  }

  // short-circuit toggle, off by default
  const shortCircuit = el("div", "short-circuit");
  const toggleWrap = el("label", "option");
  const toggle = document.createElement("input");
  toggle.type = "checkbox";
  toggle.id = "short-circuit-toggle";
  toggle.checked = state.shortCircuit;
  toggle.addEventListener("change", () => store.set({ shortCircuit: toggle.checked }));
  toggleWrap.append(toggle, "Enable ceiling short-cut (fills the rest of a category with No)");
  shortCircuit.append(toggleWrap);
  if (state.shortCircuit) {
    const fill = document.createElement("button");
    fill.id = "fill-remainder";
    fill.textContent = `Mark remaining ${categoryLabel(step.category)} answers as No`;
    fill.addEventListener("click", () => {
      store.set({
        answers: fillCategoryRemainder(scale, store.get().answers, step.category, step.groupIndex),
      });
    });
    shortCircuit.append(fill);
  }
  panel.append(shortCircuit);

  // navigation
  const nav = el("div", "wizard-nav");
  const prev = document.createElement("button");
  prev.textContent = "Previous";
  prev.id = "prev-step";
  prev.disabled = stepIndex === 0;
  prev.addEventListener("click", () => store.set({ stepIndex: stepIndex - 1 }));
  const next = document.createElement("button");
  next.textContent = "Next";
  next.id = "next-step";
  next.disabled = stepIndex >= steps.length - 1;
  next.addEventListener("click", () => store.set({ stepIndex: stepIndex + 1 }));
  nav.append(prev, next);
  panel.append(nav);

  if (state.questionnaireError) {
    const error = el("p", "error field-error", state.questionnaireError);
    error.id = "questionnaire-error";
    panel.append(error);
  }

  const submit = document.createElement("button");
  submit.id = "submit-sheet";
  submit.className = "primary";
  submit.textContent = state.submitting ? "Screening…" : "Submit for screening";
  submit.disabled = state.submitting || !canSubmit(scale, state.answers, state.physicalAge);
  submit.addEventListener("click", async () => {
    const current = store.get();
    if (!current.scale || !canSubmit(current.scale, current.answers, current.physicalAge)) return;
    store.set({ submitting: true, questionnaireError: null });
    try {
      const session = await api.createSession({
        physical_age_months: current.physicalAge as number,
        answers: current.answers,
        physiological_values: {},
        bone_age_months: null,
      });
      store.set({
        submitting: false,
        session,
        editBuffer: session.proposed_solution,
        reviewNotice: null,
        route: "review",
      });
      window.location.hash = "#/review";
    } catch (err) {
      const message =
        err instanceof ApiError ? `${err.code}: ${err.message}` : "network failure, please retry";
      store.set({ submitting: false, questionnaireError: message });
    }
  });
  panel.append(submit);

  root.append(panel);
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}
