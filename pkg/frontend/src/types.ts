// Payload types of the screening service API.

export type Answer = "yes" | "no" | "dont_know";

export interface AgeGroup {
  index: number;
  start_month: number;
  end_month: number;
}

export interface ScaleQuestion {
  id: string;
  category: string;
  age_group: number;
  order: number;
}

export interface ScaleDocument {
  version: string;
  age_groups: AgeGroup[];
  categories: { id: string; question_count: number }[];
  questions: ScaleQuestion[];
}

export interface SheetBody {
  physical_age_months: number;
  answers: Record<string, Answer>;
  physiological_values: Record<string, number>;
  bone_age_months: number | null;
}

export interface JudgmentView {
  developmental_age_months: number;
  ratio: number;
  status: string;
  width: number;
  width_status: string;
  reliability: string;
  dont_know_count: number;
}

export interface IndexContribution {
  similarity: number;
  weighted: number;
}

export interface MatchView {
  case_id: string;
  rank: number;
  score: { value: number; per_index: Record<string, IndexContribution> };
  solution: string;
}

export interface SessionView {
  session_id: string;
  state: string;
  judgment: JudgmentView;
  matches: MatchView[];
  proposed_solution: string;
  annotations: string[];
  revised_by: string | null;
  bone_age_months: number | null;
}

export interface RetainResponse {
  case_id: string;
  outcome: string;
}

export interface CaseView {
  id: string;
  created_at: string;
  features: Record<string, number>;
  sheet_digest: string;
  bone_age_months: number | null;
  judgment: JudgmentView;
  solution: string;
  status: string;
  revised_by: string | null;
  usage_count: number;
  source_tag: string;
}

export interface CaseListResponse {
  total: number;
  offset: number;
  limit: number;
  items: CaseView[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail?: unknown;
}
