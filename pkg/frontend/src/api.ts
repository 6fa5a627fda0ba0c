// Thin typed client for the screening service. The console renders only
// what the service returns; no scoring happens here.

import type {
  ApiErrorBody,
  CaseListResponse,
  CaseView,
  RetainResponse,
  ScaleDocument,
  SessionView,
  SheetBody,
} from "./types.js";

let apiBase = (globalThis as { DELAYSCREEN_API?: string }).DELAYSCREEN_API ?? "";

export function setApiBase(base: string): void {
  apiBase = base.replace(/\/$/, "");
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail?: unknown,
  ) {
    super(message);
  }
}

async function request<T>(method: string, path: string, body?: unknown): Promise<T> {
  const response = await fetch(`${apiBase}${path}`, {
    method,
    headers: body !== undefined ? { "Content-Type": "application/json" } : undefined,
    body: body !== undefined ? JSON.stringify(body) : undefined,
  });
  if (!response.ok) {
    let parsed: ApiErrorBody = { code: "HTTPError", message: `${response.status}` };
    try {
      parsed = (await response.json()) as ApiErrorBody;
    } catch {
      // non-JSON error body; keep the status fallback
    }
    throw new ApiError(response.status, parsed.code, parsed.message, parsed.detail);
  }
  return (await response.json()) as T;
}

export const api = {
  health: () => request<{ status: string; case_count: number }>("GET", "/health"),
  scale: () => request<ScaleDocument>("GET", "/scale"),
  createSession: (sheet: SheetBody) => request<SessionView>("POST", "/sessions", sheet),
  revise: (sessionId: string, edits: { reviser: string; solution?: string; status_override?: string }) =>
    request<SessionView>("POST", `/sessions/${sessionId}/revise`, edits),
  retain: (sessionId: string) => request<RetainResponse>("POST", `/sessions/${sessionId}/retain`),
  listCases: (offset: number, limit: number) =>
    request<CaseListResponse>("GET", `/cases?offset=${offset}&limit=${limit}`),
  getCase: (caseId: string) => request<CaseView>("GET", `/cases/${encodeURIComponent(caseId)}`),
  deleteCase: (caseId: string) =>
    request<{ removed: string[]; unknown: string[] }>("DELETE", `/cases/${encodeURIComponent(caseId)}`),
};
