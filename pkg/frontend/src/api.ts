// Typed client for the session API. Every mutation returns the server's
// response; callers must replace their view state from it (no optimism).

import type {
  ConceptDetail,
  DiscoveryForm,
  JobDoc,
  ProposalDoc,
  RestrictionInput,
  SessionState,
  TaxonomyDoc,
  TaxonomyStatsDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (body.detail !== undefined) detail = JSON.stringify(body.detail).replace(/^"|"$/g, "");
  } catch {
    // non-JSON error body: keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  createSession(content: string, name: string, columns?: Record<string, object>): Promise<SessionState> {
    return this.request("POST", "/sessions", { content, format: "csv", name, columns });
  }

  getState(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  patchColumn(sessionId: string, column: string, patch: { kind?: string; included?: boolean }) {
    return this.request<object>("PATCH", `/sessions/${sessionId}/columns`, { column, ...patch });
  }

  command(sessionId: string, command: object): Promise<{ result: object; taxonomy: TaxonomyDoc }> {
    return this.request("POST", `/sessions/${sessionId}/commands`, command);
  }

  addRestriction(sessionId: string, parent: string, restrictions: RestrictionInput[], label: string) {
    return this.command(sessionId, { op: "add_restriction", parent, restrictions, label });
  }

  combine(sessionId: string, ids: string[], kind: string, label: string, referenceParent?: string) {
    return this.command(sessionId, {
      op: "combine",
      ids,
      kind,
      label,
      reference_parent: referenceParent ?? null,
    });
  }

  merge(sessionId: string, ids: string[], label: string) {
    return this.command(sessionId, { op: "merge", ids, label });
  }

  findIntersections(sessionId: string, ids: string[]) {
    return this.command(sessionId, { op: "find_intersections", ids });
  }

  relabel(sessionId: string, concept: string, label: string) {
    return this.command(sessionId, { op: "relabel", concept, label });
  }

  deleteConcept(sessionId: string, concept: string) {
    return this.command(sessionId, { op: "delete", concept });
  }

  conceptDetail(sessionId: string, conceptId: string): Promise<ConceptDetail> {
    return this.request("GET", `/sessions/${sessionId}/concepts/${conceptId}`);
  }

  startDiscovery(sessionId: string, conceptId: string, form: DiscoveryForm): Promise<{ job_id: string }> {
    return this.request("POST", `/sessions/${sessionId}/concepts/${conceptId}/discover`, {
      train: { side: form.side, epochs: form.epochs, seed: form.seed },
      ignore_columns: form.ignoreColumns,
      max_proposals: form.maxProposals,
    });
  }

  getJob(sessionId: string, jobId: string): Promise<JobDoc> {
    return this.request("GET", `/sessions/${sessionId}/jobs/${jobId}`);
  }

  resolveProposal(
    sessionId: string,
    proposalId: string,
    decision: "accept" | "reject",
  ): Promise<{ concept: string | null; proposal: ProposalDoc; taxonomy: TaxonomyDoc }> {
    return this.request("POST", `/sessions/${sessionId}/proposals/${proposalId}`, { decision });
  }

  async exportTurtle(sessionId: string, includeIndividuals: boolean): Promise<string> {
    const response = await fetch(
      `${this.baseUrl}/sessions/${sessionId}/export?include_individuals=${includeIndividuals}`,
    );
    if (!response.ok) await parseError(response);
    return response.text();
  }

  getStats(sessionId: string): Promise<TaxonomyStatsDoc> {
    return this.request("GET", `/sessions/${sessionId}/stats`);
  }
}
