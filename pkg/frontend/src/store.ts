// Session view-state container. The taxonomy/columns/proposals here are
// always verbatim server responses; actions mutate nothing locally and
// re-render only after the server answers (optimistic updates forbidden).

import { ApiClient, ApiError } from "./api.js";
import type {
  ConceptNode,
  DiscoveryForm,
  JobDoc,
  RestrictionInput,
  SessionState,
} from "./types.js";
import { defaultDiscoveryForm } from "./types.js";

export interface TreeRow {
  id: string;
  label: string;
  depth: number;
  extensionSize: number;
  pendingProposals: number;
  emptyWarning: boolean;
  // true on repeated placements of a multi-parent concept (DAG shown as a
  // tree; duplicates are marked instead of drawing cross edges)
  duplicate: boolean;
  multiParent: boolean;
}

/** Flatten the taxonomy DAG into indented tree rows, depth first in the
 * server's child order; a concept with several parents appears under each
 * parent, with every appearance after the first flagged as a duplicate. */
export function buildTreeRows(state: SessionState): TreeRow[] {
  const byId = new Map<string, ConceptNode>(state.taxonomy.concepts.map((c) => [c.id, c]));
  const seen = new Set<string>();
  const rows: TreeRow[] = [];

  const walk = (id: string, depth: number) => {
    const node = byId.get(id);
    if (!node) return;
    const duplicate = seen.has(id);
    seen.add(id);
    rows.push({
      id,
      label: node.label,
      depth,
      extensionSize: node.extension_size,
      pendingProposals: node.pending_proposals,
      emptyWarning: node.empty_warning,
      duplicate,
      multiParent: node.parents.length >= 2,
    });
    if (duplicate) return; // children are listed under the first placement only
    for (const child of node.children) walk(child, depth + 1);
  };

  walk(state.taxonomy.root, 0);
  return rows;
}

export interface FieldError {
  field: string;
  message: string;
}

export class SessionStore {
  state: SessionState | null = null;
  selection: string[] = [];
  formError: FieldError | null = null;
  activeJob: JobDoc | null = null;
  discoveryForm: DiscoveryForm | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: () => void = () => {},
  ) {}

  private notify() {
    this.onChange();
  }

  private async refresh(): Promise<void> {
    if (!this.state) return;
    this.state = await this.api.getState(this.state.session_id);
    this.notify();
  }

  private async guard<T>(field: string, action: () => Promise<T>): Promise<T | null> {
    this.formError = null;
    try {
      const out = await action();
      await this.refresh();
      return out;
    } catch (error) {
      if (error instanceof ApiError) {
        this.formError = { field, message: error.detail };
        this.notify();
        return null;
      }
      throw error;
    }
  }

  get sessionId(): string {
    if (!this.state) throw new Error("no session loaded");
    return this.state.session_id;
  }

  async loadDataset(content: string, name: string): Promise<void> {
    this.state = await this.api.createSession(content, name);
    // the POST response has no proposals/jobs arrays filled; normalize via GET
    this.state = await this.api.getState(this.state.session_id);
    this.selection = [this.state.taxonomy.root];
    this.notify();
  }

  toggleSelect(conceptId: string): void {
    const index = this.selection.indexOf(conceptId);
    if (index >= 0) this.selection.splice(index, 1);
    else this.selection.push(conceptId);
    this.notify();
  }

  selectOnly(conceptId: string): void {
    this.selection = [conceptId];
    this.notify();
  }

  concept(id: string): ConceptNode | undefined {
    return this.state?.taxonomy.concepts.find((c) => c.id === id);
  }

  async submitRestriction(parent: string, restrictions: RestrictionInput[], label: string) {
    return this.guard("restriction", () => this.api.addRestriction(this.sessionId, parent, restrictions, label));
  }

  async submitCombine(kind: string, label: string, referenceParent?: string) {
    return this.guard("combine", () =>
      this.api.combine(this.sessionId, [...this.selection], kind, label, referenceParent),
    );
  }

  async submitMerge(label: string) {
    return this.guard("merge", () => this.api.merge(this.sessionId, [...this.selection], label));
  }

  async submitFindIntersections() {
    return this.guard("find_intersections", () =>
      this.api.findIntersections(this.sessionId, [...this.selection]),
    );
  }

  async submitRelabel(concept: string, label: string) {
    return this.guard("relabel", () => this.api.relabel(this.sessionId, concept, label));
  }

  async patchColumn(column: string, patch: { kind?: string; included?: boolean }) {
    return this.guard("columns", () => this.api.patchColumn(this.sessionId, column, patch));
  }

  openDiscoveryForm(ignore: string[] = []): DiscoveryForm {
    const rows = this.state?.row_count ?? 0;
    this.discoveryForm = defaultDiscoveryForm(rows, ignore);
    this.notify();
    return this.discoveryForm;
  }

  /** Start a discovery job and poll it to a terminal state (1s interval in
   * the browser; tests pass a shorter interval). */
  async launchDiscovery(
    conceptId: string,
    form: DiscoveryForm,
    pollMs = 1000,
  ): Promise<JobDoc | null> {
    this.formError = null;
    let jobId: string;
    try {
      jobId = (await this.api.startDiscovery(this.sessionId, conceptId, form)).job_id;
    } catch (error) {
      if (error instanceof ApiError) {
        this.formError = { field: "discovery", message: error.detail };
        this.notify();
        return null;
      }
      throw error;
    }
    while (true) {
      const job = await this.api.getJob(this.sessionId, jobId);
      this.activeJob = job;
      this.notify();
      if (job.status === "done" || job.status === "failed") {
        await this.refresh();
        return job;
      }
      await new Promise((resolve) => setTimeout(resolve, pollMs));
    }
  }

  async resolveProposal(proposalId: string, decision: "accept" | "reject") {
    return this.guard("proposals", () =>
      this.api.resolveProposal(this.sessionId, proposalId, decision),
    );
  }

  exportTurtle(includeIndividuals: boolean): Promise<string> {
    return this.api.exportTurtle(this.sessionId, includeIndividuals);
  }

  getStats() {
    return this.api.getStats(this.sessionId);
  }

  conceptDetail(conceptId: string) {
    return this.api.conceptDetail(this.sessionId, conceptId);
  }
}
