// Shapes of the service API responses the UI consumes. Field names mirror
// the server exactly; the UI never derives taxonomy facts on its own.

export interface ConceptNode {
  id: string;
  label: string;
  parents: string[];
  children: string[];
  extension_size: number;
  intension: string[];
  empty_warning: boolean;
  pending_proposals: number;
}

export interface TaxonomyDoc {
  root: string;
  concepts: ConceptNode[];
}

export interface ColumnInfo {
  name: string;
  kind: "numerical" | "date" | "categorical" | "identifier";
  included: boolean;
  missing_count: number;
  minimum?: string | null;
  maximum?: string | null;
  mean?: number | null;
  std?: number | null;
  distinct_count?: number | null;
  value_counts?: Record<string, number> | null;
}

export interface ProposalDoc {
  id: string;
  parent_concept: string;
  column: string;
  restrictions: { column: string; op: string; value: unknown }[];
  extension_size: number;
  source_unit: number[];
  status: "pending" | "accepted" | "rejected";
  display: string[];
}

export interface JobDoc {
  id: string;
  kind: string;
  concept: string;
  status: "queued" | "running" | "done" | "failed";
  progress: number;
  result: ProposalDoc[] | null;
  error: string | null;
}

export interface SessionState {
  session_id: string;
  dataset: string;
  row_count: number;
  columns: ColumnInfo[];
  taxonomy: TaxonomyDoc;
  proposals: ProposalDoc[];
  jobs: JobDoc[];
}

export interface ConceptDetail {
  id: string;
  label: string;
  parents: string[];
  children: string[];
  extension_size: number;
  intension: string[];
  empty_warning: boolean;
  column_stats: ColumnInfo[];
}

export interface TaxonomyStatsDoc {
  concepts: number;
  instances: number;
  restrictions: number;
  levels: number;
  leaves: number;
  multi_parent: number;
  avg_branching: number;
  std_branching: number;
  avg_instances: number;
  avg_leaf_instances: number;
}

export interface RestrictionInput {
  column: string;
  op: string;
  value: unknown;
}

// bound to the service's DiscoveryConfig; defaults prefilled from its heuristics
export interface DiscoveryForm {
  side: number | null;
  epochs: number;
  seed: number;
  ignoreColumns: string[];
  maxProposals: number;
}

export function defaultDiscoveryForm(rowCount: number, ignore: string[] = []): DiscoveryForm {
  // mirrors the server heuristic clamp(ceil(n^(1/4)), 2, 10) for display only;
  // the server recomputes its own default when side is null
  const side = Math.min(10, Math.max(2, Math.ceil(Math.pow(rowCount, 0.25))));
  return { side, epochs: 20, seed: 0, ignoreColumns: ignore, maxProposals: 16 };
}
