// Pure state -> HTML string renderers. No DOM access here; the browser
// entry point injects these strings and wires events by element id, which
// keeps every view testable as plain functions.

import type { TreeRow, FieldError } from "./store.js";
import type {
  ColumnInfo,
  ConceptDetail,
  DiscoveryForm,
  JobDoc,
  ProposalDoc,
  TaxonomyStatsDoc,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderTree(rows: TreeRow[], selection: string[]): string {
  const items = rows.map((row) => {
    const classes = ["node"];
    if (selection.includes(row.id)) classes.push("selected");
    if (row.duplicate) classes.push("duplicate");
    const badges: string[] = [];
    if (row.multiParent) badges.push(`<span class="badge multi" title="multiple parents">&#8645;</span>`);
    if (row.duplicate) badges.push(`<span class="badge dup" title="shown above">&#8634;</span>`);
    if (row.pendingProposals > 0)
      badges.push(`<span class="badge pending">${row.pendingProposals} pending</span>`);
    if (row.emptyWarning) badges.push(`<span class="badge warn" title="empty extension">&#9888;</span>`);
    return (
      `<li class="${classes.join(" ")}" data-concept="${row.id}" style="--depth:${row.depth}">` +
      `<span class="label">${escapeHtml(row.label)}</span>` +
      `<span class="size">${row.extensionSize}</span>` +
      badges.join("") +
      `</li>`
    );
  });
  return `<ul class="tree">${items.join("")}</ul>`;
}

function statsCells(column: ColumnInfo): string {
  if (column.kind === "numerical" || column.kind === "date") {
    const mean = column.mean == null ? "-" : column.mean.toFixed(3);
    const std = column.std == null ? "-" : column.std.toFixed(3);
    return `min ${column.minimum ?? "-"} · max ${column.maximum ?? "-"} · mean ${mean} · std ${std}`;
  }
  const counts = column.value_counts ?? {};
  const shown = Object.entries(counts)
    .sort((a, b) => b[1] - a[1])
    .slice(0, 6)
    .map(([value, count]) => `${escapeHtml(value)}: ${count}`)
    .join(", ");
  const more = (column.distinct_count ?? 0) > 6 ? ", …" : "";
  return `${column.distinct_count ?? 0} distinct — ${shown}${more}`;
}

export function renderConceptPanel(detail: ConceptDetail): string {
  const intension = detail.intension.map((line) => `<li>${escapeHtml(line)}</li>`).join("");
  const rows = detail.column_stats
    .map(
      (column) =>
        `<tr><td>${escapeHtml(column.name)}</td><td>${column.kind}</td>` +
        `<td>${statsCells(column)}</td><td>${column.missing_count}</td></tr>`,
    )
    .join("");
  return (
    `<h2>${escapeHtml(detail.label)} <small>${detail.extension_size} rows</small></h2>` +
    `<ul class="intension">${intension}</ul>` +
    `<table class="col-stats"><thead><tr><th>column</th><th>kind</th>` +
    `<th>values in extension</th><th>missing</th></tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderColumnsPanel(columns: ColumnInfo[]): string {
  const rows = columns
    .map(
      (column) =>
        `<tr data-column="${escapeHtml(column.name)}"><td>${escapeHtml(column.name)}</td>` +
        `<td><select class="kind-select">${["numerical", "date", "categorical", "identifier"]
          .map((k) => `<option value="${k}"${k === column.kind ? " selected" : ""}>${k}</option>`)
          .join("")}</select></td>` +
        `<td><input type="checkbox" class="included-toggle"${column.included ? " checked" : ""}` +
        `${column.kind === "identifier" ? " disabled" : ""}></td></tr>`,
    )
    .join("");
  return (
    `<table class="columns"><thead><tr><th>column</th><th>kind</th><th>included</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export function renderRestrictionForm(columns: ColumnInfo[]): string {
  const usable = columns.filter((c) => c.kind !== "identifier");
  const options = usable
    .map((c) => `<option value="${escapeHtml(c.name)}" data-kind="${c.kind}">${escapeHtml(c.name)}</option>`)
    .join("");
  return (
    `<form id="restriction-form">` +
    `<select id="restriction-column" name="column">${options}</select>` +
    `<select id="restriction-op" name="op">` +
    `<option>&lt;</option><option>&lt;=</option><option>&gt;</option><option>&gt;=</option>` +
    `<option>=</option><option>in</option></select>` +
    `<input id="restriction-value" name="value" placeholder="value">` +
    `<input id="restriction-label" name="label" placeholder="new concept label">` +
    `<button type="submit">create subconcept</button>` +
    `</form>`
  );
}

export function renderDiscoveryForm(form: DiscoveryForm, columns: ColumnInfo[]): string {
  const ignorable = columns.filter((c) => c.kind !== "identifier");
  const checkboxes = ignorable
    .map(
      (c) =>
        `<label><input type="checkbox" class="ignore-column" value="${escapeHtml(c.name)}"` +
        `${form.ignoreColumns.includes(c.name) ? " checked" : ""}> ${escapeHtml(c.name)}</label>`,
    )
    .join("");
  return (
    `<form id="discovery-form">` +
    `<label>map side <input id="disc-side" type="number" min="2" max="10" value="${form.side ?? ""}"></label>` +
    `<label>epochs <input id="disc-epochs" type="number" min="1" value="${form.epochs}"></label>` +
    `<label>seed <input id="disc-seed" type="number" value="${form.seed}"></label>` +
    `<label>max proposals <input id="disc-max" type="number" min="2" value="${form.maxProposals}"></label>` +
    `<fieldset class="ignore"><legend>ignore columns</legend>${checkboxes}</fieldset>` +
    `<button type="submit">discover subconcepts</button>` +
    `</form>`
  );
}

export function renderJobProgress(job: JobDoc | null): string {
  if (!job) return "";
  if (job.status === "failed") return `<div class="job failed">discovery failed: ${escapeHtml(job.error ?? "")}</div>`;
  const percent = Math.round(job.progress * 100);
  return (
    `<div class="job ${job.status}">` +
    `<progress max="100" value="${percent}"></progress> ${job.status} ${percent}%` +
    `</div>`
  );
}

export function renderProposals(proposals: ProposalDoc[]): string {
  const pending = proposals.filter((p) => p.status === "pending");
  if (pending.length === 0) return `<p class="empty">no pending proposals</p>`;
  const rows = pending
    .map(
      (p) =>
        `<li data-proposal="${escapeHtml(p.id)}">` +
        `<span class="restrictions">${p.display.map(escapeHtml).join(" and ")}</span>` +
        `<span class="size">${p.extension_size} rows</span>` +
        `<button class="accept" data-decision="accept">accept</button>` +
        `<button class="reject" data-decision="reject">reject</button>` +
        `</li>`,
    )
    .join("");
  return `<ul class="proposals">${rows}</ul>`;
}

const STATS_LABELS: [keyof TaxonomyStatsDoc, string][] = [
  ["concepts", "Concepts"],
  ["instances", "Instances"],
  ["restrictions", "Restrictions"],
  ["levels", "Levels"],
  ["leaves", "Leaves"],
  ["multi_parent", "Multi-parent"],
  ["avg_branching", "Avg branching"],
  ["std_branching", "Std branching"],
  ["avg_instances", "Avg instances"],
  ["avg_leaf_instances", "Avg leaf instances"],
];

export function renderStatsTable(stats: TaxonomyStatsDoc): string {
  const rows = STATS_LABELS.map(([key, label]) => {
    const value = stats[key];
    const shown = Number.isInteger(value) ? String(value) : (value as number).toFixed(3);
    return `<tr><th>${label}</th><td>${shown}</td></tr>`;
  }).join("");
  return `<table class="stats">${rows}</table>`;
}

export function renderError(error: FieldError | null): string {
  if (!error) return "";
  return `<div class="form-error" data-field="${escapeHtml(error.field)}">${escapeHtml(error.message)}</div>`;
}

/** Multi-select drives which actions are available, mirroring the editing
 * workflow: one concept -> subconcept/discovery; several -> combinations. */
export function availableActions(selectionSize: number): string[] {
  if (selectionSize === 1) return ["create subconcept", "discover", "relabel", "delete"];
  if (selectionSize >= 2) return ["union", "intersection", "complement", "merge", "find intersections"];
  return [];
}
