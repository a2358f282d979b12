"""Subconcept discovery: train a weighted SOM on a concept's extension,
derive per-unit restrictions on the most discriminating column, reassign
parent rows to those restrictions, prune and containment-merge, and hand the
survivors to the user as accept/reject proposals.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import date
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from . import wsom
from .dataset import FeatureMatrix, Table, encode_for_clustering, format_cell
from .errors import ConflictError, ValidationError
from .taxonomy import Restriction, Taxonomy, filter_rows
from .wsom import FeatureWeights, TrainConfig

DEFAULT_MAX_PROPOSALS = 16


class DiscoveryError(ValidationError):
    """Raised when the discovery pipeline cannot run on the given concept."""


@dataclass(frozen=True)
class DiscoveryConfig:
    train: TrainConfig = field(default_factory=TrainConfig)
    ignore_columns: frozenset[str] = frozenset()
    max_proposals: int = DEFAULT_MAX_PROPOSALS

    def __post_init__(self) -> None:
        object.__setattr__(self, "ignore_columns", frozenset(self.ignore_columns))
        if self.max_proposals < 2:
            raise DiscoveryError(f"max_proposals must be >= 2, got {self.max_proposals}")

    def to_doc(self) -> dict[str, Any]:
        return {
            "train": self.train.to_doc(),
            "ignore_columns": sorted(self.ignore_columns),
            "max_proposals": self.max_proposals,
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "DiscoveryConfig":
        train = TrainConfig.from_doc(doc.get("train", {}))
        return cls(
            train=train,
            ignore_columns=frozenset(doc.get("ignore_columns", ())),
            max_proposals=doc.get("max_proposals", DEFAULT_MAX_PROPOSALS),
        )


@dataclass
class ConceptProposal:
    """A candidate subconcept awaiting user review."""

    id: str
    parent_concept: str
    column: str
    restrictions: tuple[Restriction, ...]
    extension: frozenset[int]
    source_unit: tuple[int, int]
    status: str = "pending"  # pending | accepted | rejected

    def to_doc(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "parent_concept": self.parent_concept,
            "column": self.column,
            "restrictions": [
                {"column": r.column, "op": r.op, "value": _value_doc(r.value)} for r in self.restrictions
            ],
            "extension_size": len(self.extension),
            "source_unit": list(self.source_unit),
            "status": self.status,
            "display": [r.display() for r in self.restrictions],
        }


def _value_doc(value: Any) -> Any:
    if isinstance(value, frozenset):
        return sorted(value)
    if isinstance(value, date):
        return value.isoformat()
    return value


@dataclass
class DiscoveryOutcome:
    """Everything the pipeline produced, including pre-merge intermediates
    (the coverage and containment properties are checked against these)."""

    column: str
    proposals: list[ConceptProposal]
    pre_merge: list[ConceptProposal]
    weights: FeatureWeights
    trace: wsom.TrainTrace


def top_weighted_column(
    weights: FeatureWeights,
    feature_map: Sequence[Any],
    ignore: Iterable[str] = (),
) -> str:
    """Column with the largest total learned weight; one-hot features of a
    categorical column are summed. Ties go to the earlier column."""
    ignored = set(ignore)
    scores: dict[str, float] = {}
    order: list[str] = []
    for feature, w in zip(feature_map, weights.w):
        name = feature.column
        if name in ignored:
            continue
        if name not in scores:
            scores[name] = 0.0
            order.append(name)
        scores[name] += float(w)
    if not scores:
        raise DiscoveryError("every column is ignored")
    return max(order, key=lambda name: (scores[name], -order.index(name)))


def unit_restriction(column: str, rows_of_unit: Iterable[int], table: Table) -> tuple[Restriction, ...]:
    """Restrictions covering a unit's rows on one column: min/max interval
    for numerical/date columns, the most frequent value for categorical
    (ties to the lexicographically smallest)."""
    rows = sorted(rows_of_unit)
    if not rows:
        raise DiscoveryError("unit has no rows")
    kind = table.column(column).kind
    values = table.values(column, rows)
    if any(v is None for v in values):
        raise DiscoveryError(f"column {column!r} has missing values among the unit rows")
    if kind in ("numerical", "date"):
        return (
            Restriction(column, ">=", min(values)),
            Restriction(column, "<=", max(values)),
        )
    counts: dict[str, int] = {}
    for v in values:
        counts[str(v)] = counts.get(str(v), 0) + 1
    best = max(counts.values())
    mode = min(v for v, c in counts.items() if c == best)
    return (Restriction(column, "=", mode),)


def reassign_and_prune(
    parent_rows: Iterable[int],
    restrictions_per_unit: Mapping[tuple[int, int], tuple[Restriction, ...]],
    table: Table,
    parent_concept: str = "",
    id_prefix: str = "p",
) -> list[ConceptProposal]:
    """One proposal per unit, its extension being every parent row that
    satisfies the unit's restrictions (overlaps allowed); empty ones dropped."""
    parent_rows = sorted(parent_rows)
    proposals = []
    for index, (unit, restrictions) in enumerate(restrictions_per_unit.items()):
        extension = filter_rows(table, parent_rows, restrictions)
        if not extension:
            continue
        column = restrictions[0].column
        proposals.append(
            ConceptProposal(
                id=f"{id_prefix}{index}",
                parent_concept=parent_concept,
                column=column,
                restrictions=tuple(restrictions),
                extension=extension,
                source_unit=unit,
            )
        )
    return proposals


def _restriction_span(proposal: ConceptProposal) -> float:
    lo = hi = None
    for r in proposal.restrictions:
        if isinstance(r.value, date):
            value = float(r.value.toordinal())
        elif isinstance(r.value, (int, float)):
            value = float(r.value)
        else:
            return 0.0
        if r.op in (">", ">="):
            lo = value
        elif r.op in ("<", "<="):
            hi = value
    if lo is None or hi is None:
        return 0.0
    return hi - lo


def merge_by_containment(proposals: Sequence[ConceptProposal]) -> list[ConceptProposal]:
    """Drop proposals whose extension is contained in another's.

    Equal extensions keep the proposal with the wider restriction span (ties
    by source-unit order); after this, no pair is comparable by inclusion.
    """
    survivors = list(proposals)

    # resolve equal-extension groups first
    by_ext: dict[frozenset[int], list[ConceptProposal]] = {}
    for p in survivors:
        by_ext.setdefault(p.extension, []).append(p)
    survivors = [
        max(group, key=lambda p: (_restriction_span(p), -group.index(p)))
        if len(group) > 1
        else group[0]
        for group in by_ext.values()
    ]

    contained: set[str] = set()
    for p in survivors:
        for q in survivors:
            if p.id != q.id and p.extension < q.extension:
                contained.add(p.id)
                break
    return [p for p in survivors if p.id not in contained]


def discover(
    table: Table,
    parent_rows: Iterable[int],
    config: DiscoveryConfig,
    parent_concept: str = "",
    progress: Callable[[float], None] | None = None,
) -> DiscoveryOutcome:
    """Run the full pipeline on an extension snapshot.

    Deterministic for a given (snapshot, config): encode, train the WSOM,
    pick the top-weighted column, derive one restriction set per occupied
    unit, reassign parent rows, prune empties, merge by containment, and
    keep the ``max_proposals`` largest survivors.
    """
    parent_rows = sorted(parent_rows)
    if len(parent_rows) < 2:
        raise DiscoveryError(f"extension has {len(parent_rows)} rows; need at least 2")
    encoded = encode_for_clustering(table, parent_rows, exclude=config.ignore_columns)
    if len(encoded.row_ids) < 2:
        raise DiscoveryError("fewer than 2 rows remain after dropping missing values")

    def on_epoch(done: int, total: int) -> None:
        if progress is not None:
            progress(0.9 * done / total)

    som, weights, trace = wsom.train(encoded, config.train, progress=on_epoch)
    column = top_weighted_column(weights, encoded.feature_map, ignore=config.ignore_columns)

    matrix = encoded.matrix * weights.w
    bmus = np.argmin(
        wsom._batch_distances(som.units, matrix, config.train.distance), axis=1
    )
    rows_per_unit: dict[int, list[int]] = {}
    for row_id, unit in zip(encoded.row_ids, bmus):
        rows_per_unit.setdefault(int(unit), []).append(row_id)

    seed = config.train.seed
    prefix = f"{parent_concept or 'c'}.{seed}."
    restrictions_per_unit = {
        som.grid_coordinate(unit): unit_restriction(column, rows, table)
        for unit, rows in sorted(rows_per_unit.items())
    }
    pre_merge = reassign_and_prune(
        parent_rows, restrictions_per_unit, table, parent_concept, id_prefix=prefix
    )
    merged = merge_by_containment(pre_merge)
    merged.sort(key=lambda p: (-len(p.extension), p.source_unit))
    kept = merged[: config.max_proposals]
    if progress is not None:
        progress(1.0)
    return DiscoveryOutcome(
        column=column,
        proposals=kept,
        pre_merge=pre_merge,
        weights=weights,
        trace=trace,
    )


def propose_subconcepts(
    tax: Taxonomy,
    concept_id: str,
    config: DiscoveryConfig,
    progress: Callable[[float], None] | None = None,
) -> list[ConceptProposal]:
    """Discovery on a concept's current extension snapshot."""
    concept = tax.get(concept_id)
    outcome = discover(
        tax.table, concept.extension, config, parent_concept=concept.id, progress=progress
    )
    return outcome.proposals


def proposal_label(tax: Taxonomy, proposal: ConceptProposal) -> str:
    """Editable default label: parent label, column, and the value span."""
    parent = tax.get(proposal.parent_concept)
    parts = []
    for r in proposal.restrictions:
        if r.op == "=":
            parts.append(str(r.value))
        else:
            parts.append(format_cell(r.value))
    span = "-".join(parts)
    return f"{parent.label}_{proposal.column}_{span}"


def resolve_proposal(
    tax: Taxonomy, proposal: ConceptProposal, decision: str
) -> str | None:
    """Accept (create the subconcept against the *current* parent extension)
    or reject a pending proposal. Either way the proposal becomes terminal."""
    if proposal.status != "pending":
        raise ConflictError(f"proposal {proposal.id} was already {proposal.status}")
    if decision == "reject":
        proposal.status = "rejected"
        return None
    if decision != "accept":
        raise DiscoveryError(f"decision must be 'accept' or 'reject', got {decision!r}")
    label = proposal_label(tax, proposal)
    cid = tax.add_restriction_subconcept(
        proposal.parent_concept, proposal.restrictions, label
    )
    proposal.status = "accepted"
    return cid
