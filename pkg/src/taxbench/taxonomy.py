"""The evolving concept DAG: intensions (restriction lists or set
expressions), labels, and eagerly materialized extensions.

A concept's extension is always derivable from its expression; extensions
are cached frozensets and recomputed in dependency order after mutations
that can change existing concepts (merge, table swap).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import date
from itertools import combinations
from typing import Any, Iterable, Mapping, Sequence

from .dataset import Table, parse_date
from .errors import NotFoundError, ValidationError

INEQUALITY_OPS = ("<", "<=", ">", ">=")
OPS = INEQUALITY_OPS + ("=", "in")


class TaxonomyError(ValidationError):
    """Raised when a taxonomy mutation violates its preconditions."""


@dataclass(frozen=True)
class Restriction:
    """A single-column condition: an inequality on a numerical/date column,
    or equality / value-set membership on a categorical column."""

    column: str
    op: str
    value: Any

    def display(self) -> str:
        if self.op == "in":
            inner = ", ".join(sorted(self.value))
            return f"{self.column} in {{{inner}}}"
        shown = self.value.isoformat() if isinstance(self.value, date) else self.value
        return f"{self.column} {self.op} {shown}"


# -- concept expressions ----------------------------------------------------


@dataclass(frozen=True)
class Root:
    pass


@dataclass(frozen=True)
class Restrict:
    parent: str
    restrictions: tuple[Restriction, ...]


@dataclass(frozen=True)
class Union:
    operands: tuple[str, ...]


@dataclass(frozen=True)
class Intersection:
    operands: tuple[str, ...]


@dataclass(frozen=True)
class Complement:
    parent: str
    excluded: tuple[str, ...]


ConceptExpr = Root | Restrict | Union | Intersection | Complement


@dataclass(frozen=True)
class Concept:
    id: str
    label: str
    expr: ConceptExpr
    parents: frozenset[str]
    extension: frozenset[int]
    #: set when the concept was created with an empty extension
    empty_warning: bool = False

    def intension_strings(self) -> list[str]:
        """Human-readable summary of the expression, for panels and logs."""
        if isinstance(self.expr, Root):
            return ["(root: all rows)"]
        if isinstance(self.expr, Restrict):
            return [r.display() for r in self.expr.restrictions]
        if isinstance(self.expr, Union):
            return ["union of " + ", ".join(self.expr.operands)]
        if isinstance(self.expr, Intersection):
            return ["intersection of " + ", ".join(self.expr.operands)]
        return [f"complement of {', '.join(self.expr.excluded)} under {self.expr.parent}"]


def referenced_ids(expr: ConceptExpr) -> tuple[str, ...]:
    """Every concept id an expression depends on."""
    if isinstance(expr, Restrict):
        return (expr.parent,)
    if isinstance(expr, (Union, Intersection)):
        return expr.operands
    if isinstance(expr, Complement):
        return (expr.parent,) + expr.excluded
    return ()


# -- restriction construction and evaluation --------------------------------


def build_restriction(table: Table, column: str, op: str, value: Any) -> Restriction:
    """Validate and coerce a raw (column, op, value) triple against the table.

    Inequalities require a numerical or date column; ``=`` and ``in`` require
    a categorical column. Identifier columns are never restrictable.
    """
    meta = table.column(column)
    if op not in OPS:
        raise TaxonomyError(f"unknown operator: {op!r}")
    if meta.kind == "identifier":
        raise TaxonomyError(f"column {column!r} is an identifier and cannot be restricted")
    if op in INEQUALITY_OPS:
        if meta.kind == "numerical":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TaxonomyError(f"{column} {op}: expected a number, got {value!r}")
            return Restriction(column, op, float(value))
        if meta.kind == "date":
            if isinstance(value, date):
                return Restriction(column, op, value)
            parsed = parse_date(str(value))
            if parsed is None:
                raise TaxonomyError(f"{column} {op}: expected a date, got {value!r}")
            return Restriction(column, op, parsed)
        raise TaxonomyError(f"operator {op!r} requires a numerical or date column, {column!r} is {meta.kind}")
    if meta.kind != "categorical":
        raise TaxonomyError(f"operator {op!r} requires a categorical column, {column!r} is {meta.kind}")
    if op == "=":
        return Restriction(column, "=", str(value))
    values = frozenset(str(v) for v in value)
    if not values:
        raise TaxonomyError(f"{column} in: empty value set")
    return Restriction(column, "in", values)


def satisfies(table: Table, row_id: int, restriction: Restriction) -> bool:
    """Whether one row meets one restriction; missing values never satisfy."""
    cell = table.rows[row_id][table.column_index(restriction.column)]
    if cell is None:
        return False
    op, value = restriction.op, restriction.value
    if op == "<":
        return cell < value
    if op == "<=":
        return cell <= value
    if op == ">":
        return cell > value
    if op == ">=":
        return cell >= value
    if op == "=":
        return str(cell) == value
    return str(cell) in value


def filter_rows(table: Table, rows: Iterable[int], restrictions: Sequence[Restriction]) -> frozenset[int]:
    """Rows of a candidate set satisfying every restriction (conjunction)."""
    return frozenset(
        r for r in rows if all(satisfies(table, r, restriction) for restriction in restrictions)
    )


# -- the taxonomy ------------------------------------------------------------


class Taxonomy:
    """Single-rooted DAG of concepts over one table.

    Mutations are not thread safe; callers serialize writers (the service
    uses one writer lock per session).
    """

    def __init__(self, table: Table, root_label: str | None = None):
        self.table = table
        self.concepts: dict[str, Concept] = {}
        self._counter = 0
        self.root_id = self._new_id()
        root = Concept(
            id=self.root_id,
            label=root_label or table.name,
            expr=Root(),
            parents=frozenset(),
            extension=frozenset(range(table.row_count)),
        )
        self.concepts[self.root_id] = root

    # - helpers -

    def _new_id(self) -> str:
        cid = f"c{self._counter}"
        self._counter += 1
        return cid

    def __contains__(self, cid: str) -> bool:
        return cid in self.concepts

    def get(self, cid: str) -> Concept:
        concept = self.concepts.get(cid)
        if concept is None:
            raise NotFoundError(f"unknown concept: {cid!r}")
        return concept

    def extension(self, cid: str) -> frozenset[int]:
        return self.get(cid).extension

    def children(self, cid: str) -> list[str]:
        self.get(cid)
        return [c.id for c in self.concepts.values() if cid in c.parents]

    def ancestors(self, cid: str) -> set[str]:
        """All proper ancestors via parent links."""
        seen: set[str] = set()
        stack = list(self.get(cid).parents)
        while stack:
            node = stack.pop()
            if node not in seen:
                seen.add(node)
                stack.extend(self.concepts[node].parents)
        return seen

    def depth(self, cid: str) -> int:
        """Longest path length from the root to this concept."""
        memo: dict[str, int] = {self.root_id: 0}

        def walk(node: str) -> int:
            if node not in memo:
                parents = self.concepts[node].parents
                memo[node] = 1 + max(walk(p) for p in parents) if parents else 0
            return memo[node]

        return walk(cid)

    def resolve_label(self, ref: str) -> str:
        """Resolve a concept reference: an id first, else a unique label."""
        if ref in self.concepts:
            return ref
        matches = [c.id for c in self.concepts.values() if c.label == ref]
        if len(matches) == 1:
            return matches[0]
        if not matches:
            raise NotFoundError(f"unknown concept: {ref!r}")
        raise TaxonomyError(f"label {ref!r} is ambiguous ({', '.join(matches)})")

    def _evaluate(self, expr: ConceptExpr) -> frozenset[int]:
        """Extension of an expression from its referenced concepts' cached extensions."""
        if isinstance(expr, Root):
            return frozenset(range(self.table.row_count))
        if isinstance(expr, Restrict):
            return filter_rows(self.table, self.concepts[expr.parent].extension, expr.restrictions)
        if isinstance(expr, Union):
            out: frozenset[int] = frozenset()
            for op_id in expr.operands:
                out |= self.concepts[op_id].extension
            return out
        if isinstance(expr, Intersection):
            out = self.concepts[expr.operands[0]].extension
            for op_id in expr.operands[1:]:
                out &= self.concepts[op_id].extension
            return out
        removed: frozenset[int] = frozenset()
        for ex_id in expr.excluded:
            removed |= self.concepts[ex_id].extension
        return self.concepts[expr.parent].extension - removed

    def _insert(self, label: str, expr: ConceptExpr, parents: Iterable[str]) -> str:
        cid = self._new_id()
        extension = self._evaluate(expr)
        self.concepts[cid] = Concept(
            id=cid,
            label=label,
            expr=expr,
            parents=frozenset(parents),
            extension=extension,
            empty_warning=not extension,
        )
        self._assert_dag()
        return cid

    def _topological_ids(self) -> list[str]:
        """Concept ids ordered so every expression dependency comes first."""
        order: list[str] = []
        state: dict[str, int] = {}

        def visit(node: str) -> None:
            mark = state.get(node)
            if mark == 2:
                return
            if mark == 1:
                raise TaxonomyError(f"cycle detected through concept {node!r}")
            state[node] = 1
            for dep in referenced_ids(self.concepts[node].expr):
                visit(dep)
            state[node] = 2
            order.append(node)

        for cid in self.concepts:
            visit(cid)
        return order

    def _assert_dag(self) -> None:
        """DAG + reachability invariant; cheap at interactive taxonomy sizes."""
        self._topological_ids()
        reachable = {self.root_id}
        frontier = [self.root_id]
        while frontier:
            node = frontier.pop()
            for child in self.children(node):
                if child not in reachable:
                    reachable.add(child)
                    frontier.append(child)
        missing = set(self.concepts) - reachable
        if missing:
            raise TaxonomyError(f"concepts unreachable from root: {sorted(missing)}")

    def recompute_extensions(self) -> None:
        """Re-evaluate every extension bottom-up (after merge or table swap)."""
        for cid in self._topological_ids():
            concept = self.concepts[cid]
            self.concepts[cid] = replace(concept, extension=self._evaluate(concept.expr))

    # - operations -

    def add_restriction_subconcept(
        self,
        parent: str,
        restrictions: Sequence[Restriction | tuple | Mapping[str, Any]],
        label: str,
    ) -> str:
        """New concept holding the parent rows that satisfy every restriction."""
        parent_id = self.get(parent).id
        if not restrictions:
            raise TaxonomyError("at least one restriction is required")
        built = tuple(self._as_restriction(r) for r in restrictions)
        return self._insert(label, Restrict(parent=parent_id, restrictions=built), [parent_id])

    def _as_restriction(self, spec: Restriction | tuple | Mapping[str, Any]) -> Restriction:
        if isinstance(spec, Restriction):
            return build_restriction(self.table, spec.column, spec.op, spec.value)
        if isinstance(spec, Mapping):
            return build_restriction(self.table, spec["column"], spec["op"], spec["value"])
        column, op, value = spec
        return build_restriction(self.table, column, op, value)

    def combine(
        self,
        ids: Sequence[str],
        kind: str,
        label: str,
        reference_parent: str | None = None,
    ) -> str:
        """Union, intersection, or complement of existing concepts.

        The complement is taken relative to the nearest common ancestor of
        the selected concepts, unless ``reference_parent`` designates one of
        the common ancestors explicitly.
        """
        ids = [self.get(i).id for i in ids]
        if len(set(ids)) != len(ids):
            raise TaxonomyError("duplicate concept ids in combine")
        if kind in ("union", "intersection"):
            if len(ids) < 2:
                raise TaxonomyError(f"{kind} requires at least 2 concepts")
            expr: ConceptExpr = Union(tuple(ids)) if kind == "union" else Intersection(tuple(ids))
            return self._insert(label, expr, ids)
        if kind != "complement":
            raise TaxonomyError(f"unknown combination kind: {kind!r}")
        if not ids:
            raise TaxonomyError("complement requires at least 1 concept")
        common = set.intersection(*(self.ancestors(i) for i in ids))
        if not common:
            raise TaxonomyError("complement requires the concepts to share a common parent")
        if reference_parent is not None:
            ref = self.get(reference_parent).id
            if ref not in common:
                raise TaxonomyError(f"{ref!r} is not a common ancestor of {ids}")
        else:
            ref = max(common, key=lambda c: (self.depth(c), -list(self.concepts).index(c)))
        return self._insert(label, Complement(parent=ref, excluded=tuple(ids)), [ref])

    def merge_concepts(self, ids: Sequence[str], label: str) -> str:
        """Replace sibling restriction concepts with one covering concept.

        Numerical/date columns get the interval hull of the originals' bounds;
        categorical columns get the union of their values. The originals'
        children are re-parented to the merged concept.
        """
        ids = [self.get(i).id for i in ids]
        if not ids:
            raise TaxonomyError("merge requires at least 1 concept")
        if len(set(ids)) != len(ids):
            raise TaxonomyError("duplicate concept ids in merge")
        exprs = []
        for cid in ids:
            expr = self.concepts[cid].expr
            if not isinstance(expr, Restrict):
                raise TaxonomyError(f"merge requires restriction concepts; {cid!r} is not one")
            exprs.append(expr)
        parent = exprs[0].parent
        if any(e.parent != parent for e in exprs):
            raise TaxonomyError("merge requires concepts restricting the same parent")
        column_sets = [frozenset(r.column for r in e.restrictions) for e in exprs]
        if any(cols != column_sets[0] for cols in column_sets):
            raise TaxonomyError("merge requires concepts restricting the same column set")

        merged = tuple(
            self._hull_restrictions(column, [e.restrictions for e in exprs])
            for column in sorted(column_sets[0])
        )
        flattened = tuple(r for group in merged for r in group)
        if not flattened:
            raise TaxonomyError("merge hull is unbounded on every column; nothing to restrict")

        # validate the reference rewrite before touching anything
        removed = set(ids)
        rewritten: dict[str, ConceptExpr] = {}
        placeholder = "\x00merged"
        for concept in self.concepts.values():
            if concept.id in removed:
                continue
            if any(ref in removed for ref in referenced_ids(concept.expr)):
                rewritten[concept.id] = self._rewrite_expr(concept.expr, removed, placeholder)

        new_id = self._new_id()
        new_concept = Concept(
            id=new_id,
            label=label,
            expr=Restrict(parent=parent, restrictions=flattened),
            parents=frozenset([parent]),
            extension=frozenset(),
        )
        for cid in ids:
            del self.concepts[cid]
        self.concepts[new_id] = new_concept
        for cid, expr in rewritten.items():
            concept = self.concepts[cid]
            final = self._rewrite_expr(expr, {placeholder}, new_id)
            parents = frozenset(new_id if p in removed else p for p in concept.parents)
            self.concepts[cid] = replace(concept, expr=final, parents=parents)
        self.recompute_extensions()
        self._assert_dag()
        return new_id

    def _hull_restrictions(
        self, column: str, groups: Sequence[tuple[Restriction, ...]]
    ) -> tuple[Restriction, ...]:
        """Covering restrictions for one column across the merged concepts."""
        kind = self.table.column(column).kind
        per_concept = [[r for r in group if r.column == column] for group in groups]
        if kind == "categorical":
            values: set[str] = set()
            for rs in per_concept:
                for r in rs:
                    values |= r.value if r.op == "in" else {r.value}
            if len(values) == 1:
                return (Restriction(column, "=", next(iter(values))),)
            return (Restriction(column, "in", frozenset(values)),)

        # numerical/date: each concept's conjunction is an interval; take the hull
        lowers, uppers = [], []
        for rs in per_concept:
            lo = [(r.value, r.op == ">=") for r in rs if r.op in (">", ">=")]
            hi = [(r.value, r.op == "<=") for r in rs if r.op in ("<", "<=")]
            lowers.append(max(lo, key=lambda b: (b[0], b[1])) if lo else None)
            uppers.append(min(hi, key=lambda b: (b[0], -b[1])) if hi else None)
        out = []
        if all(b is not None for b in lowers):
            value = min(b[0] for b in lowers)
            inclusive = any(b[1] for b in lowers if b[0] == value)
            out.append(Restriction(column, ">=" if inclusive else ">", value))
        if all(b is not None for b in uppers):
            value = max(b[0] for b in uppers)
            inclusive = any(b[1] for b in uppers if b[0] == value)
            out.append(Restriction(column, "<=" if inclusive else "<", value))
        # a column whose hull is open on both sides constrains nothing
        return tuple(out)

    @staticmethod
    def _rewrite_expr(expr: ConceptExpr, targets: set[str], replacement: str) -> ConceptExpr:
        def swap(ref: str) -> str:
            return replacement if ref in targets else ref

        if isinstance(expr, Restrict):
            return Restrict(parent=swap(expr.parent), restrictions=expr.restrictions)
        if isinstance(expr, (Union, Intersection)):
            seen: list[str] = []
            for ref in expr.operands:
                ref = swap(ref)
                if ref not in seen:
                    seen.append(ref)
            if len(seen) < 2:
                raise TaxonomyError(
                    "merge would collapse a union/intersection below 2 operands"
                )
            return type(expr)(tuple(seen))
        if isinstance(expr, Complement):
            seen = []
            for ref in expr.excluded:
                ref = swap(ref)
                if ref not in seen:
                    seen.append(ref)
            return Complement(parent=swap(expr.parent), excluded=tuple(seen))
        return expr

    def find_intersections(self, ids: Sequence[str]) -> list[str]:
        """One new concept per unordered pair with a non-empty intersection."""
        ids = [self.get(i).id for i in ids]
        if len(ids) < 2:
            raise TaxonomyError("find_intersections requires at least 2 concepts")
        created = []
        for a, b in combinations(ids, 2):
            if self.concepts[a].extension & self.concepts[b].extension:
                label = f"{self.concepts[a].label}_and_{self.concepts[b].label}"
                created.append(self._insert(label, Intersection((a, b)), [a, b]))
        return created

    def relabel(self, cid: str, label: str) -> None:
        concept = self.get(cid)
        self.concepts[concept.id] = replace(concept, label=label)

    def delete_concept(self, cid: str) -> None:
        """Remove a leaf concept; deletes never cascade."""
        concept = self.get(cid)
        if concept.id == self.root_id:
            raise TaxonomyError("the root concept cannot be deleted")
        children = self.children(concept.id)
        if children:
            raise TaxonomyError(f"{cid!r} still has children: {children}")
        referrers = [
            c.id
            for c in self.concepts.values()
            if c.id != concept.id and concept.id in referenced_ids(c.expr)
        ]
        if referrers:
            raise TaxonomyError(f"{cid!r} is referenced by: {referrers}")
        del self.concepts[concept.id]

    def with_table(self, table: Table) -> None:
        """Swap the backing table (column kind/inclusion patch) and recompute.

        Every restriction is revalidated against the new column kinds first;
        an incompatible patch leaves the taxonomy untouched.
        """
        for concept in self.concepts.values():
            if isinstance(concept.expr, Restrict):
                for r in concept.expr.restrictions:
                    value = sorted(r.value) if r.op == "in" else r.value
                    build_restriction(table, r.column, r.op, value)
        self.table = table
        self.recompute_extensions()

    # - persistence -

    def to_doc(self) -> dict[str, Any]:
        """Versioned session document; extensions are recomputed on load."""
        return {
            "version": 1,
            "dataset": self.table.name,
            "root": self.root_id,
            "concepts": [
                {
                    "id": c.id,
                    "label": c.label,
                    "parents": sorted(c.parents),
                    "expr": _expr_to_doc(c.expr),
                }
                for c in self.concepts.values()
            ],
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any], table: Table) -> "Taxonomy":
        if doc.get("version") != 1:
            raise TaxonomyError(f"unsupported session document version: {doc.get('version')!r}")
        tax = cls.__new__(cls)
        tax.table = table
        tax.concepts = {}
        tax.root_id = doc["root"]
        max_suffix = 0
        for entry in doc["concepts"]:
            cid = entry["id"]
            expr = _expr_from_doc(entry["expr"], table)
            tax.concepts[cid] = Concept(
                id=cid,
                label=entry["label"],
                expr=expr,
                parents=frozenset(entry["parents"]),
                extension=frozenset(),
            )
            if cid.startswith("c") and cid[1:].isdigit():
                max_suffix = max(max_suffix, int(cid[1:]) + 1)
        tax._counter = max_suffix
        tax.recompute_extensions()
        tax._assert_dag()
        return tax


def create_root(table: Table, label: str | None = None) -> Taxonomy:
    """Fresh taxonomy whose root extension is the whole dataset."""
    return Taxonomy(table, root_label=label)


# -- expression (de)serialization -------------------------------------------


def _value_to_doc(value: Any) -> Any:
    if isinstance(value, frozenset):
        return sorted(value)
    if isinstance(value, date):
        return {"date": value.isoformat()}
    return value


def restriction_to_doc(r: Restriction) -> dict[str, Any]:
    return {"column": r.column, "op": r.op, "value": _value_to_doc(r.value)}


def _expr_to_doc(expr: ConceptExpr) -> dict[str, Any]:
    if isinstance(expr, Root):
        return {"type": "root"}
    if isinstance(expr, Restrict):
        return {
            "type": "restrict",
            "parent": expr.parent,
            "restrictions": [restriction_to_doc(r) for r in expr.restrictions],
        }
    if isinstance(expr, Union):
        return {"type": "union", "operands": list(expr.operands)}
    if isinstance(expr, Intersection):
        return {"type": "intersection", "operands": list(expr.operands)}
    return {"type": "complement", "parent": expr.parent, "excluded": list(expr.excluded)}


def _value_from_doc(raw: Any) -> Any:
    if isinstance(raw, dict) and "date" in raw:
        return date.fromisoformat(raw["date"])
    if isinstance(raw, list):
        return frozenset(str(v) for v in raw)
    return raw


def _expr_from_doc(doc: Mapping[str, Any], table: Table) -> ConceptExpr:
    kind = doc["type"]
    if kind == "root":
        return Root()
    if kind == "restrict":
        restrictions = tuple(
            build_restriction(table, r["column"], r["op"], _value_from_doc(r["value"]))
            for r in doc["restrictions"]
        )
        return Restrict(parent=doc["parent"], restrictions=restrictions)
    if kind == "union":
        return Union(tuple(doc["operands"]))
    if kind == "intersection":
        return Intersection(tuple(doc["operands"]))
    if kind == "complement":
        return Complement(parent=doc["parent"], excluded=tuple(doc["excluded"]))
    raise TaxonomyError(f"unknown expression type: {kind!r}")
