"""Independent oracles used across the suite.

``brute_force_extension`` re-evaluates a concept's expression tree from
scratch against the table, without touching the taxonomy's cached
extensions, adjacency, or evaluation helpers.
"""

from __future__ import annotations

import numpy as np

from taxbench.taxonomy import Complement, Intersection, Restrict, Root, Taxonomy, Union


def _cell(table, row_id, column):
    idx = list(table.column_names).index(column)
    return table.rows[row_id][idx]


def _row_ok(table, row_id, restriction) -> bool:
    cell = _cell(table, row_id, restriction.column)
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
    if op == "in":
        return str(cell) in value
    raise AssertionError(f"unexpected op {op}")


def brute_force_extension(tax: Taxonomy, cid: str) -> frozenset[int]:
    expr = tax.concepts[cid].expr
    if isinstance(expr, Root):
        return frozenset(range(tax.table.row_count))
    if isinstance(expr, Restrict):
        parent_rows = brute_force_extension(tax, expr.parent)
        return frozenset(
            r for r in parent_rows if all(_row_ok(tax.table, r, rst) for rst in expr.restrictions)
        )
    if isinstance(expr, Union):
        out: frozenset[int] = frozenset()
        for op_id in expr.operands:
            out = out | brute_force_extension(tax, op_id)
        return out
    if isinstance(expr, Intersection):
        sets = [brute_force_extension(tax, op_id) for op_id in expr.operands]
        out = sets[0]
        for s in sets[1:]:
            out = out & s
        return out
    if isinstance(expr, Complement):
        parent_rows = brute_force_extension(tax, expr.parent)
        removed: frozenset[int] = frozenset()
        for ex in expr.excluded:
            removed = removed | brute_force_extension(tax, ex)
        return parent_rows - removed
    raise AssertionError(f"unexpected expr {expr}")


def expression_depth(tax: Taxonomy, cid: str) -> int:
    expr = tax.concepts[cid].expr
    if isinstance(expr, Root):
        return 1
    if isinstance(expr, Restrict):
        return 1 + expression_depth(tax, expr.parent)
    if isinstance(expr, (Union, Intersection)):
        return 1 + max(expression_depth(tax, o) for o in expr.operands)
    return 1 + max(
        expression_depth(tax, ref) for ref in (expr.parent,) + expr.excluded
    )


def grow_random_taxonomy(table, rng: np.random.Generator, n_ops: int = 12, max_depth: int = 5) -> Taxonomy:
    """Randomized expression trees over the synthetic table, depth-capped."""
    from taxbench.taxonomy import create_root

    tax = create_root(table)
    depth = {tax.root_id: 1}
    numeric = [c.name for c in table.columns if c.kind == "numerical"]
    dates = [c.name for c in table.columns if c.kind == "date"]
    cats = [c.name for c in table.columns if c.kind == "categorical"]

    def random_restriction():
        kind_pick = rng.random()
        if kind_pick < 0.5 or not (dates or cats):
            column = numeric[rng.integers(0, len(numeric))]
            op = ["<", "<=", ">", ">="][rng.integers(0, 4)]
            values = [v for v in table.values(column) if v is not None]
            value = float(rng.choice(values)) + float(rng.normal(0, 0.5))
            return (column, op, round(value, 2))
        if kind_pick < 0.75 and dates:
            column = dates[rng.integers(0, len(dates))]
            op = ["<", "<=", ">", ">="][rng.integers(0, 4)]
            values = [v for v in table.values(column) if v is not None]
            return (column, op, values[rng.integers(0, len(values))])
        column = cats[rng.integers(0, len(cats))]
        values = sorted({str(v) for v in table.values(column) if v is not None})
        if rng.random() < 0.5:
            return (column, "=", values[rng.integers(0, len(values))])
        picks = rng.choice(values, size=min(2, len(values)), replace=False)
        return (column, "in", [str(p) for p in picks])

    for _ in range(n_ops):
        ids = list(tax.concepts)
        choice = rng.random()
        if choice < 0.5:
            eligible = [i for i in ids if depth[i] < max_depth]
            if not eligible:
                continue
            parent = eligible[rng.integers(0, len(eligible))]
            n_restrictions = int(rng.integers(1, 3))
            cid = tax.add_restriction_subconcept(
                parent, [random_restriction() for _ in range(n_restrictions)], f"r{len(ids)}"
            )
            depth[cid] = depth[parent] + 1
        elif choice < 0.8 and len(ids) >= 2:
            eligible = [i for i in ids if depth[i] < max_depth]
            if len(eligible) < 2:
                continue
            k = int(rng.integers(2, min(3, len(eligible)) + 1))
            picks = [eligible[j] for j in rng.choice(len(eligible), size=k, replace=False)]
            kind = "union" if rng.random() < 0.5 else "intersection"
            cid = tax.combine(picks, kind, f"{kind[0]}{len(ids)}")
            depth[cid] = 1 + max(depth[p] for p in picks)
        else:
            eligible = [i for i in ids if i != tax.root_id and depth[i] < max_depth]
            if not eligible:
                continue
            k = int(rng.integers(1, min(2, len(eligible)) + 1))
            picks = [eligible[j] for j in rng.choice(len(eligible), size=k, replace=False)]
            cid = tax.combine(picks, "complement", f"n{len(ids)}")
            depth[cid] = 1 + max(depth[p] for p in picks)
    return tax
