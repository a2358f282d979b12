"""Taxonomy indicators for native or imported taxonomies.

Definitions (documented because the indicator table they mirror gives values
only): concepts = classes excluding the DL top; levels = nodes on the
longest root-to-leaf path; leaves = concepts without subconcepts;
multi_parent = concepts with >= 2 parents; branching statistics are over
non-leaf concepts' child counts (population std); instance averages are over
per-concept extension / typed-instance sizes.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Mapping

from .errors import ValidationError
from .owl import OntologySkeleton


class StatsError(ValidationError):
    """Raised for empty or cyclic inputs."""


@dataclass(frozen=True)
class TaxonomyStats:
    concepts: int
    instances: int
    restrictions: int
    levels: int
    leaves: int
    multi_parent: int
    avg_branching: float
    std_branching: float
    avg_instances: float
    avg_leaf_instances: float

    FIELD_ORDER = (
        "concepts",
        "instances",
        "restrictions",
        "levels",
        "leaves",
        "multi_parent",
        "avg_branching",
        "std_branching",
        "avg_instances",
        "avg_leaf_instances",
    )

    HEADERS = (
        "Concepts",
        "Instances",
        "Restrictions",
        "Levels",
        "Leaves",
        "Multi-parent",
        "Avg branching",
        "Std branching",
        "Avg instances",
        "Avg leaf instances",
    )

    def as_dict(self) -> dict[str, int | float]:
        return {name: getattr(self, name) for name in self.FIELD_ORDER}

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(self.HEADERS) + "\n")
        cells = []
        for name in self.FIELD_ORDER:
            value = getattr(self, name)
            cells.append(f"{value:.3f}" if isinstance(value, float) else str(value))
        out.write(",".join(cells) + "\n")
        return out.getvalue()

    def to_text(self) -> str:
        rows = []
        for header, name in zip(self.HEADERS, self.FIELD_ORDER):
            value = getattr(self, name)
            shown = f"{value:.3f}" if isinstance(value, float) else str(value)
            rows.append((header, shown))
        width = max(len(h) for h, _ in rows)
        return "\n".join(f"{h.ljust(width)}  {v}" for h, v in rows)


def compute_stats(skeleton: OntologySkeleton) -> TaxonomyStats:
    """Indicator bundle for a taxonomy skeleton (native or imported)."""
    classes = skeleton.classes
    if not classes:
        raise StatsError("empty taxonomy: no classes")

    children: dict[str, list[str]] = {iri: [] for iri in classes}
    for cls in classes.values():
        for parent in cls.parents:
            if parent in children:
                children[parent].append(cls.iri)

    roots = [iri for iri, cls in classes.items() if not (cls.parents & set(classes))]
    if not roots:
        raise StatsError("no root classes: the hierarchy contains a cycle")

    # longest root-to-leaf path, counted in nodes
    depth_memo: dict[str, int] = {}

    def longest_from(node: str, active: tuple[str, ...] = ()) -> int:
        if node in active:
            raise StatsError(f"cycle through class {node!r}")
        if node not in depth_memo:
            kids = children[node]
            if kids:
                depth_memo[node] = 1 + max(longest_from(k, active + (node,)) for k in kids)
            else:
                depth_memo[node] = 1
        return depth_memo[node]

    levels = max(longest_from(r) for r in roots)

    leaves = [iri for iri in classes if not children[iri]]
    multi_parent = sum(1 for cls in classes.values() if len(cls.parents & set(classes)) >= 2)
    branch_counts = [len(children[iri]) for iri in classes if children[iri]]
    if branch_counts:
        avg_branching = sum(branch_counts) / len(branch_counts)
        variance = sum((b - avg_branching) ** 2 for b in branch_counts) / len(branch_counts)
        std_branching = math.sqrt(variance)
    else:
        avg_branching = 0.0
        std_branching = 0.0

    sizes = _instance_sizes(skeleton, children)
    avg_instances = sum(sizes.values()) / len(classes)
    avg_leaf_instances = (sum(sizes[leaf] for leaf in leaves) / len(leaves)) if leaves else 0.0

    return TaxonomyStats(
        concepts=len(classes),
        instances=skeleton.individual_count,
        restrictions=skeleton.restriction_count(),
        levels=levels,
        leaves=len(leaves),
        multi_parent=multi_parent,
        avg_branching=avg_branching,
        std_branching=std_branching,
        avg_instances=avg_instances,
        avg_leaf_instances=avg_leaf_instances,
    )


def _instance_sizes(
    skeleton: OntologySkeleton, children: Mapping[str, list[str]]
) -> dict[str, int]:
    """Per-class instance-set sizes; imported skeletons close direct type
    assertions over the subclass hierarchy."""
    direct = skeleton.direct_instances
    if skeleton.instances_closed:
        return {iri: len(direct.get(iri, ())) for iri in skeleton.classes}

    memo: dict[str, frozenset] = {}

    def closure(iri: str, active: tuple[str, ...] = ()) -> frozenset:
        if iri in active:
            raise StatsError(f"cycle through class {iri!r}")
        if iri not in memo:
            out = set(direct.get(iri, ()))
            for child in children[iri]:
                out |= closure(child, active + (iri,))
            memo[iri] = frozenset(out)
        return memo[iri]

    return {iri: len(closure(iri)) for iri in skeleton.classes}
