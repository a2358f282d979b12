"""Export a taxonomy to OWL (Turtle), import it back, and compute the
indicator bundle on both the native taxonomy and the round-tripped skeleton.
"""

from taxbench import (
    ExportOptions,
    compute_stats,
    create_root,
    export_turtle,
    import_turtle,
    load_table,
    skeleton_from_taxonomy,
)

table = load_table("tests/data/iris.csv")
tax = create_root(table)
tax.relabel(tax.root_id, "Iris")
tax.add_restriction_subconcept(tax.root_id, [("PetalLength", "<", 4.4)], "ShortPetalIris")
tax.add_restriction_subconcept(tax.root_id, [("Species", "=", "virginica")], "Virginica")

document = export_turtle(tax, table, ExportOptions(include_individuals=True))
print(f"export: {len(document)} bytes of Turtle")
print("\n".join(document.splitlines()[:9]))
print("  ...")

skeleton = import_turtle(document)
print(
    f"\nimport: {len(skeleton.classes)} classes, "
    f"{len(skeleton.subclass_edges)} subclass edges, "
    f"{skeleton.restriction_count()} restrictions, "
    f"{skeleton.individual_count} individuals"
)

print("\nindicators (native taxonomy):")
print(compute_stats(skeleton_from_taxonomy(tax)).to_text())

print("\nindicators (round-tripped document):")
print(compute_stats(skeleton).to_text())
