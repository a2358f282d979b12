"""Build a small taxonomy by hand: restriction subconcepts, set
combinations, merge, and find-intersections.

Every concept keeps a materialized extension (a row-id set); mutations keep
the concept graph a single-rooted DAG.
"""

from taxbench import create_root, load_table

table = load_table("tests/data/iris.csv")
tax = create_root(table)
tax.relabel(tax.root_id, "Iris")

# subconcepts from restrictions: inequality on numeric, equality on categorical
short = tax.add_restriction_subconcept(tax.root_id, [("PetalLength", "<", 4.4)], "ShortPetal")
setosa = tax.add_restriction_subconcept(tax.root_id, [("Species", "=", "setosa")], "Setosa")
virginica = tax.add_restriction_subconcept(tax.root_id, [("Species", "=", "virginica")], "Virginica")
print(f"ShortPetal: {len(tax.extension(short))} rows")
print(f"Setosa:     {len(tax.extension(setosa))} rows")

# combinations: union / intersection / complement (relative to the nearest
# common ancestor)
either = tax.combine([setosa, virginica], "union", "SetosaOrVirginica")
rest = tax.combine([setosa, virginica], "complement", "OtherSpecies")
print(f"union: {len(tax.extension(either))}, complement: {len(tax.extension(rest))}")

# merge sibling restriction concepts into one covering concept (interval hull)
low = tax.add_restriction_subconcept(
    tax.root_id, [("PetalWidth", ">=", 0.1), ("PetalWidth", "<=", 0.4)], "NarrowA"
)
high = tax.add_restriction_subconcept(
    tax.root_id, [("PetalWidth", ">=", 1.6), ("PetalWidth", "<=", 2.5)], "NarrowB"
)
merged = tax.merge_concepts([low, high], "WidthHull")
print("merged intension:", tax.get(merged).intension_strings())

# all non-empty pairwise intersections of a selection
created = tax.find_intersections([short, setosa, virginica])
for cid in created:
    print("intersection:", tax.get(cid).label, len(tax.extension(cid)))

print("\nconcepts:", [c.label for c in tax.concepts.values()])
