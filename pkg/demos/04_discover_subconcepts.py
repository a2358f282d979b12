"""Subconcept discovery on iris: train a weighted SOM on a concept's
extension, derive interval restrictions on the most discriminating column,
and review the resulting proposals.
"""

from taxbench import DiscoveryConfig, TrainConfig, create_root, discover, load_table
from taxbench.discovery import resolve_proposal

table = load_table("tests/data/iris.csv")
tax = create_root(table)
tax.relabel(tax.root_id, "Iris")

config = DiscoveryConfig(
    train=TrainConfig(seed=4),
    ignore_columns={"Species"},  # pretend the species labels are unknown
)
outcome = discover(table, tax.extension("c0"), config, parent_concept="c0")

print(f"most discriminating column: {outcome.column}")
print(f"{len(outcome.pre_merge)} unit restrictions -> {len(outcome.proposals)} proposals\n")
for proposal in outcome.proposals:
    text = " and ".join(r.display() for r in proposal.restrictions)
    print(f"  [{len(proposal.extension):>3} rows] {text}")

# accept the largest, reject the rest; acceptance creates a real subconcept
accepted = resolve_proposal(tax, outcome.proposals[0], "accept")
for proposal in outcome.proposals[1:]:
    resolve_proposal(tax, proposal, "reject")

concept = tax.get(accepted)
print(f"\naccepted -> {concept.label}: {len(concept.extension)} rows")
print("taxonomy:", [c.label for c in tax.concepts.values()])
