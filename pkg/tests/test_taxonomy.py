import datetime

import numpy as np
import pytest

from taxbench import dataset
from taxbench.errors import NotFoundError
from taxbench.taxonomy import (
    Intersection,
    Restrict,
    Restriction,
    TaxonomyError,
    Taxonomy,
    create_root,
)

from oracle_utils import brute_force_extension, expression_depth, grow_random_taxonomy


@pytest.fixture()
def iris_tax(iris_table):
    tax = create_root(iris_table)
    tax.relabel(tax.root_id, "Iris")
    return tax


class TestCreateRoot:
    def test_root_covers_everything(self, iris_tax, iris_table):
        assert iris_tax.extension(iris_tax.root_id) == frozenset(range(150))
        assert iris_tax.get(iris_tax.root_id).label == "Iris"

    def test_default_label_is_dataset_name(self, iris_table):
        assert create_root(iris_table).get("c0").label == "iris"

    def test_empty_table_root(self):
        table = dataset.load_table(b"a,b\n")
        tax = create_root(table)
        assert tax.extension(tax.root_id) == frozenset()


class TestAddRestriction:
    def test_against_brute_force_filter(self, iris_tax, iris_path):
        cid = iris_tax.add_restriction_subconcept(
            "c0", [("PetalLength", "<", 4.4)], "ShortPetal"
        )
        # independent oracle: filter the CSV text directly
        import csv

        with open(iris_path) as fh:
            rows = list(csv.DictReader(fh))
        expected = {i for i, row in enumerate(rows) if float(row["PetalLength"]) < 4.4}
        assert iris_tax.extension(cid) == expected

    def test_species_equality(self, iris_tax, iris_path):
        cid = iris_tax.add_restriction_subconcept(
            "c0", [("Species", "=", "virginica")], "Virginica"
        )
        import csv

        with open(iris_path) as fh:
            rows = list(csv.DictReader(fh))
        expected = {i for i, row in enumerate(rows) if row["Species"] == "virginica"}
        assert iris_tax.extension(cid) == expected
        assert len(expected) == 50

    def test_unsatisfiable_restriction_warns(self, iris_tax):
        cid = iris_tax.add_restriction_subconcept(
            "c0", [("PetalLength", ">", 100.0)], "TooLong"
        )
        concept = iris_tax.get(cid)
        assert concept.extension == frozenset()
        assert concept.empty_warning

    def test_type_mismatch_rejected(self, iris_tax):
        with pytest.raises(TaxonomyError):
            iris_tax.add_restriction_subconcept("c0", [("Species", "<", 1.0)], "bad")
        with pytest.raises(TaxonomyError):
            iris_tax.add_restriction_subconcept("c0", [("PetalLength", "=", "x")], "bad")
        with pytest.raises(TaxonomyError):
            iris_tax.add_restriction_subconcept("c0", [("ID", ">", 3)], "bad")

    def test_unknown_parent(self, iris_tax):
        with pytest.raises(NotFoundError):
            iris_tax.add_restriction_subconcept("zzz", [("PetalLength", "<", 4)], "x")

    def test_missing_values_never_satisfy(self):
        table = dataset.load_table(b"x,y\n1,a\n,b\n3,c\n")
        tax = create_root(table)
        low = tax.add_restriction_subconcept("c0", [("x", "<", 10)], "low")
        high = tax.add_restriction_subconcept("c0", [("x", ">=", 0)], "high")
        assert 1 not in tax.extension(low)
        assert 1 not in tax.extension(high)
        assert tax.extension(low) == {0, 2}

    def test_monotone(self, iris_tax):
        a = iris_tax.add_restriction_subconcept("c0", [("PetalLength", "<", 5.0)], "a")
        b = iris_tax.add_restriction_subconcept(a, [("PetalWidth", "<", 1.5)], "b")
        assert iris_tax.extension(b) <= iris_tax.extension(a)
        assert iris_tax.extension(a) <= iris_tax.extension("c0")


class TestCombine:
    def test_union_with_complement_recovers_parent(self, iris_tax):
        a = iris_tax.add_restriction_subconcept("c0", [("PetalLength", "<", 4.4)], "a")
        not_a = iris_tax.combine([a], "complement", "not_a")
        u = iris_tax.combine([a, not_a], "union", "all")
        assert iris_tax.extension(u) == iris_tax.extension("c0")
        assert iris_tax.extension(not_a) & iris_tax.extension(a) == frozenset()

    def test_intersection_of_disjoint_is_empty(self, iris_tax):
        a = iris_tax.add_restriction_subconcept("c0", [("Species", "=", "setosa")], "a")
        b = iris_tax.add_restriction_subconcept("c0", [("Species", "=", "virginica")], "b")
        i = iris_tax.combine([a, b], "intersection", "i")
        assert iris_tax.extension(i) == frozenset()

    def test_complement_of_two(self, iris_tax):
        a = iris_tax.add_restriction_subconcept("c0", [("Species", "=", "setosa")], "a")
        b = iris_tax.add_restriction_subconcept("c0", [("Species", "=", "virginica")], "b")
        c = iris_tax.combine([a, b], "complement", "rest")
        expected = iris_tax.extension("c0") - (iris_tax.extension(a) | iris_tax.extension(b))
        assert iris_tax.extension(c) == expected
        assert len(iris_tax.extension(c)) == 50  # versicolor

    def test_complement_picks_nearest_common_ancestor(self, iris_tax):
        mid = iris_tax.add_restriction_subconcept("c0", [("PetalLength", "<", 5.0)], "mid")
        a = iris_tax.add_restriction_subconcept(mid, [("PetalWidth", "<", 1.0)], "a")
        b = iris_tax.add_restriction_subconcept(mid, [("PetalWidth", ">=", 2.0)], "b")
        c = iris_tax.combine([a, b], "complement", "c")
        expr = iris_tax.get(c).expr
        assert expr.parent == mid  # deeper than root

    def test_complement_reference_override(self, iris_tax):
        mid = iris_tax.add_restriction_subconcept("c0", [("PetalLength", "<", 5.0)], "mid")
        a = iris_tax.add_restriction_subconcept(mid, [("PetalWidth", "<", 1.0)], "a")
        c = iris_tax.combine([a], "complement", "c", reference_parent="c0")
        assert iris_tax.get(c).expr.parent == "c0"
        with pytest.raises(TaxonomyError):
            iris_tax.combine([a], "complement", "bad", reference_parent=a)

    def test_preconditions(self, iris_tax):
        a = iris_tax.add_restriction_subconcept("c0", [("PetalLength", "<", 4.4)], "a")
        with pytest.raises(TaxonomyError):
            iris_tax.combine([a], "union", "x")
        with pytest.raises(TaxonomyError):
            iris_tax.combine([iris_tax.root_id], "complement", "x")


class TestMerge:
    def test_interval_hull(self, synth_table_500):
        tax = create_root(synth_table_500)
        a = tax.add_restriction_subconcept(
            "c0", [("num_a", ">=", 1.0), ("num_a", "<=", 2.0)], "a"
        )
        b = tax.add_restriction_subconcept(
            "c0", [("num_a", ">=", 3.0), ("num_a", "<=", 5.0)], "b"
        )
        merged = tax.merge_concepts([a, b], "ab")
        expr = tax.get(merged).expr
        assert expr.restrictions == (
            Restriction("num_a", ">=", 1.0),
            Restriction("num_a", "<=", 5.0),
        )
        assert a not in tax.concepts and b not in tax.concepts

    def test_strictness_of_hull_bounds(self, synth_table_500):
        tax = create_root(synth_table_500)
        a = tax.add_restriction_subconcept("c0", [("num_a", ">", 1.0)], "a")
        b = tax.add_restriction_subconcept("c0", [("num_a", ">=", 1.0)], "b")
        merged = tax.merge_concepts([a, b], "ab")
        assert tax.get(merged).expr.restrictions == (Restriction("num_a", ">=", 1.0),)

    def test_categorical_value_union(self, synth_table_500):
        tax = create_root(synth_table_500)
        a = tax.add_restriction_subconcept("c0", [("cat_c", "=", "red")], "a")
        b = tax.add_restriction_subconcept("c0", [("cat_c", "=", "blue")], "b")
        merged = tax.merge_concepts([a, b], "ab")
        (r,) = tax.get(merged).expr.restrictions
        assert r.op == "in" and r.value == frozenset({"red", "blue"})
        ext = tax.extension(merged)
        expected = {
            i for i, v in enumerate(synth_table_500.values("cat_c")) if v in ("red", "blue")
        }
        assert ext == expected

    def test_single_concept_merge_is_relabel(self, synth_table_500):
        tax = create_root(synth_table_500)
        a = tax.add_restriction_subconcept("c0", [("cat_c", "=", "red")], "a")
        before = tax.extension(a)
        merged = tax.merge_concepts([a], "renamed")
        assert tax.get(merged).label == "renamed"
        assert tax.get(merged).expr.restrictions == (Restriction("cat_c", "=", "red"),)
        assert tax.extension(merged) == before

    def test_children_reparented_and_recomputed(self, synth_table_500):
        tax = create_root(synth_table_500)
        a = tax.add_restriction_subconcept(
            "c0", [("num_a", ">=", 4.0), ("num_a", "<=", 8.0)], "a"
        )
        b = tax.add_restriction_subconcept(
            "c0", [("num_a", ">=", 12.0), ("num_a", "<=", 16.0)], "b"
        )
        child = tax.add_restriction_subconcept(a, [("cat_c", "=", "red")], "child")
        before = tax.extension(child)
        merged = tax.merge_concepts([a, b], "ab")
        assert tax.get(child).parents == {merged}
        # hull widened the parent, so the child extension may only grow
        assert tax.extension(child) >= before
        assert tax.extension(child) == brute_force_extension(tax, child)

    def test_unbounded_hull_rejected(self, synth_table_500):
        tax = create_root(synth_table_500)
        a = tax.add_restriction_subconcept("c0", [("num_a", "<=", 8.0)], "a")
        b = tax.add_restriction_subconcept("c0", [("num_a", ">=", 12.0)], "b")
        with pytest.raises(TaxonomyError, match="unbounded"):
            tax.merge_concepts([a, b], "ab")

    def test_mismatched_inputs_rejected(self, synth_table_500):
        tax = create_root(synth_table_500)
        a = tax.add_restriction_subconcept("c0", [("num_a", "<", 9.0)], "a")
        deeper = tax.add_restriction_subconcept(a, [("num_a", "<", 5.0)], "deeper")
        other_col = tax.add_restriction_subconcept("c0", [("num_b", "<", 0.0)], "oc")
        u = tax.combine([a, other_col], "union", "u")
        with pytest.raises(TaxonomyError, match="same parent"):
            tax.merge_concepts([a, deeper], "x")
        with pytest.raises(TaxonomyError, match="same column set"):
            tax.merge_concepts([a, other_col], "x")
        with pytest.raises(TaxonomyError, match="restriction concepts"):
            tax.merge_concepts([a, u], "x")


class TestFindIntersections:
    def test_only_nonempty_pairs(self, iris_tax):
        a = iris_tax.add_restriction_subconcept("c0", [("Species", "=", "setosa")], "A")
        b = iris_tax.add_restriction_subconcept("c0", [("PetalLength", "<", 1.5)], "B")
        c = iris_tax.add_restriction_subconcept("c0", [("Species", "=", "virginica")], "C")
        created = iris_tax.find_intersections([a, b, c])
        # setosa∩shortpetal nonempty; virginica long petals exclude the others
        assert len(created) == 1
        assert iris_tax.get(created[0]).label == "A_and_B"

    def test_disjoint_yields_nothing(self, iris_tax):
        a = iris_tax.add_restriction_subconcept("c0", [("Species", "=", "setosa")], "A")
        b = iris_tax.add_restriction_subconcept("c0", [("Species", "=", "virginica")], "B")
        assert iris_tax.find_intersections([a, b]) == []

    def test_three_overlapping(self, iris_tax):
        a = iris_tax.add_restriction_subconcept("c0", [("PetalLength", "<", 5.0)], "A")
        b = iris_tax.add_restriction_subconcept("c0", [("PetalLength", "<", 5.5)], "B")
        c = iris_tax.add_restriction_subconcept("c0", [("PetalLength", "<", 6.0)], "C")
        created = iris_tax.find_intersections([a, b, c])
        assert len(created) == 3  # C(3,2)


class TestPlumbingOps:
    def test_relabel_visible(self, iris_tax):
        iris_tax.relabel("c0", "Flowers")
        assert iris_tax.get("c0").label == "Flowers"

    def test_delete_root_rejected(self, iris_tax):
        with pytest.raises(TaxonomyError, match="root"):
            iris_tax.delete_concept("c0")

    def test_delete_with_children_rejected(self, iris_tax):
        a = iris_tax.add_restriction_subconcept("c0", [("PetalLength", "<", 4.4)], "a")
        iris_tax.add_restriction_subconcept(a, [("PetalWidth", "<", 1.0)], "b")
        with pytest.raises(TaxonomyError, match="children"):
            iris_tax.delete_concept(a)

    def test_delete_leaf(self, iris_tax):
        a = iris_tax.add_restriction_subconcept("c0", [("PetalLength", "<", 4.4)], "a")
        iris_tax.delete_concept(a)
        assert a not in iris_tax.concepts

    def test_delete_expr_referenced_rejected(self, iris_tax):
        a = iris_tax.add_restriction_subconcept("c0", [("PetalLength", "<", 4.4)], "a")
        iris_tax.combine([a], "complement", "not_a")
        with pytest.raises(TaxonomyError, match="referenced"):
            iris_tax.delete_concept(a)

    def test_resolve_label(self, iris_tax):
        a = iris_tax.add_restriction_subconcept("c0", [("PetalLength", "<", 4.4)], "Short")
        assert iris_tax.resolve_label("Short") == a
        assert iris_tax.resolve_label(a) == a
        iris_tax.add_restriction_subconcept("c0", [("PetalLength", ">", 4.4)], "Short")
        with pytest.raises(TaxonomyError, match="ambiguous"):
            iris_tax.resolve_label("Short")


class TestOracleEquivalence:
    def test_randomized_trees_match_brute_force(self, synth_table_500):
        mismatches = 0
        for seed in range(25):
            rng = np.random.default_rng(seed)
            tax = grow_random_taxonomy(synth_table_500, rng, n_ops=12, max_depth=5)
            for cid in tax.concepts:
                assert expression_depth(tax, cid) <= 5
                if tax.extension(cid) != brute_force_extension(tax, cid):
                    mismatches += 1
        assert mismatches == 0

    def test_dag_invariant_after_mutations(self, synth_table_500):
        rng = np.random.default_rng(7)
        tax = grow_random_taxonomy(synth_table_500, rng, n_ops=20)
        tax._assert_dag()  # raises on violation


class TestPersistence:
    def test_doc_round_trip(self, synth_table_500):
        rng = np.random.default_rng(3)
        tax = grow_random_taxonomy(synth_table_500, rng, n_ops=10)
        doc = tax.to_doc()
        again = Taxonomy.from_doc(doc, synth_table_500)
        assert set(again.concepts) == set(tax.concepts)
        for cid in tax.concepts:
            assert again.extension(cid) == tax.extension(cid)
            assert again.get(cid).label == tax.get(cid).label
        # ids keep counting from where they left off
        new_id = again.add_restriction_subconcept("c0", [("num_a", "<", 10.0)], "x")
        assert new_id not in tax.concepts

    def test_doc_round_trip_with_dates(self, synth_table_500):
        tax = create_root(synth_table_500)
        cid = tax.add_restriction_subconcept(
            "c0", [("date_d", ">=", datetime.date(2020, 6, 1))], "later"
        )
        again = Taxonomy.from_doc(tax.to_doc(), synth_table_500)
        assert again.extension(cid) == tax.extension(cid)

    def test_table_swap_revalidates(self, iris_table):
        tax = create_root(iris_table)
        tax.add_restriction_subconcept("c0", [("Species", "=", "setosa")], "s")
        patched = dataset.set_column_kind(iris_table, "Species", "identifier")
        with pytest.raises(TaxonomyError):
            tax.with_table(patched)
        # unchanged on failure
        assert tax.table is iris_table
