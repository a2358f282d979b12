from pathlib import Path

import numpy as np
import pytest

from taxbench import dataset, owl
from taxbench.owl import (
    ExportError,
    ExportOptions,
    TurtleParseError,
    export_turtle,
    import_turtle,
    parse_turtle,
    sanitize_name,
    skeleton_from_taxonomy,
)
from taxbench.taxonomy import Complement, Intersection, Restrict, Union, create_root

from oracle_utils import grow_random_taxonomy

DATA = Path(__file__).parent / "data"


def iris_with_short_petal(iris_table):
    tax = create_root(iris_table)
    tax.relabel(tax.root_id, "Iris")
    tax.add_restriction_subconcept("c0", [("PetalLength", "<", 4.4)], "ShortPetalIris")
    return tax


class TestGolden:
    def test_iris_export_matches_golden_file(self, iris_table):
        tax = iris_with_short_petal(iris_table)
        doc = export_turtle(tax, iris_table, ExportOptions(include_individuals=False))
        assert doc == (DATA / "iris_short_petal.ttl").read_text()

    def test_iris_axiom_structure(self, iris_table):
        tax = iris_with_short_petal(iris_table)
        doc = export_turtle(tax, iris_table, ExportOptions(include_individuals=False))
        skeleton = import_turtle(doc)
        short = next(c for c in skeleton.classes.values() if c.label == "ShortPetalIris")
        assert short.parents == {"http://example.org/taxonomy#Iris"}
        (restriction,) = short.restrictions
        assert restriction.property == "PetalLength"
        assert restriction.facet == "maxExclusive"
        assert restriction.value == "4.4"
        assert "intersection" in short.expression_kinds
        assert skeleton.unknown_triple_count == 0

    def test_root_only_export(self, iris_table):
        tax = create_root(iris_table)
        doc = export_turtle(tax, iris_table, ExportOptions(include_individuals=False))
        skeleton = import_turtle(doc)
        assert len(skeleton.classes) == 1
        assert "rdfs:subClassOf owl:Thing" in doc

    def test_union_axiom(self, iris_table):
        tax = create_root(iris_table)
        a = tax.add_restriction_subconcept("c0", [("Species", "=", "setosa")], "A")
        b = tax.add_restriction_subconcept("c0", [("Species", "=", "virginica")], "B")
        tax.combine([a, b], "union", "AB")
        doc = export_turtle(tax, iris_table, ExportOptions(include_individuals=False))
        skeleton = import_turtle(doc)
        ab = next(c for c in skeleton.classes.values() if c.label == "AB")
        assert "union" in ab.expression_kinds
        assert ab.parents == set()


def expected_document_edges(tax):
    """Subclass edges the exporter emits: restriction/complement concepts
    point at their parent, intersections at every operand, unions at nothing."""
    edges = set()
    for concept in tax.concepts.values():
        expr = concept.expr
        if isinstance(expr, Restrict):
            edges.add((concept.label, tax.get(expr.parent).label))
        elif isinstance(expr, Intersection):
            for op in expr.operands:
                edges.add((concept.label, tax.get(op).label))
        elif isinstance(expr, Complement):
            edges.add((concept.label, tax.get(expr.parent).label))
    return edges


def expected_restrictions(tax):
    out = {}
    for concept in tax.concepts.values():
        if not isinstance(concept.expr, Restrict):
            continue
        entries = []
        for r in concept.expr.restrictions:
            if r.op in owl.FACET_BY_OP:
                entries.append((r.column, owl.FACET_BY_OP[r.op], owl._lexical(r.value)))
            elif r.op == "=":
                entries.append((r.column, "oneOf", (str(r.value),)))
            else:
                entries.append((r.column, "oneOf", tuple(sorted(r.value))))
        out[concept.label] = sorted(entries, key=str)
    return out


class TestRoundTrip:
    def test_randomized_taxonomies(self, synth_table_500):
        for seed in range(20):
            rng = np.random.default_rng(seed + 100)
            tax = grow_random_taxonomy(synth_table_500, rng, n_ops=10, max_depth=5)
            doc = export_turtle(tax, synth_table_500, ExportOptions(include_individuals=False))
            skeleton = import_turtle(doc)

            assert len(skeleton.classes) == len(tax.concepts)
            by_label = {c.label: c for c in skeleton.classes.values()}
            assert set(by_label) == {c.label for c in tax.concepts.values()}

            imported_edges = {
                (skeleton.classes[child].label, skeleton.classes[parent].label)
                for child, parent in skeleton.subclass_edges
            }
            assert imported_edges == expected_document_edges(tax)

            for label, expected in expected_restrictions(tax).items():
                got = sorted(
                    ((r.property, r.facet, r.value) for r in by_label[label].restrictions),
                    key=str,
                )
                assert got == expected
            assert skeleton.unknown_triple_count == 0

    def test_individuals_round_trip(self, iris_table):
        tax = iris_with_short_petal(iris_table)
        doc = export_turtle(tax, iris_table, ExportOptions(include_individuals=True))
        skeleton = import_turtle(doc)
        assert skeleton.individual_count == 150
        # leaf-most typing: rows of the subconcept are typed there, the rest at the root
        sizes = {skeleton.classes[iri].label: len(rows) for iri, rows in skeleton.direct_instances.items()}
        short = len(tax.extension("c1"))
        assert sizes == {"ShortPetalIris": short, "Iris": 150 - short}

    def test_date_restriction_round_trip(self, synth_table_500):
        tax = create_root(synth_table_500)
        tax.add_restriction_subconcept("c0", [("date_d", ">=", "2020-06-01")], "Later")
        doc = export_turtle(tax, synth_table_500, ExportOptions(include_individuals=False))
        skeleton = import_turtle(doc)
        later = next(c for c in skeleton.classes.values() if c.label == "Later")
        (r,) = later.restrictions
        assert (r.property, r.facet, r.value) == ("date_d", "minInclusive", "2020-06-01")


class TestImportForeign:
    def test_plain_subclass_hierarchy(self):
        doc = """
        @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
        @prefix ex: <http://other.tool/onto#> .
        ex:Vehicle a <http://www.w3.org/2002/07/owl#Class> .
        ex:Car rdfs:subClassOf ex:Vehicle .
        ex:Truck rdfs:subClassOf ex:Vehicle .
        ex:Coupe rdfs:subClassOf ex:Car .
        """
        skeleton = import_turtle(doc)
        assert len(skeleton.classes) == 4
        assert len(skeleton.subclass_edges) == 3
        assert skeleton.restriction_count() == 0

    def test_unknown_constructs_counted(self):
        doc = """
        @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
        @prefix ex: <http://x/#> .
        ex:A rdfs:subClassOf ex:B .
        ex:A ex:weirdAnnotation "kept opaquely" .
        ex:gadget ex:hasPart ex:widget .
        """
        skeleton = import_turtle(doc)
        assert len(skeleton.classes) == 2
        assert skeleton.unknown_triple_count == 2

    def test_parse_error_reports_location(self):
        with pytest.raises(TurtleParseError, match="line 3"):
            import_turtle("@prefix ex: <http://x/#> .\nex:A ex:b ex:C .\nex:A ex:b @@ .\n")
        with pytest.raises(TurtleParseError, match="unknown prefix"):
            import_turtle("nope:A a nope:B .")

    def test_numbers_booleans_langtags_tolerated(self):
        doc = """
        @prefix ex: <http://x/#> .
        @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
        ex:A rdfs:subClassOf ex:B .
        ex:A ex:count 42 .
        ex:A ex:ratio 4.25 .
        ex:A ex:flag true .
        ex:A ex:name "chose"@fr .
        """
        skeleton = import_turtle(doc)
        assert len(skeleton.classes) == 2
        assert skeleton.unknown_triple_count == 4

    def test_triple_parser_shapes(self):
        triples, prefixes = parse_turtle(
            '@prefix ex: <http://x/#> .\nex:A ex:p "v" ; ex:q ex:B , ex:C .\n'
        )
        assert len(triples) == 3
        assert prefixes["ex"] == "http://x/#"


class TestNaming:
    def test_sanitize(self):
        assert sanitize_name("Short Petal (v2)") == "Short_Petal_v2"
        assert sanitize_name("??") == "x"

    def test_collisions_get_numeric_suffixes(self, iris_table):
        tax = create_root(iris_table)
        tax.relabel("c0", "Same Name")
        tax.add_restriction_subconcept("c0", [("PetalLength", "<", 4.4)], "Same(Name)")
        doc = export_turtle(tax, iris_table, ExportOptions(include_individuals=False))
        assert ":Same_Name a owl:Class" in doc
        assert ":Same_Name_2 a owl:Class" in doc
        skeleton = import_turtle(doc)
        assert len(skeleton.classes) == 2

    def test_column_class_collision(self, iris_table):
        tax = create_root(iris_table)
        tax.relabel("c0", "Species")  # collides with the data property
        doc = export_turtle(tax, iris_table, ExportOptions(include_individuals=False))
        assert ":Species a owl:DatatypeProperty" in doc
        assert ":Species_2 a owl:Class" in doc

    def test_invalid_base_iri_rejected(self):
        with pytest.raises(ExportError):
            ExportOptions(base_iri="not an iri")

    def test_in_restriction_enumeration(self, synth_table_500):
        tax = create_root(synth_table_500)
        tax.add_restriction_subconcept("c0", [("cat_c", "in", ["red", "blue"])], "Pair")
        doc = export_turtle(tax, synth_table_500, ExportOptions(include_individuals=False))
        assert 'owl:oneOf ( "blue" "red" )' in doc  # sorted for stability
        skeleton = import_turtle(doc)
        pair = next(c for c in skeleton.classes.values() if c.label == "Pair")
        assert pair.restrictions[0].value == ("blue", "red")
