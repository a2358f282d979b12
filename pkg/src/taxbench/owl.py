"""OWL export and import, Turtle serialization.

Concepts become named classes; restriction concepts get equivalent-class
intersections of the parent with datatype existentials (inequalities map to
xsd min/max facets, equality and value sets to literal enumerations); set
combinations map to unionOf/intersectionOf/complementOf. The emitted prefix
block and axiom ordering are fixed so exports are byte-stable.

The importer is a strict tokenizer/parser for the Turtle subset this module
emits plus plain subclass hierarchies from other tools; unrecognized triples
are preserved opaquely and counted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from typing import Any, Iterable, Mapping, Sequence

from .dataset import Table, format_number
from .errors import ValidationError
from .taxonomy import (
    Complement,
    Intersection,
    Restrict,
    Restriction,
    Root,
    Taxonomy,
    Union,
)

OWL_NS = "http://www.w3.org/2002/07/owl#"
RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

FACET_BY_OP = {
    "<": "maxExclusive",
    "<=": "maxInclusive",
    ">": "minExclusive",
    ">=": "minInclusive",
}
OP_BY_FACET = {v: k for k, v in FACET_BY_OP.items()}

_IRI_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:[^<>\"{}|^`\\\s]*$")


class ExportError(ValidationError):
    """Raised for invalid export options."""


class TurtleParseError(ValidationError):
    """Raised with a line location when a document cannot be parsed."""


@dataclass(frozen=True)
class ExportOptions:
    base_iri: str = "http://example.org/taxonomy"
    include_individuals: bool = True
    ontology_label: str | None = None

    def __post_init__(self) -> None:
        base = self.base_iri.rstrip("#/")
        if not _IRI_RE.match(base):
            raise ExportError(f"invalid base IRI: {self.base_iri!r}")
        object.__setattr__(self, "base_iri", base)


def sanitize_name(label: str) -> str:
    """Non-alphanumerics collapse to underscores; empty results become 'x'."""
    cleaned = re.sub(r"[^0-9A-Za-z]+", "_", label).strip("_")
    return cleaned or "x"


class _NameTable:
    """Deduplicating label -> local-name assignment (stable, numeric suffixes)."""

    def __init__(self) -> None:
        self.taken: set[str] = set()
        self.by_key: dict[str, str] = {}

    def assign(self, key: str, label: str) -> str:
        name = sanitize_name(label)
        if name in self.taken:
            n = 2
            while f"{name}_{n}" in self.taken:
                n += 1
            name = f"{name}_{n}"
        self.taken.add(name)
        self.by_key[key] = name
        return name


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\r", "\\r")


def _literal(value: Any) -> str:
    if isinstance(value, date):
        return f'"{value.isoformat()}"^^xsd:date'
    if isinstance(value, float):
        return f'"{format_number(value)}"^^xsd:decimal'
    return f'"{_escape(str(value))}"'


def _one_of(values: Iterable[str]) -> str:
    inner = " ".join(f'"{_escape(v)}"' for v in values)
    return f"[ a rdfs:Datatype ;\n          owl:oneOf ( {inner} ) ]"


def _facet_block(restrictions: Sequence[Restriction], datatype: str) -> str:
    facets = " ".join(
        f"[ xsd:{FACET_BY_OP[r.op]} {_literal(r.value)} ]" for r in restrictions
    )
    return (
        "[ a rdfs:Datatype ;\n"
        f"          owl:onDatatype {datatype} ;\n"
        f"          owl:withRestrictions ( {facets} ) ]"
    )


def _restriction_exprs(
    restrictions: Sequence[Restriction], prop_names: Mapping[str, str], table: Table
) -> list[str]:
    """One existential per categorical restriction; inequality restrictions
    on the same column share one existential so the facets conjoin over a
    single value."""
    blocks: list[str] = []
    seen_interval: dict[str, list[Restriction]] = {}
    order: list[tuple[str, Restriction | None]] = []
    for r in restrictions:
        if r.op in FACET_BY_OP:
            if r.column not in seen_interval:
                seen_interval[r.column] = []
                order.append((r.column, None))
            seen_interval[r.column].append(r)
        else:
            order.append((r.column, r))
    for column, single in order:
        prop = prop_names[column]
        if single is None:
            group = seen_interval[column]
            datatype = "xsd:date" if table.column(column).kind == "date" else "xsd:decimal"
            inner = _facet_block(group, datatype)
        elif single.op == "=":
            inner = _one_of([single.value])
        else:
            inner = _one_of(sorted(single.value))
        blocks.append(
            "[ a owl:Restriction ;\n"
            f"          owl:onProperty :{prop} ;\n"
            f"          owl:someValuesFrom {inner} ]"
        )
    return blocks


def export_turtle(tax: Taxonomy, table: Table, options: ExportOptions | None = None) -> str:
    """Serialize the taxonomy (and optionally the rows as individuals typed
    by their leaf-most concepts) as Turtle."""
    options = options or ExportOptions()
    base = options.base_iri
    names = _NameTable()

    concepts = list(tax.concepts.values())
    restricted_columns: list[str] = []
    for c in concepts:
        if isinstance(c.expr, Restrict):
            for r in c.expr.restrictions:
                if r.column not in restricted_columns:
                    restricted_columns.append(r.column)
    property_columns = [
        c.name for c in table.columns if c.included or c.name in restricted_columns
    ]
    prop_names = {col: names.assign(f"prop:{col}", col) for col in property_columns}
    class_names = {c.id: names.assign(f"class:{c.id}", c.label) for c in concepts}

    lines: list[str] = []
    lines.append(f"@prefix : <{base}#> .")
    lines.append(f"@prefix owl: <{OWL_NS}> .")
    lines.append(f"@prefix rdf: <{RDF_NS}> .")
    lines.append(f"@prefix rdfs: <{RDFS_NS}> .")
    lines.append(f"@prefix xsd: <{XSD_NS}> .")
    lines.append("")
    label = options.ontology_label or f"{table.name} taxonomy"
    lines.append(f"<{base}> a owl:Ontology ;")
    lines.append(f'    rdfs:label "{_escape(label)}" .')
    lines.append("")

    range_by_kind = {"numerical": "xsd:decimal", "date": "xsd:date"}
    for col in property_columns:
        kind = table.column(col).kind
        rng = range_by_kind.get(kind, "xsd:string")
        lines.append(f":{prop_names[col]} a owl:DatatypeProperty ;")
        lines.append(f'    rdfs:label "{_escape(col)}" ;')
        lines.append(f"    rdfs:range {rng} .")
        lines.append("")

    for concept in concepts:
        name = class_names[concept.id]
        parts = [f":{name} a owl:Class", f'    rdfs:label "{_escape(concept.label)}"']
        expr = concept.expr
        if isinstance(expr, Root):
            parts.append("    rdfs:subClassOf owl:Thing")
        elif isinstance(expr, Restrict):
            parent = class_names[expr.parent]
            parts.append(f"    rdfs:subClassOf :{parent}")
            blocks = _restriction_exprs(expr.restrictions, prop_names, table)
            operands = "\n        ".join([f":{parent}"] + blocks)
            parts.append(
                "    owl:equivalentClass [ a owl:Class ;\n"
                f"        owl:intersectionOf ( {operands} ) ]"
            )
        elif isinstance(expr, Union):
            operands = " ".join(f":{class_names[i]}" for i in expr.operands)
            parts.append(
                "    owl:equivalentClass [ a owl:Class ;\n"
                f"        owl:unionOf ( {operands} ) ]"
            )
        elif isinstance(expr, Intersection):
            for op_id in expr.operands:
                parts.append(f"    rdfs:subClassOf :{class_names[op_id]}")
            operands = " ".join(f":{class_names[i]}" for i in expr.operands)
            parts.append(
                "    owl:equivalentClass [ a owl:Class ;\n"
                f"        owl:intersectionOf ( {operands} ) ]"
            )
        elif isinstance(expr, Complement):
            parent = class_names[expr.parent]
            parts.append(f"    rdfs:subClassOf :{parent}")
            if len(expr.excluded) == 1:
                comp = f"[ a owl:Class ;\n            owl:complementOf :{class_names[expr.excluded[0]]} ]"
            else:
                inner = " ".join(f":{class_names[i]}" for i in expr.excluded)
                comp = (
                    "[ a owl:Class ;\n"
                    "            owl:complementOf [ a owl:Class ;\n"
                    f"                owl:unionOf ( {inner} ) ] ]"
                )
            parts.append(
                "    owl:equivalentClass [ a owl:Class ;\n"
                f"        owl:intersectionOf ( :{parent}\n        {comp} ) ]"
            )
        lines.append(" ;\n".join(parts) + " .")
        lines.append("")

    if options.include_individuals:
        leafmost = _leafmost_types(tax)
        included_cols = [c.name for c in table.columns if c.included]
        for row_id in range(table.row_count):
            types = ["owl:NamedIndividual"] + [
                f":{class_names[cid]}" for cid in leafmost.get(row_id, [])
            ]
            row_name = names.assign(f"row:{row_id}", f"row_{row_id}")
            parts = [f":{row_name} a " + " , ".join(types)]
            for col in included_cols:
                cell = table.rows[row_id][table.column_index(col)]
                if cell is None:
                    continue
                parts.append(f"    :{prop_names[col]} {_literal(cell)}")
            lines.append(" ;\n".join(parts) + " .")
        lines.append("")

    return "\n".join(lines)


def _leafmost_types(tax: Taxonomy) -> dict[int, list[str]]:
    """Per row: concepts containing it none of whose children also contain it."""
    children = {cid: tax.children(cid) for cid in tax.concepts}
    out: dict[int, list[str]] = {}
    for cid, concept in tax.concepts.items():
        kids = children[cid]
        for row in concept.extension:
            if not any(row in tax.concepts[k].extension for k in kids):
                out.setdefault(row, []).append(cid)
    return out


# -- Turtle tokenizer --------------------------------------------------------

_TOKEN_SPEC = [
    ("COMMENT", r"#[^\n]*"),
    ("WS", r"[ \t\r\n]+"),
    ("IRIREF", r"<[^<>\"{}|^`\\\x00-\x20]*>"),
    ("STRING", r'"""(?:[^"\\]|\\.|"(?!""))*"""|"(?:[^"\\\n]|\\.)*"'),
    ("DTYPE", r"\^\^"),
    ("PREFIX_KW", r"@prefix\b"),
    ("BASE_KW", r"@base\b"),
    ("LANGTAG", r"@[A-Za-z][A-Za-z0-9\-]*"),
    ("PNAME", r"(?:[A-Za-z_][A-Za-z_0-9\-.]*)?:[A-Za-z_0-9\-.:%]*"),
    ("NUMBER", r"[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"),
    ("BOOL", r"\b(?:true|false)\b"),
    ("A_KW", r"\ba\b"),
    ("PUNCT", r"[;,.\[\]()]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int


def _tokenize(document: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    line = 1
    while pos < len(document):
        m = _TOKEN_RE.match(document, pos)
        if m is None:
            raise TurtleParseError(f"line {line}: unexpected character {document[pos]!r}")
        kind = m.lastgroup or ""
        text = m.group()
        if kind == "PNAME" and text.endswith("."):
            # a statement-terminating dot glued to a prefixed name
            stripped = text.rstrip(".")
            delta = len(text) - len(stripped)
            text = stripped
            m_end = m.end() - delta
        else:
            m_end = m.end()
        if kind not in ("WS", "COMMENT"):
            tokens.append(_Token(kind, text, line))
        line += document.count("\n", pos, m_end)
        pos = m_end
    return tokens


# -- Turtle parser (subset) --------------------------------------------------

# terms are tuples: ("iri", value) | ("bnode", id) | ("lit", lexical, datatype, lang)
Term = tuple

RDF_TYPE = ("iri", RDF_NS + "type")
RDF_FIRST = ("iri", RDF_NS + "first")
RDF_REST = ("iri", RDF_NS + "rest")
RDF_NIL = ("iri", RDF_NS + "nil")


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0
        self.prefixes: dict[str, str] = {}
        self.triples: list[tuple[Term, Term, Term]] = []
        self._bnode_counter = 0

    def _fail(self, message: str) -> TurtleParseError:
        line = self.tokens[self.i].line if self.i < len(self.tokens) else "end"
        return TurtleParseError(f"line {line}: {message}")

    def _peek(self) -> _Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _next(self) -> _Token:
        tok = self._peek()
        if tok is None:
            raise TurtleParseError("line end: unexpected end of document")
        self.i += 1
        return tok

    def _expect_punct(self, char: str) -> None:
        tok = self._next()
        if tok.kind != "PUNCT" or tok.text != char:
            raise TurtleParseError(f"line {tok.line}: expected {char!r}, got {tok.text!r}")

    def _new_bnode(self) -> Term:
        self._bnode_counter += 1
        return ("bnode", f"b{self._bnode_counter}")

    def parse(self) -> None:
        while self._peek() is not None:
            tok = self._peek()
            if tok.kind == "PREFIX_KW":
                self._next()
                name_tok = self._next()
                if name_tok.kind != "PNAME" or not name_tok.text.endswith(":"):
                    raise TurtleParseError(f"line {name_tok.line}: expected a prefix name")
                iri_tok = self._next()
                if iri_tok.kind != "IRIREF":
                    raise TurtleParseError(f"line {iri_tok.line}: expected an IRI")
                self.prefixes[name_tok.text[:-1]] = iri_tok.text[1:-1]
                self._expect_punct(".")
            elif tok.kind == "BASE_KW":
                self._next()
                self._next()  # base IRI: accepted, unused (we emit absolute IRIs)
                self._expect_punct(".")
            else:
                subject = self._parse_term(as_subject=True)
                self._parse_predicate_object_list(subject)
                self._expect_punct(".")

    def _resolve_pname(self, tok: _Token) -> Term:
        prefix, _, local = tok.text.partition(":")
        if prefix not in self.prefixes:
            raise TurtleParseError(f"line {tok.line}: unknown prefix {prefix + ':'!r}")
        return ("iri", self.prefixes[prefix] + local)

    def _parse_term(self, as_subject: bool = False) -> Term:
        tok = self._next()
        if tok.kind == "IRIREF":
            return ("iri", tok.text[1:-1])
        if tok.kind == "PNAME":
            return self._resolve_pname(tok)
        if tok.kind == "PUNCT" and tok.text == "[":
            node = self._new_bnode()
            nxt = self._peek()
            if not (nxt and nxt.kind == "PUNCT" and nxt.text == "]"):
                self._parse_predicate_object_list(node)
            self._expect_punct("]")
            return node
        if tok.kind == "PUNCT" and tok.text == "(":
            return self._parse_collection()
        if as_subject:
            raise TurtleParseError(f"line {tok.line}: {tok.text!r} cannot start a statement")
        if tok.kind == "STRING":
            lexical = _unquote(tok.text)
            nxt = self._peek()
            if nxt and nxt.kind == "DTYPE":
                self._next()
                dt_tok = self._next()
                if dt_tok.kind == "IRIREF":
                    dtype = dt_tok.text[1:-1]
                elif dt_tok.kind == "PNAME":
                    dtype = self._resolve_pname(dt_tok)[1]
                else:
                    raise TurtleParseError(f"line {dt_tok.line}: expected a datatype IRI")
                return ("lit", lexical, dtype, None)
            if nxt and nxt.kind == "LANGTAG":
                self._next()
                return ("lit", lexical, None, nxt.text[1:])
            return ("lit", lexical, None, None)
        if tok.kind == "NUMBER":
            dtype = XSD_NS + ("decimal" if ("." in tok.text or "e" in tok.text.lower()) else "integer")
            return ("lit", tok.text, dtype, None)
        if tok.kind == "BOOL":
            return ("lit", tok.text, XSD_NS + "boolean", None)
        raise TurtleParseError(f"line {tok.line}: unexpected token {tok.text!r}")

    def _parse_collection(self) -> Term:
        items: list[Term] = []
        while True:
            tok = self._peek()
            if tok is None:
                raise TurtleParseError("line end: unterminated collection")
            if tok.kind == "PUNCT" and tok.text == ")":
                self._next()
                break
            items.append(self._parse_term())
        if not items:
            return RDF_NIL
        head = self._new_bnode()
        node = head
        for index, item in enumerate(items):
            self.triples.append((node, RDF_FIRST, item))
            if index + 1 < len(items):
                nxt = self._new_bnode()
                self.triples.append((node, RDF_REST, nxt))
                node = nxt
            else:
                self.triples.append((node, RDF_REST, RDF_NIL))
        return head

    def _parse_predicate_object_list(self, subject: Term) -> None:
        while True:
            tok = self._peek()
            if tok is None:
                raise TurtleParseError("line end: expected a predicate")
            if tok.kind == "A_KW":
                self._next()
                predicate = RDF_TYPE
            elif tok.kind == "IRIREF":
                self._next()
                predicate = ("iri", tok.text[1:-1])
            elif tok.kind == "PNAME":
                self._next()
                predicate = self._resolve_pname(tok)
            else:
                raise TurtleParseError(f"line {tok.line}: expected a predicate, got {tok.text!r}")
            while True:
                obj = self._parse_term()
                self.triples.append((subject, predicate, obj))
                nxt = self._peek()
                if nxt and nxt.kind == "PUNCT" and nxt.text == ",":
                    self._next()
                    continue
                break
            nxt = self._peek()
            if nxt and nxt.kind == "PUNCT" and nxt.text == ";":
                self._next()
                after = self._peek()
                # tolerate a trailing semicolon before '.' or ']'
                if after and after.kind == "PUNCT" and after.text in (".", "]"):
                    return
                continue
            return


def _unquote(text: str) -> str:
    body = text[3:-3] if text.startswith('"""') else text[1:-1]
    return (
        body.replace("\\\\", "\x00")
        .replace('\\"', '"')
        .replace("\\n", "\n")
        .replace("\\r", "\r")
        .replace("\\t", "\t")
        .replace("\x00", "\\")
    )


def parse_turtle(document: str) -> tuple[list[tuple[Term, Term, Term]], dict[str, str]]:
    """Tokenize and parse a Turtle document into triples."""
    parser = _Parser(_tokenize(document))
    parser.parse()
    return parser.triples, parser.prefixes


# -- interpretation: triples -> taxonomy skeleton ----------------------------


@dataclass(frozen=True)
class SkeletonRestriction:
    """One imported restriction: a facet with a value, or a value enumeration."""

    property: str  # local property label/IRI tail
    facet: str  # minInclusive | maxInclusive | minExclusive | maxExclusive | oneOf
    value: Any  # lexical string, or tuple of strings for oneOf

    @property
    def op(self) -> str:
        return OP_BY_FACET.get(self.facet, "in")


@dataclass
class SkeletonClass:
    iri: str
    label: str
    parents: set[str] = field(default_factory=set)
    restrictions: list[SkeletonRestriction] = field(default_factory=list)
    expression_kinds: list[str] = field(default_factory=list)  # restrict/union/intersection/complement


@dataclass
class OntologySkeleton:
    """Structure shared by native and imported taxonomies for statistics.

    ``instances_closed`` distinguishes native skeletons (instance sets are
    full extensions) from imported ones (direct type assertions only, so the
    per-class size needs a subclass closure).
    """

    classes: dict[str, SkeletonClass]
    direct_instances: dict[str, set]
    individual_count: int
    unknown_triple_count: int = 0
    instances_closed: bool = False

    @property
    def subclass_edges(self) -> set[tuple[str, str]]:
        return {(c.iri, parent) for c in self.classes.values() for parent in c.parents}

    def restriction_count(self) -> int:
        return sum(len(c.restrictions) for c in self.classes.values())


def import_turtle(document: str) -> OntologySkeleton:
    """Rebuild the class/edge/restriction/instance skeleton from Turtle."""
    triples, _ = parse_turtle(document)

    spo: dict[Term, dict[Term, list[Term]]] = {}
    for s, p, o in triples:
        spo.setdefault(s, {}).setdefault(p, []).append(o)

    consumed: set[int] = set()
    triple_index: dict[tuple[Term, Term, Term], list[int]] = {}
    for i, t in enumerate(triples):
        triple_index.setdefault(t, []).append(i)

    def consume(s: Term, p: Term, o: Term) -> None:
        for i in triple_index.get((s, p, o), ()):
            if i not in consumed:
                consumed.add(i)
                return

    def objects(s: Term, p_iri: str) -> list[Term]:
        return spo.get(s, {}).get(("iri", p_iri), [])

    def read_list(head: Term) -> list[Term]:
        items = []
        node = head
        while node != RDF_NIL:
            firsts = objects(node, RDF_NS + "first")
            rests = objects(node, RDF_NS + "rest")
            if not firsts or not rests:
                break
            consume(node, RDF_FIRST, firsts[0])
            consume(node, RDF_REST, rests[0])
            items.append(firsts[0])
            node = rests[0]
        return items

    owl_class = ("iri", OWL_NS + "Class")
    owl_thing = OWL_NS + "Thing"

    classes: dict[str, SkeletonClass] = {}

    def get_class(iri: str) -> SkeletonClass:
        if iri not in classes:
            classes[iri] = SkeletonClass(iri=iri, label=_local_name(iri))
        return classes[iri]

    # pass 1: explicit class declarations and subclass edges
    for s, p, o in triples:
        if s[0] != "iri":
            continue
        if p == RDF_TYPE and o == owl_class and s[1] != owl_thing:
            get_class(s[1])
            consume(s, p, o)
    for s, p, o in triples:
        if p == ("iri", RDFS_NS + "subClassOf") and s[0] == "iri" and o[0] == "iri":
            consume(s, p, o)
            if o[1] == owl_thing:
                get_class(s[1])
                continue
            get_class(s[1]).parents.add(o[1])
            get_class(o[1])

    # labels
    for s, p, o in triples:
        if p == ("iri", RDFS_NS + "label") and s[0] == "iri" and o[0] == "lit":
            if s[1] in classes:
                classes[s[1]].label = o[1]
                consume(s, p, o)

    # pass 2: equivalent-class expressions on known classes
    def walk_restriction(node: Term, cls: SkeletonClass) -> None:
        """A [ a owl:Restriction ; owl:onProperty P ; owl:someValuesFrom D ] node."""
        props = objects(node, OWL_NS + "onProperty")
        fillers = objects(node, OWL_NS + "someValuesFrom")
        if not props or not fillers:
            return
        for t in objects(node, RDF_NS + "type"):
            consume(node, RDF_TYPE, t)
        consume(node, ("iri", OWL_NS + "onProperty"), props[0])
        consume(node, ("iri", OWL_NS + "someValuesFrom"), fillers[0])
        prop = _local_name(props[0][1]) if props[0][0] == "iri" else "?"
        filler = fillers[0]
        enum = objects(filler, OWL_NS + "oneOf")
        facets = objects(filler, OWL_NS + "withRestrictions")
        for t in objects(filler, RDF_NS + "type"):
            consume(filler, RDF_TYPE, t)
        for dt in objects(filler, OWL_NS + "onDatatype"):
            consume(filler, ("iri", OWL_NS + "onDatatype"), dt)
        if enum:
            consume(filler, ("iri", OWL_NS + "oneOf"), enum[0])
            values = tuple(v[1] for v in read_list(enum[0]) if v[0] == "lit")
            cls.restrictions.append(SkeletonRestriction(prop, "oneOf", values))
        for facet_list in facets:
            consume(filler, ("iri", OWL_NS + "withRestrictions"), facet_list)
            for facet_node in read_list(facet_list):
                for pred, vals in spo.get(facet_node, {}).items():
                    if pred[0] == "iri" and pred[1].startswith(XSD_NS):
                        facet = pred[1][len(XSD_NS):]
                        if facet in OP_BY_FACET and vals and vals[0][0] == "lit":
                            consume(facet_node, pred, vals[0])
                            cls.restrictions.append(
                                SkeletonRestriction(prop, facet, vals[0][1])
                            )

    def walk_expression(node: Term, cls: SkeletonClass) -> None:
        for t in objects(node, RDF_NS + "type"):
            consume(node, RDF_TYPE, t)
        for head in objects(node, OWL_NS + "intersectionOf"):
            consume(node, ("iri", OWL_NS + "intersectionOf"), head)
            cls.expression_kinds.append("intersection")
            for item in read_list(head):
                if item[0] == "bnode":
                    if objects(item, OWL_NS + "onProperty"):
                        walk_restriction(item, cls)
                    else:
                        walk_expression(item, cls)
        for head in objects(node, OWL_NS + "unionOf"):
            consume(node, ("iri", OWL_NS + "unionOf"), head)
            cls.expression_kinds.append("union")
            for item in read_list(head):
                if item[0] == "bnode":
                    walk_expression(item, cls)
        for comp in objects(node, OWL_NS + "complementOf"):
            consume(node, ("iri", OWL_NS + "complementOf"), comp)
            cls.expression_kinds.append("complement")
            if comp[0] == "bnode":
                walk_expression(comp, cls)
        if objects(node, OWL_NS + "onProperty"):
            walk_restriction(node, cls)

    for s, p, o in triples:
        if p == ("iri", OWL_NS + "equivalentClass") and s[0] == "iri" and s[1] in classes:
            consume(s, p, o)
            if o[0] == "bnode":
                walk_expression(o, classes[s[1]])

    # pass 3: individuals and type assertions
    named_individual = ("iri", OWL_NS + "NamedIndividual")
    individuals: set[str] = set()
    direct_instances: dict[str, set] = {}
    for s, p, o in triples:
        if p != RDF_TYPE or s[0] != "iri":
            continue
        if o == named_individual:
            individuals.add(s[1])
            consume(s, p, o)
        elif o[0] == "iri" and o[1] in classes:
            individuals.add(s[1])
            direct_instances.setdefault(o[1], set()).add(s[1])
            consume(s, p, o)

    # consumed bookkeeping: data-property assertions on individuals, property
    # declarations, and the ontology header are recognized plumbing
    datatype_prop = ("iri", OWL_NS + "DatatypeProperty")
    ontology = ("iri", OWL_NS + "Ontology")
    declared_props = {s[1] for s, p, o in triples if p == RDF_TYPE and o == datatype_prop and s[0] == "iri"}
    for s, p, o in triples:
        if p == RDF_TYPE and o in (datatype_prop, ontology):
            consume(s, p, o)
        elif s[0] == "iri" and s[1] in declared_props and p[0] == "iri" and p[1] in (
            RDFS_NS + "label",
            RDFS_NS + "range",
        ):
            consume(s, p, o)
        elif s[0] == "iri" and s[1] in individuals and p[0] == "iri" and o[0] == "lit" and p[1] in declared_props:
            consume(s, p, o)
        elif p == ("iri", RDFS_NS + "label") and s[0] == "iri" and (s[1] in individuals or objects(s, RDF_NS + "type")):
            consume(s, p, o)

    unknown = len(triples) - len(consumed)
    return OntologySkeleton(
        classes=classes,
        direct_instances=direct_instances,
        individual_count=len(individuals),
        unknown_triple_count=unknown,
    )


def _local_name(iri: str) -> str:
    for sep in ("#", "/", ":"):
        if sep in iri:
            return iri.rsplit(sep, 1)[1] or iri
    return iri


def skeleton_from_taxonomy(tax: Taxonomy) -> OntologySkeleton:
    """Native taxonomy viewed through the same skeleton the importer builds:
    concept extensions play the role of instance sets."""
    classes: dict[str, SkeletonClass] = {}
    direct: dict[str, set] = {}
    for cid, concept in tax.concepts.items():
        restrictions: list[SkeletonRestriction] = []
        kinds: list[str] = []
        expr = concept.expr
        if isinstance(expr, Restrict):
            kinds.append("restrict")
            for r in expr.restrictions:
                if r.op in FACET_BY_OP:
                    restrictions.append(
                        SkeletonRestriction(r.column, FACET_BY_OP[r.op], _lexical(r.value))
                    )
                elif r.op == "=":
                    restrictions.append(SkeletonRestriction(r.column, "oneOf", (str(r.value),)))
                else:
                    restrictions.append(
                        SkeletonRestriction(r.column, "oneOf", tuple(sorted(r.value)))
                    )
        elif isinstance(expr, Union):
            kinds.append("union")
        elif isinstance(expr, Intersection):
            kinds.append("intersection")
        elif isinstance(expr, Complement):
            kinds.append("complement")
        classes[cid] = SkeletonClass(
            iri=cid,
            label=concept.label,
            parents=set(concept.parents),
            restrictions=restrictions,
            expression_kinds=kinds,
        )
        direct[cid] = set(concept.extension)
    total = tax.table.row_count
    return OntologySkeleton(
        classes=classes,
        direct_instances=direct,
        individual_count=total,
        unknown_triple_count=0,
        instances_closed=True,
    )


def _lexical(value: Any) -> str:
    if isinstance(value, date):
        return value.isoformat()
    if isinstance(value, float):
        return format_number(value)
    return str(value)
