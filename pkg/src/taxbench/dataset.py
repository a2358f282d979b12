"""Tabular data handling: CSV/TSV loading, column-kind inference, column
statistics, and numeric encoding of selected columns for clustering.

Cell values are ``float`` (numerical), ``datetime.date`` (date), ``str``
(categorical / identifier) or ``None`` (missing). Tables are immutable after
load; kind or inclusion changes produce a new ``Table`` re-parsed from the
raw cells.
"""

from __future__ import annotations

import csv
import io
import math
import os
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import date, datetime
from typing import Any, BinaryIO, Iterable, Mapping, Sequence

import numpy as np

from .errors import NotFoundError, ValidationError

KINDS = ("numerical", "date", "categorical", "identifier")

#: cell spellings treated as missing (case-insensitive)
MISSING_MARKERS = frozenset({"", "na", "n/a", "nan", "null", "none"})

#: parse rate required to call a column numerical or date-valued
PARSE_RATE_THRESHOLD = 0.95
#: distinct-value ratio above which a column looks identifier-like
IDENTIFIER_DISTINCT_RATIO = 0.8
#: minimum number of distinct values before the identifier rule applies
IDENTIFIER_MIN_DISTINCT = 20

_EPOCH = date(1970, 1, 1)

_DATE_FORMATS = ("%d/%m/%Y", "%m/%d/%Y", "%Y/%m/%d", "%d-%m-%Y", "%d.%m.%Y")


class TableLoadError(ValidationError):
    """Raised when a CSV/TSV source cannot be turned into a Table."""


class EncodingError(ValidationError):
    """Raised when a feature matrix cannot be built from the requested rows/columns."""


def is_missing(raw: str) -> bool:
    return raw.strip().lower() in MISSING_MARKERS


def parse_number(raw: str) -> float | None:
    """Parse a decimal number, rejecting non-finite spellings and separators."""
    text = raw.strip()
    if not text or "_" in text:
        return None
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def parse_date(raw: str) -> date | None:
    """Parse ISO-8601 first, then a short list of common day-first/US formats."""
    text = raw.strip()
    if not text:
        return None
    try:
        return date.fromisoformat(text)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(text).date()
    except ValueError:
        pass
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(text, fmt).date()
        except ValueError:
            continue
    return None


def date_to_days(value: date) -> float:
    """Days since 1970-01-01, the numeric form used for stats and clustering."""
    return float((value - _EPOCH).days)


def format_number(value: float) -> str:
    """Round-trip decimal text without scientific notation (xsd:decimal safe)."""
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    text = repr(value)
    if "e" in text or "E" in text:
        text = format(value, ".17f").rstrip("0")
        if text.endswith("."):
            text += "0"
    return text


def format_cell(value: Any) -> str:
    """Canonical text form of a parsed cell (inverse of per-kind parsing)."""
    if value is None:
        return ""
    if isinstance(value, float):
        return format_number(value)
    if isinstance(value, date):
        return value.isoformat()
    return str(value)


@dataclass(frozen=True)
class ColumnStats:
    """Summary statistics of one column; numeric fields are None for
    categorical columns and vice versa (and when every value is missing)."""

    missing_count: int
    minimum: Any = None
    maximum: Any = None
    mean: float | None = None
    std: float | None = None
    value_counts: Mapping[str, int] | None = None
    distinct_count: int | None = None


@dataclass(frozen=True)
class ColumnMeta:
    name: str
    kind: str
    included: bool
    stats: ColumnStats


@dataclass(frozen=True)
class Table:
    """An immutable loaded dataset: parsed rows plus per-column metadata.

    Row ids are the 0-based positions in ``rows`` and stay stable for the
    session. ``raw_rows`` keeps the original cell text so that a column can
    be re-parsed when the user overrides its inferred kind.
    """

    name: str
    columns: tuple[ColumnMeta, ...]
    rows: tuple[tuple[Any, ...], ...]
    raw_rows: tuple[tuple[str, ...], ...] = field(repr=False)

    @property
    def row_count(self) -> int:
        return len(self.rows)

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column_index(self, name: str) -> int:
        for i, col in enumerate(self.columns):
            if col.name == name:
                return i
        raise NotFoundError(f"unknown column: {name!r}")

    def column(self, name: str) -> ColumnMeta:
        return self.columns[self.column_index(name)]

    def values(self, name: str, rows: Iterable[int] | None = None) -> list[Any]:
        """Parsed cells of one column, over all rows or a row-id subset."""
        idx = self.column_index(name)
        ids = range(self.row_count) if rows is None else sorted(rows)
        return [self.rows[r][idx] for r in ids]


@dataclass(frozen=True)
class LoadOptions:
    delimiter: str | None = None
    quotechar: str = '"'
    name: str | None = None
    #: column-kind/inclusion overrides: {column_name: {"kind": ..., "included": ...}}
    columns: Mapping[str, Mapping[str, Any]] | None = None


@dataclass(frozen=True)
class Feature:
    """One feature-matrix column traced back to its table column."""

    column: str
    encoding: str  # "zscore" | "zscore_days" | "onehot"
    category: str | None = None


@dataclass(frozen=True)
class FeatureMatrix:
    """Numeric encoding of a row subset: z-scored numeric/date columns and
    one-hot categorical values. Rows with a missing value in any used column
    are omitted from the matrix but reported in ``omitted_row_ids``."""

    matrix: np.ndarray
    feature_map: tuple[Feature, ...]
    row_ids: tuple[int, ...]
    omitted_row_ids: tuple[int, ...]

    @property
    def n_features(self) -> int:
        return len(self.feature_map)


def infer_column_kind(values: Sequence[str], name: str) -> str:
    """Classify a column from its raw cells.

    Mostly-parseable numbers win, except all-integer columns whose values are
    nearly all distinct (sequence ids); then dates; then the distinct-ratio
    rule for text identifiers; everything else is categorical. Empty evidence
    defaults to categorical.
    """
    non_missing = [v.strip() for v in values if not is_missing(v)]
    if not non_missing:
        return "categorical"
    n = len(non_missing)
    distinct = len(set(non_missing))
    looks_unique = distinct / n >= IDENTIFIER_DISTINCT_RATIO and distinct >= IDENTIFIER_MIN_DISTINCT

    numbers = [x for x in (parse_number(v) for v in non_missing) if x is not None]
    if len(numbers) / n >= PARSE_RATE_THRESHOLD:
        if looks_unique and all(x.is_integer() for x in numbers):
            return "identifier"
        return "numerical"
    dates = sum(1 for v in non_missing if parse_date(v) is not None)
    if dates / n >= PARSE_RATE_THRESHOLD:
        return "date"
    if looks_unique:
        return "identifier"
    return "categorical"


def _parse_cell(raw: str, kind: str) -> Any:
    if is_missing(raw):
        return None
    if kind == "numerical":
        return parse_number(raw)
    if kind == "date":
        return parse_date(raw)
    return raw.strip()


def _column_stats(cells: Sequence[Any], kind: str) -> ColumnStats:
    missing = sum(1 for c in cells if c is None)
    present = [c for c in cells if c is not None]
    if kind in ("numerical", "date"):
        if not present:
            return ColumnStats(missing_count=missing)
        as_days = [date_to_days(c) if isinstance(c, date) else float(c) for c in present]
        arr = np.asarray(as_days, dtype=float)
        return ColumnStats(
            missing_count=missing,
            minimum=min(present),
            maximum=max(present),
            mean=float(arr.mean()),
            std=float(arr.std()),  # population std: defined for a single row
        )
    counts = Counter(str(c) for c in present)
    return ColumnStats(
        missing_count=missing,
        value_counts=dict(sorted(counts.items())),
        distinct_count=len(counts),
    )


def column_stats(table: Table, column: str, rows: Iterable[int] | None = None) -> ColumnStats:
    """Statistics of one column, over the whole table or a row-id subset
    (the per-concept statistics panel uses the subset form)."""
    meta = table.column(column)
    return _column_stats(table.values(column, rows), meta.kind)


def _read_text(source: bytes | str | os.PathLike | BinaryIO) -> tuple[str, str]:
    """Return (text, default_name) of a CSV source given as bytes, path or stream."""
    name = "dataset"
    if isinstance(source, (str, os.PathLike)):
        name = os.path.splitext(os.path.basename(os.fspath(source)))[0]
        with open(source, "rb") as fh:
            payload = fh.read()
    elif isinstance(source, bytes):
        payload = source
    else:
        payload = source.read()
        stream_name = getattr(source, "name", None)
        if isinstance(stream_name, str):
            name = os.path.splitext(os.path.basename(stream_name))[0]
    if isinstance(payload, str):  # text stream
        return payload, name
    try:
        return payload.decode("utf-8"), name
    except UnicodeDecodeError as exc:
        line = payload[: exc.start].count(b"\n") + 1
        raise TableLoadError(f"line {line}: undecodable bytes (not UTF-8) at offset {exc.start}") from exc


def load_table(
    source: bytes | str | os.PathLike | BinaryIO,
    format: str = "csv",
    options: LoadOptions | None = None,
) -> Table:
    """Load a CSV/TSV source into a Table.

    The first row must contain unique column names. Short rows are padded
    with missing cells; rows longer than the header are rejected. Column
    kinds are inferred from the raw cells and may be overridden via
    ``options.columns`` before parsing.
    """
    if format not in ("csv", "tsv"):
        raise TableLoadError(f"unsupported format: {format!r}")
    opts = options or LoadOptions()
    text, default_name = _read_text(source)
    if not text.strip():
        raise TableLoadError("empty input: no header row")

    delimiter = opts.delimiter or ("\t" if format == "tsv" else ",")
    reader = csv.reader(io.StringIO(text), delimiter=delimiter, quotechar=opts.quotechar)
    try:
        header = next(reader)
    except StopIteration:
        raise TableLoadError("empty input: no header row") from None
    header = [h.strip() for h in header]
    if any(not h for h in header):
        raise TableLoadError("header row contains an unnamed column")
    dupes = [name for name, count in Counter(header).items() if count > 1]
    if dupes:
        raise TableLoadError(f"duplicate column names: {', '.join(sorted(dupes))}")

    width = len(header)
    raw_rows: list[tuple[str, ...]] = []
    for record in reader:
        if not record:
            continue
        if len(record) > width:
            raise TableLoadError(
                f"row {reader.line_num}: {len(record)} cells but only {width} columns declared"
            )
        if len(record) < width:
            record = record + [""] * (width - len(record))
        raw_rows.append(tuple(record))

    kinds = [infer_column_kind([row[i] for row in raw_rows], name) for i, name in enumerate(header)]
    included = [kind != "identifier" for kind in kinds]
    overrides = opts.columns or {}
    for col_name, override in overrides.items():
        if col_name not in header:
            raise TableLoadError(f"column config references unknown column: {col_name!r}")
        i = header.index(col_name)
        if "kind" in override:
            kind = override["kind"]
            if kind not in KINDS:
                raise TableLoadError(f"column {col_name!r}: unknown kind {kind!r}")
            kinds[i] = kind
        if "included" in override:
            included[i] = bool(override["included"])

    return _build_table(opts.name or default_name, header, kinds, included, raw_rows)


def _build_table(
    name: str,
    header: Sequence[str],
    kinds: Sequence[str],
    included: Sequence[bool],
    raw_rows: Sequence[tuple[str, ...]],
) -> Table:
    rows = tuple(
        tuple(_parse_cell(row[i], kinds[i]) for i in range(len(header))) for row in raw_rows
    )
    columns = []
    for i, col_name in enumerate(header):
        cells = [row[i] for row in rows]
        stats = _column_stats(cells, kinds[i])
        include = included[i] and kinds[i] != "identifier"
        columns.append(ColumnMeta(name=col_name, kind=kinds[i], included=include, stats=stats))
    return Table(name=name, columns=tuple(columns), rows=rows, raw_rows=tuple(raw_rows))


def set_column_kind(table: Table, column: str, kind: str) -> Table:
    """New table with one column re-parsed under a user-chosen kind."""
    if kind not in KINDS:
        raise ValidationError(f"unknown kind: {kind!r}")
    idx = table.column_index(column)
    kinds = [c.kind for c in table.columns]
    included = [c.included for c in table.columns]
    kinds[idx] = kind
    if kind == "identifier":
        included[idx] = False
    return _build_table(table.name, table.column_names, kinds, included, table.raw_rows)


def set_column_included(table: Table, column: str, include: bool) -> Table:
    """New table with one column's participation flag changed."""
    idx = table.column_index(column)
    meta = table.columns[idx]
    if include and meta.kind == "identifier":
        raise ValidationError(f"column {column!r} is an identifier and cannot be included")
    columns = list(table.columns)
    columns[idx] = replace(meta, included=include)
    return Table(name=table.name, columns=tuple(columns), rows=table.rows, raw_rows=table.raw_rows)


def apply_column_config(table: Table, config: Mapping[str, Mapping[str, Any]]) -> Table:
    """Apply a {column: {kind, included}} override document to a loaded table."""
    for col_name, override in config.items():
        if "kind" in override:
            table = set_column_kind(table, col_name, override["kind"])
        if "included" in override:
            table = set_column_included(table, col_name, bool(override["included"]))
    return table


def write_csv(table: Table, delimiter: str = ",") -> str:
    """Serialize parsed cells back to CSV with canonical number/date text."""
    out = io.StringIO()
    writer = csv.writer(out, delimiter=delimiter, lineterminator="\n")
    writer.writerow(table.column_names)
    for row in table.rows:
        writer.writerow([format_cell(cell) for cell in row])
    return out.getvalue()


def usable_columns(table: Table, exclude: Iterable[str] = ()) -> list[ColumnMeta]:
    """Columns that participate in clustering: included, not excluded, not identifiers."""
    excluded = set(exclude)
    return [
        c
        for c in table.columns
        if c.included and c.kind in ("numerical", "date", "categorical") and c.name not in excluded
    ]


def encode_for_clustering(
    table: Table,
    rows: Iterable[int] | None = None,
    exclude: Iterable[str] = (),
) -> FeatureMatrix:
    """Encode a row subset as a dense float matrix.

    Numerical and date columns are z-scored over the kept rows (dates via
    epoch days, population std, zero std clamped to 1); categorical columns
    are one-hot over their distinct values among the kept rows. Rows missing
    a value in any used column are omitted and reported.
    """
    row_ids = sorted(rows) if rows is not None else list(range(table.row_count))
    for r in row_ids:
        if not 0 <= r < table.row_count:
            raise EncodingError(f"row id {r} outside 0..{table.row_count - 1}")
    cols = usable_columns(table, exclude)
    if not cols:
        raise EncodingError("no usable columns: need an included, non-identifier column")
    col_idx = {c.name: table.column_index(c.name) for c in cols}

    kept, omitted = [], []
    for r in row_ids:
        row = table.rows[r]
        if any(row[col_idx[c.name]] is None for c in cols):
            omitted.append(r)
        else:
            kept.append(r)
    if not kept:
        raise EncodingError("no usable rows: every requested row has missing values")

    features: list[Feature] = []
    blocks: list[np.ndarray] = []
    for col in cols:
        cells = [table.rows[r][col_idx[col.name]] for r in kept]
        if col.kind in ("numerical", "date"):
            values = np.array(
                [date_to_days(c) if isinstance(c, date) else float(c) for c in cells]
            )
            std = float(values.std())
            if std == 0.0:
                std = 1.0
            blocks.append(((values - values.mean()) / std)[:, None])
            encoding = "zscore_days" if col.kind == "date" else "zscore"
            features.append(Feature(column=col.name, encoding=encoding))
        else:
            categories = sorted({str(c) for c in cells})
            onehot = np.zeros((len(kept), len(categories)))
            positions = {cat: j for j, cat in enumerate(categories)}
            for i, cell in enumerate(cells):
                onehot[i, positions[str(cell)]] = 1.0
            blocks.append(onehot)
            features.extend(Feature(column=col.name, encoding="onehot", category=c) for c in categories)

    return FeatureMatrix(
        matrix=np.hstack(blocks),
        feature_map=tuple(features),
        row_ids=tuple(kept),
        omitted_row_ids=tuple(omitted),
    )
