"""Tuple sinks: per-table CSV files, a SQL INSERT script, and in-memory sinks.

CSV dialect: UTF-8 without BOM, LF line ends, comma separated, header row,
RFC 4180 quoting.  NULL is an empty unquoted field and the empty string is
written as ``""`` so the two stay distinguishable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import UnknownTable
from .schema import RelationalSchema, emit_ddl

CSV = "csv"
SQL = "sql"
DEFAULT_SQL_NAME = "shred.sql"


def csv_field(value):
    if value is None:
        return ""
    s = str(value)
    if s == "":
        return '""'
    if "," in s or '"' in s or "\n" in s or "\r" in s:
        return '"' + s.replace('"', '""') + '"'
    return s


def csv_record(values):
    return ",".join(map(csv_field, values)) + "\n"


def sql_literal(value):
    if value is None:
        return "NULL"
    if isinstance(value, int):
        return str(value)
    return "'" + str(value).replace("'", "''") + "'"


def insert_statement(table, columns, values):
    return (f"INSERT INTO {table} ({','.join(columns)}) "
            f"VALUES ({','.join(map(sql_literal, values))});\n")


@dataclass
class SinkReport:
    files: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)

    @property
    def total(self):
        return sum(self.counts.values())


class Sink:
    """Base class: tracks per-table row counts and rejects unknown tables."""

    format = None

    def __init__(self, schema: RelationalSchema):
        self.schema = schema
        self.rows_written = {t.name: 0 for t in schema.all_tables}
        self._report = None

    def write_tuple(self, tup):
        if tup.table not in self.rows_written:
            raise UnknownTable(tup.table)
        self._write(tup)
        self.rows_written[tup.table] += 1

    def _write(self, tup):
        pass

    def _close(self):
        return []

    def finalize(self):
        if self._report is None:
            self._report = SinkReport(self._close(), dict(self.rows_written))
        return self._report


class CountingSink(Sink):
    """Counts rows and drops them; used for timing."""


class MemorySink(Sink):
    def __init__(self, schema):
        super().__init__(schema)
        self.rows = {name: [] for name in self.rows_written}
        self.order = []

    def _write(self, tup):
        self.rows[tup.table].append(tuple(tup.values))
        self.order.append(tup)


class CsvSink(Sink):
    """One ``<Table>.csv`` per table, opened when its first row arrives.

    With ``emit_empty`` every declared table gets a file (header only if
    no rows) as soon as the sink opens.
    """

    format = CSV

    def __init__(self, schema, directory, emit_empty=False):
        super().__init__(schema)
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.emit_empty = emit_empty
        self._columns = {t.name: t.column_names for t in schema.all_tables}
        self._streams = {}
        if emit_empty:
            for name in self._columns:
                self._open(name)

    def path_for(self, table):
        return self.directory / f"{table}.csv"

    def _open(self, table):
        fh = open(self.path_for(table), "w", encoding="utf-8", newline="")
        fh.write(csv_record(self._columns[table]))
        self._streams[table] = fh
        return fh

    def _write(self, tup):
        fh = self._streams.get(tup.table) or self._open(tup.table)
        fh.write(csv_record(tup.values))

    def _close(self):
        files = []
        for name in self._columns:
            fh = self._streams.pop(name, None)
            if fh is not None:
                fh.close()
                files.append(str(self.path_for(name)))
        return files


class SqlSink(Sink):
    """A single script: the DDL followed by one INSERT per row."""

    format = SQL

    def __init__(self, schema, path):
        super().__init__(schema)
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w", encoding="utf-8", newline="")
        self._fh.write(emit_ddl(schema))

    def _write(self, tup):
        self._fh.write(insert_statement(tup.table, tup.columns, tup.values))

    def _close(self):
        self._fh.close()
        return [str(self.path)]


def open_sink(schema: RelationalSchema, format, destination, emit_empty=False):
    """Create a CSV sink over a directory or a SQL sink over a file.

    For SQL, a destination that is an existing directory or lacks a
    ``.sql`` suffix is treated as a directory holding ``shred.sql``.
    """
    format = format.lower()
    if format == CSV:
        return CsvSink(schema, destination, emit_empty)
    if format == SQL:
        dest = Path(destination)
        if dest.is_dir() or dest.suffix.lower() != ".sql":
            dest = dest / DEFAULT_SQL_NAME
        return SqlSink(schema, dest)
    raise ValueError(f"unknown output format {format!r}")


def write_tuple(sink: Sink, tup):
    sink.write_tuple(tup)


def finalize(sink: Sink):
    return sink.finalize()


def format_report(report: SinkReport):
    width = max((len(n) for n in report.counts), default=0)
    lines = [f"  {name:<{width}}  {n}" for name, n in report.counts.items()]
    return "\n".join(lines) + ("\n" if lines else "")


__all__ = [
    "CSV", "SQL", "Sink", "CsvSink", "SqlSink", "MemorySink", "CountingSink",
    "SinkReport", "open_sink", "write_tuple", "finalize", "csv_field",
    "csv_record", "sql_literal", "insert_statement", "format_report",
]
