"""Inlining-based mapping from a :class:`DTDGraph` to a relational schema.

An element type is *inlinable* when it has exactly one parent type, its
incoming edge is labelled '1' or '?', and it does not sit on a cycle.
Inlinable elements are stored in the table of their nearest non-inlinable
ancestor (their *host*); every other element type owns a table.

Two strategies share that rule and differ only in how '*' parent links are
stored:

``DTDMAP``
    one global ``Edge(parentID, childID, parentType, childType)`` table.
``SHARED``
    ``parentID`` / ``parentType`` columns in the child's own table.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from types import MappingProxyType

from .dtd import DTDGraph
from .errors import NameCollisionUnresolvable


class Strategy(str, enum.Enum):
    DTDMAP = "dtdmap"
    SHARED = "shared"


# column roles
ID = "ID"
NODETYPE = "NODETYPE"
PARENT_ID = "PARENT_ID"
PARENT_TYPE = "PARENT_TYPE"
XML_ATTR = "XML_ATTR"
LEAF_VALUE = "LEAF_VALUE"
FK_EID = "FK_EID"
CHILD_ID = "CHILD_ID"
CHILD_TYPE = "CHILD_TYPE"

INTEGER_ROLES = frozenset({ID, PARENT_ID, FK_EID, CHILD_ID})

SQL_RESERVED = frozenset("""
ADD ALL ALTER AND ANY AS ASC BETWEEN BY CASE CAST CHECK COLUMN CONSTRAINT
CREATE CROSS CURRENT CURRENT_DATE CURRENT_TIME CURRENT_TIMESTAMP CURRENT_USER
DATE DEFAULT DELETE DESC DISTINCT DROP ELSE END ESCAPE EXCEPT EXISTS FALSE
FETCH FOR FOREIGN FROM FULL GRANT GROUP HAVING IN INDEX INNER INSERT
INTERSECT INTERVAL INTO IS JOIN KEY LEFT LIKE LIMIT NATURAL NOT NULL OF
OFFSET ON OR ORDER OUTER PRIMARY REFERENCES RIGHT ROW ROWS SELECT SET SOME
TABLE THEN TIME TIMESTAMP TO TRUE UNION UNIQUE UPDATE USER USING VALUE
VALUES VIEW WHEN WHERE WITH
""".split())

_UNSAFE_RE = re.compile(r"[^0-9A-Za-z_]")

EDGE_TABLE_NAME = "Edge"


@dataclass(frozen=True)
class Column:
    name: str
    role: str
    source: str | None = None  # element the value comes from

    @property
    def is_integer(self):
        return self.role in INTEGER_ROLES


@dataclass(frozen=True)
class TableDef:
    name: str
    columns: tuple
    hosts: tuple = ()  # owner element first, then inlined elements

    @property
    def owner(self):
        return self.hosts[0] if self.hosts else None

    @property
    def column_names(self):
        return tuple(c.name for c in self.columns)

    def has_role(self, role):
        return any(c.role == role for c in self.columns)


EDGE_TABLE = TableDef(
    EDGE_TABLE_NAME,
    (
        Column("parentID", PARENT_ID),
        Column("childID", CHILD_ID),
        Column("parentType", PARENT_TYPE),
        Column("childType", CHILD_TYPE),
    ),
)


@dataclass(frozen=True)
class MappingTriple:
    """The element->table, attribute->column and leaf->column functions.

    ``fk`` records the foreign key column a host table carries for a
    non-inlinable child reached through a '1' or '?' edge, keyed by
    ``(parent element, child element)``.
    """
    sigma: MappingProxyType
    theta: MappingProxyType
    delta: MappingProxyType
    fk: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))


@dataclass(frozen=True)
class RelationalSchema:
    tables: tuple
    edge_table: TableDef | None
    mappings: MappingTriple
    strategy: Strategy
    inlinable: frozenset = frozenset()

    @property
    def all_tables(self):
        if self.edge_table is None:
            return self.tables
        return self.tables + (self.edge_table,)

    def table(self, name):
        for t in self.all_tables:
            if t.name == name:
                return t
        raise KeyError(name)


def sanitize(name):
    return _UNSAFE_RE.sub("_", name)


def resolve_name(proposed, taken, reserved=SQL_RESERVED, host=None):
    """Pick a column or table name that avoids ``taken`` and ``reserved``.

    Comparison is case-insensitive, as SQL identifiers are.  On a clash the
    name becomes ``<host>_<proposed>``, then gets ``_2``, ``_3``, ... appended.
    """
    taken_ci = {t.lower() for t in taken}
    reserved_ci = {r.lower() for r in reserved}

    def free(n):
        return n.lower() not in taken_ci and n.lower() not in reserved_ci

    name = sanitize(proposed)
    if free(name):
        return name
    if host is not None:
        name = sanitize(f"{host}_{proposed}")
        if free(name):
            return name
    for i in range(2, len(taken_ci) + 3):
        candidate = f"{name}_{i}"
        if free(candidate):
            return candidate
    raise NameCollisionUnresolvable(proposed)


def is_inlinable(node, g: DTDGraph):
    if node == g.root or node in g.cyclic:
        return False
    parents = g.parents(node)
    return len(parents) == 1 and g.label(parents[0], node) in ("1", "?")


def needs_node_type(node, g: DTDGraph):
    return node == g.root or len(set(g.parents(node))) > 1


def _has_star_parent(node, g):
    return any(g.label(p, node) == "*" for p in g.parents(node))


def table_name(element):
    return element[:1].upper() + element[1:]


def map_schema(g: DTDGraph, strategy=Strategy.DTDMAP, reserved=SQL_RESERVED):
    strategy = Strategy(strategy)
    inlinable = frozenset(n for n in g.nodes if is_inlinable(n, g))
    sigma, theta, delta, fk = {}, {}, {}, {}

    taken_tables = [EDGE_TABLE_NAME] if strategy is Strategy.DTDMAP else []
    tables = []
    for owner in g.nodes:
        if owner in inlinable:
            continue
        tname = resolve_name(table_name(owner), taken_tables, reserved, host=owner)
        taken_tables.append(tname)

        cols = [Column("ID", ID, owner)]
        if strategy is Strategy.SHARED and _has_star_parent(owner, g):
            cols.append(Column("parentID", PARENT_ID, owner))
            cols.append(Column("parentType", PARENT_TYPE, owner))
        if needs_node_type(owner, g):
            cols.append(Column("nodeType", NODETYPE, owner))
        hosts = [owner]

        def add(proposed, role, source):
            name = resolve_name(proposed, [c.name for c in cols], reserved, host=source)
            cols.append(Column(name, role, source))
            return name

        def add_element_data(elem, own_table):
            sigma[elem] = tname
            for a in g.attrs[elem]:
                theta[(elem, a.name)] = add(a.name, XML_ATTR, elem)
            if g.leaf[elem]:
                proposed = f"{elem}_value" if own_table else elem
                delta[elem] = add(proposed, LEAF_VALUE, elem)
            for child in g.children(elem):
                if child in inlinable:
                    hosts.append(child)
                    add_element_data(child, False)
                elif g.label(elem, child) != "*":
                    fk[(elem, child)] = add(f"{child}_EID", FK_EID, elem)

        add_element_data(owner, True)
        tables.append(TableDef(tname, tuple(cols), tuple(hosts)))

    mappings = MappingTriple(
        MappingProxyType(sigma), MappingProxyType(theta),
        MappingProxyType(delta), MappingProxyType(fk),
    )
    edge = EDGE_TABLE if strategy is Strategy.DTDMAP else None
    return RelationalSchema(tuple(tables), edge, mappings, strategy, inlinable)


def emit_ddl(schema: RelationalSchema):
    """One ``CREATE TABLE`` statement per line, Edge last."""
    lines = []
    for t in schema.all_tables:
        cols = ", ".join(
            f"{c.name} {'INTEGER' if c.is_integer else 'TEXT'}" for c in t.columns
        )
        lines.append(f"CREATE TABLE {t.name} ({cols});\n")
    return "".join(lines)


def describe_mappings(schema: RelationalSchema):
    """Human-readable listing of the sigma/theta/delta functions."""
    m = schema.mappings
    out = [f"strategy: {schema.strategy.value}", "", "sigma (element -> table):"]
    out += [f"  {e} -> {t}" for e, t in m.sigma.items()]
    out += ["", "theta (attribute -> column):"]
    out += [f"  {e}/@{a} -> {m.sigma[e]}.{c}" for (e, a), c in m.theta.items()]
    out += ["", "delta (leaf element -> column):"]
    out += [f"  {e} -> {m.sigma[e]}.{c}" for e, c in m.delta.items()]
    if m.fk:
        out += ["", "foreign keys (parent/child -> column):"]
        out += [f"  {p}/{c} -> {m.sigma[p]}.{col}" for (p, c), col in m.fk.items()]
    return "\n".join(out) + "\n"
