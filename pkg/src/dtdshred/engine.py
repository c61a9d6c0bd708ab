"""XInsert: shred a DOM tree into relational tuples in linear time.

The outer queue ``q`` holds non-inlinable element instances, one tuple per
dequeued element.  For each of them an inner queue ``r`` walks the
descendants that are inlined into the same tuple and discovers the next
non-inlinable elements, which receive their EID at discovery time.  This
numbers the non-inlinable skeleton breadth-first, root = 1.
"""

from __future__ import annotations

import itertools
import logging
import time
from collections import deque
from dataclasses import dataclass

from .dom import DOMTree
from .dtd import DTDGraph, edge_label
from .errors import DuplicateChild, MissingColumn, UnknownAttribute, UnknownElement
from .schema import (
    EDGE_TABLE,
    FK_EID,
    NODETYPE,
    PARENT_ID,
    PARENT_TYPE,
    RelationalSchema,
    Strategy,
)

log = logging.getLogger(__name__)


class Tuple:
    """One relational row: values aligned with ``columns``; ``None`` is NULL."""

    __slots__ = ("table", "columns", "values")

    def __init__(self, table, columns, values):
        self.table = table
        self.columns = columns
        self.values = values

    def items(self):
        return list(zip(self.columns, self.values))

    def as_dict(self):
        return dict(zip(self.columns, self.values))

    def __eq__(self, other):
        if not isinstance(other, Tuple):
            return NotImplemented
        return (self.table, tuple(self.columns), tuple(self.values)) == (
            other.table, tuple(other.columns), tuple(other.values))

    def __repr__(self):
        return f"Tuple({self.table}, {tuple(self.values)!r})"


@dataclass(frozen=True)
class EdgeRow:
    parent_id: int
    child_id: int
    parent_type: str
    child_type: str

    def as_tuple(self):
        return Tuple(EDGE_TABLE.name, EDGE_TABLE.column_names,
                     [self.parent_id, self.child_id, self.parent_type, self.child_type])


class IdGenerator:
    """Hands out 1, 2, 3, ...; ``itertools.count`` keeps it atomic under the GIL."""

    def __init__(self, start=1):
        self._counter = itertools.count(start)

    def gen_id(self):
        return next(self._counter)

    __call__ = gen_id


def gen_id(ids: IdGenerator):
    return ids.gen_id()


@dataclass
class ShredStats:
    q_enqueues: int = 0
    r_enqueues: int = 0
    tuples_emitted: int = 0
    edge_rows: int = 0
    elapsed: float = 0.0

    def as_dict(self):
        return {
            "q_enqueues": self.q_enqueues,
            "r_enqueues": self.r_enqueues,
            "tuples_emitted": self.tuples_emitted,
            "edge_rows": self.edge_rows,
            "elapsed": self.elapsed,
        }


class _TablePlan:
    __slots__ = ("name", "columns", "width", "nodetype", "parent_id", "parent_type")

    def __init__(self, table):
        self.name = table.name
        self.columns = table.column_names
        self.width = len(self.columns)
        roles = {c.role: i for i, c in enumerate(table.columns)}
        self.nodetype = roles.get(NODETYPE)
        self.parent_id = roles.get(PARENT_ID)
        self.parent_type = roles.get(PARENT_TYPE)


class _Plan:
    """Column positions resolved once per (graph, schema) pair."""

    def __init__(self, g: DTDGraph, schema: RelationalSchema):
        m = schema.mappings
        tables = {t.name: _TablePlan(t) for t in schema.tables}
        index = {t.name: {c: i for i, c in enumerate(t.column_names)} for t in schema.tables}

        def position(element, column):
            try:
                return index[m.sigma[element]][column]
            except KeyError:
                raise MissingColumn(f"{m.sigma.get(element)}.{column} for {element!r}") from None

        self.table_of = {}
        for elem in g.nodes:
            if elem not in schema.inlinable:
                if elem not in m.sigma:
                    raise MissingColumn(f"no table for element {elem!r}")
                self.table_of[elem] = tables[m.sigma[elem]]
        self.attr_pos = {k: position(k[0], col) for k, col in m.theta.items()}
        self.leaf_pos = {e: position(e, col) for e, col in m.delta.items()}
        self.fk_pos = {k: position(k[0], col) for k, col in m.fk.items()}
        for (p, c), col in m.fk.items():
            if schema.table(m.sigma[p]).columns[self.fk_pos[(p, c)]].role != FK_EID:
                raise MissingColumn(f"{col} is not a foreign key column")
        self.inlinable = schema.inlinable
        self.known = frozenset(g.nodes)
        self.labels = {(p, c): lab for p, c, lab in g.edges}
        self.shared = schema.strategy is Strategy.SHARED
        if not self.shared and schema.edge_table is None:
            raise MissingColumn("DTDMAP schema without an Edge table")
        if self.shared:
            for elem, plan in self.table_of.items():
                if any(g.label(p, elem) == "*" for p in g.parents(elem)) and plan.parent_id is None:
                    raise MissingColumn(f"{plan.name} lacks parent link columns")


def _label(plan, g, parent, child):
    lab = plan.labels.get((parent, child))
    if lab is None:
        if child not in plan.known:
            raise UnknownElement(child)
        lab = edge_label(parent, child, g)  # raises NoSuchEdge
    return lab


def xinsert(t: DOMTree, g: DTDGraph, schema: RelationalSchema, sink, ids=None) -> ShredStats:
    """Shred ``t`` into ``sink`` according to ``schema``; return counters."""
    started = time.perf_counter()
    plan = _Plan(g, schema)
    ids = ids if ids is not None else IdGenerator()
    stats = ShredStats()
    write = sink.write_tuple
    inlinable, table_of = plan.inlinable, plan.table_of
    attr_pos, leaf_pos, fk_pos = plan.attr_pos, plan.leaf_pos, plan.fk_pos
    edge_columns = EDGE_TABLE.column_names

    root = t.root
    if root.name not in plan.known:
        raise UnknownElement(root.name)
    edge_label(None, root.name, g)  # document root must be the DTD root

    def put_attrs(values, node):
        for aname, aval in node.attributes:
            pos = attr_pos.get((node.name, aname))
            if pos is None:
                raise UnknownAttribute(node.name, aname)
            if values[pos] is not None:
                log.warning("repeated <%s> overwrites @%s", node.name, aname)
            values[pos] = aval

    def put_leaf(values, node):
        if node.value is None:
            return
        pos = leaf_pos.get(node.name)
        if pos is None:
            log.warning("text of non-leaf element <%s> ignored", node.name)
            return
        if values[pos] is not None:
            log.warning("repeated leaf <%s>: last value wins", node.name)
        values[pos] = node.value

    q = deque()
    root.eid = ids.gen_id()
    root.parent_eid = root.parent_node_type = None
    q.append(root)
    stats.q_enqueues += 1

    while q:
        e = q.popleft()
        tb = table_of[e.name]
        values = [None] * tb.width
        values[0] = e.eid
        if tb.nodetype is not None:
            values[tb.nodetype] = e.name
        if e.attributes:
            put_attrs(values, e)
        if not e.children:
            put_leaf(values, e)
        else:
            r = deque(e.children)
            stats.r_enqueues += len(e.children)
            while r:
                f = r.popleft()
                label = _label(plan, g, f.parent.name, f.name)
                if f.name not in inlinable:
                    f.eid = ids.gen_id()
                    f.parent_eid = e.eid
                    f.parent_node_type = e.name
                    if label != "*":
                        pos = fk_pos[(f.parent.name, f.name)]
                        if values[pos] is not None:
                            raise DuplicateChild(
                                f"<{f.parent.name}> has more than one <{f.name}> child, "
                                f"but {tb.name}.{tb.columns[pos]} holds a single EID")
                        values[pos] = f.eid
                    q.append(f)
                    stats.q_enqueues += 1
                else:
                    if f.attributes:
                        put_attrs(values, f)
                    if not f.children:
                        put_leaf(values, f)
                    else:
                        r.extend(f.children)
                        stats.r_enqueues += len(f.children)

        star_child = e.parent is not None and plan.labels[(e.parent.name, e.name)] == "*"
        if star_child and plan.shared:
            values[tb.parent_id] = e.parent_eid
            values[tb.parent_type] = e.parent_node_type
        write(Tuple(tb.name, tb.columns, values))
        stats.tuples_emitted += 1
        if star_child and not plan.shared:
            write(Tuple(EDGE_TABLE.name, edge_columns,
                        [e.parent_eid, e.eid, e.parent_node_type, e.name]))
            stats.edge_rows += 1

    stats.elapsed = time.perf_counter() - started
    return stats


def count_non_inlinable(t: DOMTree, schema: RelationalSchema):
    return sum(1 for node in t if node.name not in schema.inlinable)


def check_lemmas(stats: ShredStats, t: DOMTree, schema: RelationalSchema):
    """Compare the queue counters with counts taken directly from the tree.

    Returns ``{check name: (expected, observed, ok)}``.
    """
    expected_q = count_non_inlinable(t, schema)
    expected_r = t.element_count - 1
    return {
        "q_enqueues == non-inlinable instances": (
            expected_q, stats.q_enqueues, expected_q == stats.q_enqueues),
        "r_enqueues == elements - 1": (
            expected_r, stats.r_enqueues, expected_r == stats.r_enqueues),
    }
