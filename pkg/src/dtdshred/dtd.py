"""DTD parsing and the cardinality-labelled DTD graph.

Only ELEMENT and ATTLIST declarations are understood.  Parameter entities,
general entities, NOTATION declarations and conditional sections raise
:class:`UnsupportedDeclaration`; other unknown ``<!...>`` declarations are
skipped with a warning.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import (
    DTDSyntaxError,
    DuplicateElementDecl,
    MissingRoot,
    NoSuchEdge,
    UndeclaredElement,
    UnsupportedDeclaration,
)

log = logging.getLogger(__name__)

NAME_RE = re.compile(r"[^\W\d][\w.\-:]*|[_:][\w.\-:]*")
NMTOKEN_RE = re.compile(r"[\w.\-:]+")
_WS_RE = re.compile(r"\s*")

#: Label returned by :func:`edge_label` for the (absent) parent of the root.
NO_EDGE = None


# -- content models ---------------------------------------------------------

@dataclass(frozen=True)
class Ref:
    name: str
    occ: str = "1"


@dataclass(frozen=True)
class Group:
    kind: str  # "seq" or "choice"
    items: tuple
    occ: str = "1"


@dataclass(frozen=True)
class Mixed:
    """``(#PCDATA | a | b)*``; ``names`` is empty for plain ``(#PCDATA)``."""
    names: tuple = ()


class _Keyword(str):
    pass


EMPTY = _Keyword("EMPTY")
ANY = _Keyword("ANY")

ContentModel = Union[Ref, Group, Mixed, _Keyword]


@dataclass(frozen=True)
class ElementDecl:
    name: str
    content: ContentModel
    position: int = field(default=0, compare=False)

    @property
    def is_pcdata_leaf(self):
        return isinstance(self.content, Mixed) and not self.content.names


@dataclass(frozen=True)
class AttributeDef:
    name: str
    type: str = "CDATA"
    default: str = "IMPLIED"  # REQUIRED, IMPLIED, DEFAULT or FIXED
    value: Optional[str] = None


@dataclass(frozen=True)
class AttListDecl:
    element: str
    attributes: tuple
    position: int = field(default=0, compare=False)


# -- parser -----------------------------------------------------------------

_UNSUPPORTED = ("ENTITY", "NOTATION", "DOCTYPE")


class _DTDReader:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, message, pos=None, cls=DTDSyntaxError):
        return cls(message, self.pos if pos is None else pos, self.text)

    def skip_ws(self):
        self.pos = _WS_RE.match(self.text, self.pos).end()

    def at_end(self):
        return self.pos >= len(self.text)

    def peek(self, s):
        return self.text.startswith(s, self.pos)

    def expect(self, s):
        self.skip_ws()
        if not self.peek(s):
            raise self.error(f"expected {s!r}")
        self.pos += len(s)

    def name(self, what="name"):
        self.skip_ws()
        m = NAME_RE.match(self.text, self.pos)
        if not m:
            raise self.error(f"expected {what}")
        self.pos = m.end()
        return m.group()

    def quoted(self):
        self.skip_ws()
        q = self.text[self.pos:self.pos + 1]
        if q not in ("'", '"'):
            raise self.error("expected quoted literal")
        end = self.text.find(q, self.pos + 1)
        if end < 0:
            raise self.error("unterminated literal")
        value = self.text[self.pos + 1:end]
        self.pos = end + 1
        return value

    def occurrence(self):
        c = self.text[self.pos:self.pos + 1]
        if c in ("?", "*", "+"):
            self.pos += 1
            return c
        return "1"

    def skip_decl(self):
        """Skip to the '>' closing the current declaration, honouring quotes."""
        start = self.pos
        quote = None
        while self.pos < len(self.text):
            c = self.text[self.pos]
            self.pos += 1
            if quote:
                if c == quote:
                    quote = None
            elif c in ("'", '"'):
                quote = c
            elif c == ">":
                return
        raise self.error("unterminated declaration", start)

    # content models

    def content_spec(self):
        self.skip_ws()
        for kw in (EMPTY, ANY):
            if self.peek(kw):
                self.pos += len(kw)
                return kw
        if not self.peek("("):
            raise self.error("expected content model")
        save = self.pos
        self.pos += 1
        self.skip_ws()
        if self.peek("#PCDATA"):
            self.pos += len("#PCDATA")
            return self.mixed()
        self.pos = save
        return self.group()

    def mixed(self):
        names = []
        while True:
            self.skip_ws()
            if self.peek(")"):
                self.pos += 1
                break
            self.expect("|")
            n = self.name("element name")
            if n in names:
                raise self.error(f"duplicate name {n!r} in mixed content")
            names.append(n)
        if self.peek("*"):
            self.pos += 1
        elif names:
            raise self.error("mixed content with element names must end in ')*'")
        return Mixed(tuple(names))

    def particle(self):
        self.skip_ws()
        if self.peek("("):
            return self.group()
        n = self.name("element name")
        return Ref(n, self.occurrence())

    def group(self):
        start = self.pos
        self.expect("(")
        items = [self.particle()]
        sep = None
        while True:
            self.skip_ws()
            c = self.text[self.pos:self.pos + 1]
            if c == ")":
                self.pos += 1
                break
            if c not in (",", "|"):
                raise self.error("expected ',', '|' or ')' in content model")
            if sep is None:
                sep = c
            elif c != sep:
                raise self.error("cannot mix ',' and '|' in one group")
            self.pos += 1
            items.append(self.particle())
        if self.peek("#"):
            raise self.error("#PCDATA must come first in mixed content", start)
        kind = "choice" if sep == "|" else "seq"
        return Group(kind, tuple(items), self.occurrence())

    # declarations

    def element_decl(self, start):
        name = self.name("element name")
        content = self.content_spec()
        self.expect(">")
        return ElementDecl(name, content, start)

    def attlist_decl(self, start):
        element = self.name("element name")
        attrs = []
        while True:
            self.skip_ws()
            if self.peek(">"):
                self.pos += 1
                break
            aname = self.name("attribute name")
            self.skip_ws()
            if self.peek("("):
                atype = self.enumeration()
            else:
                atype = self.name("attribute type")
                if atype == "NOTATION":
                    self.skip_ws()
                    atype = "NOTATION " + self.enumeration()
                elif atype not in ("CDATA", "ID", "IDREF", "IDREFS", "ENTITY",
                                   "ENTITIES", "NMTOKEN", "NMTOKENS"):
                    raise self.error(f"unknown attribute type {atype!r}")
            self.skip_ws()
            if self.peek("#REQUIRED"):
                self.pos += len("#REQUIRED")
                attrs.append(AttributeDef(aname, atype, "REQUIRED"))
            elif self.peek("#IMPLIED"):
                self.pos += len("#IMPLIED")
                attrs.append(AttributeDef(aname, atype, "IMPLIED"))
            elif self.peek("#FIXED"):
                self.pos += len("#FIXED")
                attrs.append(AttributeDef(aname, atype, "FIXED", self.quoted()))
            else:
                attrs.append(AttributeDef(aname, atype, "DEFAULT", self.quoted()))
        return AttListDecl(element, tuple(attrs), start)

    def enumeration(self):
        self.expect("(")
        tokens = []
        while True:
            self.skip_ws()
            m = NMTOKEN_RE.match(self.text, self.pos)
            if not m:
                raise self.error("expected enumeration value")
            tokens.append(m.group())
            self.pos = m.end()
            self.skip_ws()
            if self.peek(")"):
                self.pos += 1
                return "(" + "|".join(tokens) + ")"
            self.expect("|")

    def parse(self):
        elements, attlists = [], []
        seen = set()
        while True:
            self.skip_ws()
            if self.at_end():
                break
            start = self.pos
            if self.peek("<!--"):
                end = self.text.find("-->", self.pos + 4)
                if end < 0:
                    raise self.error("unterminated comment")
                self.pos = end + 3
            elif self.peek("<?"):
                end = self.text.find("?>", self.pos + 2)
                if end < 0:
                    raise self.error("unterminated processing instruction")
                self.pos = end + 2
            elif self.peek("<!["):
                raise self.error("conditional sections are not supported",
                                 cls=UnsupportedDeclaration)
            elif self.peek("%"):
                raise self.error("parameter entity references are not supported",
                                 cls=UnsupportedDeclaration)
            elif self.peek("<!"):
                self.pos += 2
                m = NAME_RE.match(self.text, self.pos)
                kind = m.group() if m else ""
                self.pos += len(kind)
                if kind == "ELEMENT":
                    decl = self.element_decl(start)
                    if decl.name in seen:
                        raise DuplicateElementDecl(decl.name)
                    seen.add(decl.name)
                    elements.append(decl)
                elif kind == "ATTLIST":
                    attlists.append(self.attlist_decl(start))
                elif kind in _UNSUPPORTED:
                    raise self.error(f"<!{kind}> declarations are not supported", start,
                                     cls=UnsupportedDeclaration)
                else:
                    self.skip_decl()
                    log.warning("skipping unknown declaration <!%s at offset %d", kind, start)
            else:
                raise self.error("expected a markup declaration")
        return elements, attlists


def parse_dtd(text):
    """Parse DTD source into ``(element_decls, attlist_decls)``."""
    return _DTDReader(text).parse()


# -- graph ------------------------------------------------------------------

def _child_labels(content, all_names):
    """Effective cardinality of every distinct child in a content model.

    A child is '*' if it sits under any '*' or '+' marker or occurs more than
    once, otherwise '?' if it sits under '?' or inside a choice, otherwise '1'.
    """
    if content is EMPTY:
        return {}
    if content is ANY:
        return {n: "*" for n in all_names}
    if isinstance(content, Mixed):
        return {n: "*" for n in content.names}

    hits = {}  # name -> list of (many, optional)

    def walk(node, many, optional):
        many = many or node.occ in ("*", "+")
        optional = optional or node.occ == "?"
        if isinstance(node, Ref):
            hits.setdefault(node.name, []).append((many, optional))
            return
        in_choice = node.kind == "choice" and len(node.items) > 1
        for item in node.items:
            walk(item, many, optional or in_choice)

    walk(content, False, False)
    labels = {}
    for name, occ in hits.items():
        if len(occ) > 1 or any(m for m, _ in occ):
            labels[name] = "*"
        elif occ[0][1]:
            labels[name] = "?"
        else:
            labels[name] = "1"
    return labels


def _cyclic_components(nodes, children):
    """Map each node to an SCC id; return (scc_of, set of cyclic scc ids)."""
    index, low, scc_of = {}, {}, {}
    stack, on_stack = [], set()
    counter = [0]
    cyclic = set()

    for start in nodes:
        if start in index:
            continue
        # iterative Tarjan
        work = [(start, iter(children[start]))]
        index[start] = low[start] = counter[0]
        counter[0] += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(children[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                members = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc_of[w] = v
                    members.append(w)
                    if w == v:
                        break
                if len(members) > 1 or v in children[v]:
                    cyclic.add(v)
    return scc_of, cyclic


@dataclass(frozen=True)
class DTDGraph:
    """Element types as nodes, parent->child edges labelled '1', '?' or '*'.

    Edges whose endpoints lie on a common cycle are always labelled '*'.
    """
    nodes: tuple
    root: str
    edges: tuple  # ((parent, child, label), ...) in declaration order
    attrs: dict  # element -> tuple of AttributeDef
    leaf: dict  # element -> bool
    mixed: frozenset = frozenset()
    cyclic: frozenset = frozenset()

    def __post_init__(self):
        labels = {(p, c): lab for p, c, lab in self.edges}
        children, parents = {n: [] for n in self.nodes}, {n: [] for n in self.nodes}
        for p, c, _ in self.edges:
            children[p].append(c)
            parents[c].append(p)
        object.__setattr__(self, "_labels", labels)
        object.__setattr__(self, "_children", {k: tuple(v) for k, v in children.items()})
        object.__setattr__(self, "_parents", {k: tuple(v) for k, v in parents.items()})

    def label(self, parent, child):
        return self._labels.get((parent, child))

    def children(self, node):
        return self._children[node]

    def parents(self, node):
        return self._parents[node]

    def has_node(self, node):
        return node in self._children


def infer_root(decls):
    """First declared element that no other element lists as a child."""
    names = [d.name for d in decls]
    referenced = set()
    for d in decls:
        referenced.update(c for c in _child_labels(d.content, names) if c != d.name)
    for n in names:
        if n not in referenced:
            return n
    raise MissingRoot("every element is some other element's child; pass a root explicitly")


def build_graph(decls, attlists=(), root=None):
    """Build the :class:`DTDGraph` for ``root`` (inferred when omitted)."""
    names = [d.name for d in decls]
    declared = set(names)
    if root is None:
        if not decls:
            raise MissingRoot("empty DTD has no root element")
        root = infer_root(decls)
    if root not in declared:
        raise MissingRoot(f"root element {root!r} is not declared")

    raw = []
    leaf, mixed = {}, set()
    for d in decls:
        labels = _child_labels(d.content, names)
        for child, lab in labels.items():
            if child not in declared:
                raise UndeclaredElement(child)
            raw.append((d.name, child, lab))
        leaf[d.name] = d.is_pcdata_leaf or d.content is EMPTY
        if isinstance(d.content, Mixed) and d.content.names:
            mixed.add(d.name)

    children = {n: [] for n in names}
    for p, c, _ in raw:
        children[p].append(c)
    scc_of, cyclic_sccs = _cyclic_components(names, children)
    cyclic = frozenset(n for n in names if scc_of[n] in cyclic_sccs)
    edges = tuple(
        (p, c, "*" if p in cyclic and scc_of[p] == scc_of[c] else lab)
        for p, c, lab in raw
    )

    attrs = {n: [] for n in names}
    for al in attlists:
        if al.element not in declared:
            log.warning("ATTLIST for undeclared element %r ignored", al.element)
            continue
        have = {a.name for a in attrs[al.element]}
        for a in al.attributes:
            if a.name in have:
                log.warning("duplicate attribute %s/@%s ignored", al.element, a.name)
                continue
            have.add(a.name)
            attrs[al.element].append(a)

    return DTDGraph(
        nodes=tuple(names),
        root=root,
        edges=edges,
        attrs={k: tuple(v) for k, v in attrs.items()},
        leaf=leaf,
        mixed=frozenset(mixed),
        cyclic=cyclic,
    )


def edge_label(parent, child, g):
    """Label of the edge ``parent -> child``; ``NO_EDGE`` for the root's parent."""
    if parent is None:
        if child == g.root:
            return NO_EDGE
        raise NoSuchEdge(parent, child)
    lab = g.label(parent, child)
    if lab is None:
        raise NoSuchEdge(parent, child)
    return lab


def load_graph(text, root=None):
    decls, attlists = parse_dtd(text)
    return build_graph(decls, attlists, root)

