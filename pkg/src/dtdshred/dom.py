"""Element-only DOM tree.

Text is not modelled as separate nodes: a leaf element carries its
(whitespace-trimmed) text in ``value`` and a non-leaf element always has
``value = None``.  Namespace prefixes are kept as literal name characters.
"""

from __future__ import annotations

import logging
from xml.parsers import expat

from .errors import EmptyDocument, MalformedXML

log = logging.getLogger(__name__)


class ElementNode:
    __slots__ = ("name", "parent", "children", "attributes", "value",
                 "eid", "parent_eid", "parent_node_type")

    def __init__(self, name, parent=None, attributes=None, value=None):
        self.name = name
        self.parent = parent
        self.children = []
        self.attributes = attributes or []  # [(name, value), ...]
        self.value = value
        # written by the shredder only
        self.eid = None
        self.parent_eid = None
        self.parent_node_type = None

    @property
    def is_leaf(self):
        return not self.children

    def __repr__(self):
        return f"<ElementNode {self.name} children={len(self.children)} value={self.value!r}>"

    def iter(self):
        """Pre-order iteration over this node and its descendants."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


class DOMTree:
    def __init__(self, root, element_count, attr_count):
        self.root = root
        self.element_count = element_count
        self.attr_count = attr_count

    def __iter__(self):
        return self.root.iter()

    def reset_transient(self):
        for node in self:
            node.eid = node.parent_eid = node.parent_node_type = None


class _Builder:
    def __init__(self):
        self.root = None
        self.stack = []
        self.text = []  # text chunks per open element, parallel to stack
        self.elements = 0
        self.attributes = 0
        self.mixed_drops = 0

    def start(self, name, attrs):
        parent = self.stack[-1] if self.stack else None
        pairs = list(zip(attrs[::2], attrs[1::2]))
        node = ElementNode(name, parent, pairs)
        if parent is None:
            self.root = node
        else:
            parent.children.append(node)
        self.stack.append(node)
        self.text.append(None)
        self.elements += 1
        self.attributes += len(pairs)

    def end(self, name):
        node = self.stack.pop()
        chunks = self.text.pop()
        if chunks is None:
            return
        if node.children:
            text = "".join(chunks)
            if text.strip():
                self.mixed_drops += 1
                log.warning("dropping text inside non-leaf element <%s>: %r",
                            node.name, text.strip()[:40])
        else:
            node.value = "".join(chunks).strip()

    def data(self, text):
        chunks = self.text[-1]
        if chunks is None:
            self.text[-1] = [text]
        else:
            chunks.append(text)


def load_document(xml) -> DOMTree:
    """Parse XML text (``str`` or UTF-8 ``bytes``) into a :class:`DOMTree`."""
    if isinstance(xml, str):
        if not xml.strip():
            raise EmptyDocument("document is empty")
        xml = xml.encode("utf-8")
    elif not xml.strip():
        raise EmptyDocument("document is empty")

    b = _Builder()
    p = expat.ParserCreate()
    p.ordered_attributes = True
    p.buffer_text = True
    p.StartElementHandler = b.start
    p.EndElementHandler = b.end
    p.CharacterDataHandler = b.data
    try:
        p.Parse(xml, True)
    except expat.ExpatError as exc:
        if b.root is None and exc.code == expat.errors.codes[expat.errors.XML_ERROR_NO_ELEMENTS]:
            raise EmptyDocument("document has no root element") from None
        raise MalformedXML(f"malformed XML: {exc}", (exc.lineno, exc.offset)) from None
    return DOMTree(b.root, b.elements, b.attributes)


def load_file(path) -> DOMTree:
    with open(path, "rb") as fh:
        return load_document(fh.read())


def node_count(t: DOMTree):
    """``(elements, attributes)``; their sum is the size measure n."""
    return t.element_count, t.attr_count
