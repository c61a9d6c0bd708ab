"""Synthetic, seed-deterministic XML documents (and DTDs) for testing and timing.

Documents follow the :class:`DTDGraph` rather than the original content
models: a '1' child appears once, a '?' child with probability 1/2 and a
'*' child a few times.  Growth to the requested size happens at the
shallowest element type that has a '*' child: its '*' children are
appended round-robin until the document reaches the target.

Recursive element types are bounded by halving the probability of one
more repetition at every level of recursive nesting.
"""

from __future__ import annotations

import random
from collections import deque
from xml.sax.saxutils import escape, quoteattr

from .dtd import DTDGraph
from .errors import TargetTooSmall

XML_DECL = '<?xml version="1.0" encoding="UTF-8"?>\n'
SIZE_TOLERANCE = 0.10
MAX_RECURSION = 24

WORDS = (
    "alpha", "beta", "gamma", "delta", "river", "stone", "maple", "harbor",
    "signal", "copper", "linen", "orbit", "meadow", "lantern", "quartz",
    "ember", "willow", "cobalt", "sparrow", "tundra", "café", "naïve",
)
# values that exercise CSV and SQL quoting
AWKWARD = ("a,b", 'say "hi"', "O'Neil", "x & y", "<tag>", "1,2,\"3\"")

_HOLE = object()


def _size(s):
    return len(s.encode("utf-8"))


class _DocGen:
    def __init__(self, g: DTDGraph, rng: random.Random):
        self.g = g
        self.rng = rng
        self.serial = 0

    def word_value(self):
        rng = self.rng
        if rng.random() < 0.05:
            return rng.choice(AWKWARD)
        return " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 3)))

    def attr_value(self, a, minimal):
        if a.default == "FIXED":
            return a.value
        if a.type.startswith("("):
            return self.rng.choice(a.type[1:-1].split("|"))
        if a.type.startswith("NOTATION"):
            return a.type.split("(", 1)[1][:-1].split("|")[0]
        if a.type in ("ID", "IDREF", "NMTOKEN", "ENTITY"):
            self.serial += 1
            return f"v{self.serial}"
        if minimal:
            return "x"
        return self.word_value()

    def start_tag(self, name, minimal, out):
        parts = [name]
        for a in self.g.attrs[name]:
            if a.default == "REQUIRED" or (not minimal and self.rng.random() < 0.5):
                parts.append(f"{a.name}={quoteattr(self.attr_value(a, minimal))}")
        out.append("<" + " ".join(parts))

    def repeat_count(self, parent, child, level):
        if child in self.g.cyclic and parent in self.g.cyclic:
            if level >= MAX_RECURSION:
                return 0
            p = 0.5 ** (level + 1)
            n = 0
            while n < 3 and self.rng.random() < p:
                n += 1
            return n
        return self.rng.randint(0, 3)

    def render(self, name, level, out, minimal=False, path=None):
        """Append the serialisation of one element to ``out``.

        ``path`` is the remaining chain towards the growth point; the last
        element on it gets a hole where its '*' children will go.
        """
        g = self.g
        self.start_tag(name, minimal, out)
        forced = path[0] if path else None
        is_growth_point = path is not None and not path
        children = g.children(name)
        if not children:
            if g.leaf[name] and not minimal:
                out.append(">" + escape(self.word_value()) + f"</{name}>")
            else:
                out.append("/>")
            return
        out.append(">")
        for child in children:
            label = g.label(name, child)
            if is_growth_point and label == "*":
                continue
            child_level = level + 1 if (child in g.cyclic and name in g.cyclic) else level
            if child == forced:
                self.render(child, child_level, out, minimal, path[1:])
                forced = None
                continue
            if label == "1":
                n = 1
            elif minimal:
                n = 0
            elif label == "?":
                n = 1 if self.rng.random() < 0.5 else 0
            else:
                n = self.repeat_count(name, child, level)
            for _ in range(n):
                self.render(child, child_level, out, minimal)
        if is_growth_point:
            out.append(_HOLE)
        out.append(f"</{name}>")

    def render_str(self, name, level=0, minimal=False):
        out = []
        self.render(name, level, out, minimal)
        return "".join(out)


def growth_path(g: DTDGraph):
    """Element chain from the root to the shallowest type with a '*' child."""
    prev = {g.root: None}
    queue = deque([g.root])
    while queue:
        node = queue.popleft()
        if any(g.label(node, c) == "*" for c in g.children(node)):
            path = []
            while node is not None:
                path.append(node)
                node = prev[node]
            return path[::-1]
        for c in g.children(node):
            if c not in prev:
                prev[c] = node
                queue.append(c)
    return None


def minimal_size(g: DTDGraph):
    gen = _DocGen(g, random.Random(0))
    return _size(XML_DECL + gen.render_str(g.root, minimal=True) + "\n")


def generate_document(g: DTDGraph, target_size, seed=0):
    """Return an XML document of about ``target_size`` bytes (within 10%)."""
    floor = minimal_size(g)
    if floor > target_size:
        raise TargetTooSmall(
            f"smallest document for this DTD is {floor} bytes, target is {target_size}")
    path = growth_path(g)
    gen = _DocGen(g, random.Random(seed))
    if path is None:
        return XML_DECL + gen.render_str(g.root) + "\n"

    upper = target_size * (1 + SIZE_TOLERANCE)
    out = []
    gen.render(g.root, 0, out, False, path[1:])
    hole = out.index(_HOLE)
    prefix = XML_DECL + "".join(out[:hole])
    suffix = "".join(out[hole + 1:]) + "\n"
    if _size(prefix) + _size(suffix) > upper:
        out = []
        gen.render(g.root, 0, out, True, path[1:])
        hole = out.index(_HOLE)
        prefix = XML_DECL + "".join(out[:hole])
        suffix = "".join(out[hole + 1:]) + "\n"

    growth = path[-1]
    star = [c for c in g.children(growth) if g.label(growth, c) == "*"]
    level = 0
    size = _size(prefix) + _size(suffix)
    chunks = []
    i = misses = 0
    while size < target_size and misses < 64:
        child = star[i % len(star)]
        i += 1
        child_level = level + 1 if (child in g.cyclic and growth in g.cyclic) else level
        chunk = gen.render_str(child, child_level)
        n = _size(chunk)
        if size + n > upper:
            misses += 1
            continue
        chunks.append(chunk)
        size += n
    return prefix + "".join(chunks) + suffix


# -- random DTDs ------------------------------------------------------------

_NAME_POOL = ("order", "item", "date", "name", "value", "note", "part", "group",
              "title", "key", "user", "text", "edge", "id", "row", "x-ref")
_ATTR_POOL = ("id", "name", "date", "type", "lang", "ref", "key", "value", "order")


def random_dtd(seed, n_elements=None, recursive=False):
    """Return ``(dtd_text, root_name)`` for a random well-formed DTD.

    Element and attribute names are drawn partly from a pool of SQL keywords
    and mutually colliding names to exercise column renaming.
    """
    rng = random.Random(seed)
    n = n_elements or rng.randint(4, 14)
    names = []
    pool = list(_NAME_POOL)
    rng.shuffle(pool)
    for i in range(n):
        if pool and rng.random() < 0.4:
            names.append(pool.pop())
        else:
            names.append(f"e{i}")

    kids = {nm: [] for nm in names}  # parent -> [(child, marker)]
    for i in range(1, n):
        parents = {rng.randrange(i)}
        if i > 1 and rng.random() < 0.3:
            parents.add(rng.randrange(i))
        for p in parents:
            kids[names[p]].append((names[i], rng.choice(("", "", "?", "?", "*", "+"))))
    if recursive:
        for _ in range(rng.randint(1, 3)):
            lo = rng.randrange(n)
            hi = rng.randrange(lo, n)
            if names[lo] != names[0] or rng.random() < 0.3:
                kids[names[hi]].append((names[lo], rng.choice(("?", "*", ""))))

    mixed = set()
    if recursive:
        for nm in names[1:]:
            if kids[nm] and rng.random() < 0.2:
                mixed.add(nm)

    lines = []
    for nm in names:
        ch = []
        seen = set()
        for c, m in kids[nm]:
            if c in seen:
                continue
            seen.add(c)
            ch.append((c, m))
        if not ch:
            content = "EMPTY" if rng.random() < 0.15 else "(#PCDATA)"
        elif nm in mixed:
            content = "(#PCDATA | " + " | ".join(c for c, _ in ch) + ")*"
        else:
            parts = [c + m for c, m in ch]
            if len(parts) >= 3 and rng.random() < 0.3:
                k = rng.randint(2, len(parts) - 1)
                parts = ["(" + " | ".join(parts[:k]) + ")" + rng.choice(("", "?", "*"))] + parts[k:]
            content = "(" + ", ".join(parts) + ")"
        lines.append(f"<!ELEMENT {nm} {content}>")
        attrs = rng.sample(_ATTR_POOL, rng.randint(0, 3))
        if attrs:
            defs = []
            for a in attrs:
                kind = rng.choice(("#REQUIRED", "#IMPLIED", '"dflt"', "(red|green|blue) #IMPLIED"))
                if kind.startswith("("):
                    defs.append(f"{a} {kind}")
                else:
                    defs.append(f"{a} CDATA {kind}")
            lines.append(f"<!ATTLIST {nm} " + " ".join(defs) + ">")
    return "\n".join(lines) + "\n", names[0]
