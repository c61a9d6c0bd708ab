"""Exception hierarchy shared by the parser, mapper and shredder."""


class ShredError(Exception):
    """Base class for every error raised by dtdshred."""


class DTDSyntaxError(ShredError):
    def __init__(self, message, position, text=None):
        self.position = position
        line = col = None
        if text is not None:
            line = text.count("\n", 0, position) + 1
            col = position - (text.rfind("\n", 0, position) + 1) + 1
        self.line, self.column = line, col
        where = f"line {line}, column {col}" if line else f"offset {position}"
        super().__init__(f"{message} at {where}")


class UnsupportedDeclaration(DTDSyntaxError):
    pass


class DuplicateElementDecl(ShredError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"element {name!r} declared more than once")


class UndeclaredElement(ShredError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"element {name!r} is referenced but never declared")


class MissingRoot(ShredError):
    pass


class NoSuchEdge(ShredError):
    def __init__(self, parent, child):
        self.parent, self.child = parent, child
        super().__init__(f"no DTD edge from {parent!r} to {child!r}")


class NameCollisionUnresolvable(ShredError):
    pass


class MalformedXML(ShredError):
    def __init__(self, message, position=None):
        self.position = position
        super().__init__(message)


class EmptyDocument(ShredError):
    pass


class UnknownElement(ShredError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"element {name!r} does not appear in the DTD")


class UnknownAttribute(ShredError):
    def __init__(self, element, attr):
        self.element, self.attr = element, attr
        super().__init__(f"attribute {attr!r} is not declared for element {element!r}")


class DuplicateChild(ShredError):
    """A single-valued foreign key column would be overwritten."""


class MissingColumn(ShredError):
    pass


class UnknownTable(ShredError):
    def __init__(self, table):
        self.table = table
        super().__init__(f"table {table!r} is not part of the sink's schema")


class TargetTooSmall(ShredError):
    pass
