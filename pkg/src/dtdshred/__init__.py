"""Map DTDs to relational schemas by inlining and shred XML into tuples."""

from .dom import DOMTree, ElementNode, load_document, load_file, node_count
from .dtd import DTDGraph, build_graph, edge_label, load_graph, parse_dtd
from .emitters import CsvSink, MemorySink, SqlSink, open_sink
from .engine import IdGenerator, ShredStats, Tuple, check_lemmas, xinsert
from .errors import ShredError
from .schema import RelationalSchema, Strategy, emit_ddl, is_inlinable, map_schema

__version__ = "0.1.0"
