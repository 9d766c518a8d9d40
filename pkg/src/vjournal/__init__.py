"""Personalised virtual-journal pipeline.

Records and readership logs go in; concordance links, an inverted index, a
citation graph and co-read statistics are derived; subscriber profiles are
evaluated into weekly newsletters and daily alerts.
"""

from ._kernels import BACKEND
from .corpus import AuthorName, BibRecord, Corpus, Kind, ingest_records, match_concordance
from .errors import LimitError, NotFoundError, QueryParseError, ValidationError, VJournalError
from .index import IndexSnapshot, build_index, evaluate_query, match_author
from .query import parse_query
from .readstats import CoReadStats, ReadLog, also_read_neighbors, compute_coread, ingest_reads
from .refgraph import CitationGraph, build_citation_graph, citations_in_window, parse_reference, resolve_reference
from .secondorder import RankedList, most_cited, most_popular, recent

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AuthorName",
    "BibRecord",
    "CitationGraph",
    "CoReadStats",
    "Corpus",
    "IndexSnapshot",
    "Kind",
    "LimitError",
    "NotFoundError",
    "QueryParseError",
    "RankedList",
    "ReadLog",
    "VJournalError",
    "ValidationError",
    "also_read_neighbors",
    "build_citation_graph",
    "build_index",
    "citations_in_window",
    "compute_coread",
    "evaluate_query",
    "ingest_reads",
    "ingest_records",
    "match_author",
    "match_concordance",
    "most_cited",
    "most_popular",
    "parse_query",
    "parse_reference",
    "recent",
    "resolve_reference",
]
