"""Research-field identification from journal cross-citation counts."""

__version__ = "0.1.0"

ISOLATE = -1
