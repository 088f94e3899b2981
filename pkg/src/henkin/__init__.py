"""Stage-by-stage Henkin constructions indexed by finite maximal antichains."""

__version__ = "0.1.0"
