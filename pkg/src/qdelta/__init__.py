"""qdelta: mine commits, isolate modifications, measure metric impact,
and cluster modifications by impact profile."""

__version__ = "0.1.0"
