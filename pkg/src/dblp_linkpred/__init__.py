"""Supervised link prediction on the DBLP co-authorship network."""

__version__ = "0.1.0"
