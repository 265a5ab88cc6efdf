"""Planar curve flows with global forcing and their distance-comparison certificates."""

__version__ = "0.1.0"
