"""Myopic and batch facility placement for the average-distance functional."""

__version__ = "0.1.0"
