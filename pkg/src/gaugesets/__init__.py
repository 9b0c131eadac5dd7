"""Set-valued gauges of random convex sets on finite scenario models."""

__version__ = "0.1.0"
