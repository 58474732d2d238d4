"""Workbench for Cayley automatic representations of groups."""

__version__ = "0.1.0"
