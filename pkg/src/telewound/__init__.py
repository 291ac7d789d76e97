"""Telewound: wound segmentation, sizing, and remote care workflow toolkit."""

__version__ = "0.1.0"
