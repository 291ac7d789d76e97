"""Bundled data files: architecture presets, body map, help text."""
