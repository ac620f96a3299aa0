"""Bundled configurations and truth tables."""
