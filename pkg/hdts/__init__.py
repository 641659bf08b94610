"""Finite higher-dimensional transition systems: constructions, reflections and lifting machinery."""
