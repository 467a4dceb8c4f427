"""Shipped toy fixtures: a faceted medicine schedule, a basic catalogue code,
a small English lexical hierarchy, the core entity-type graph, and the CSV
datasets behind the book example."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def fixture_path(name: str) -> Path:
    """Filesystem path of a shipped fixture file."""
    path = resources.files(__package__) / name
    return Path(str(path))


def fixture_text(name: str) -> str:
    return fixture_path(name).read_text(encoding="utf-8")
