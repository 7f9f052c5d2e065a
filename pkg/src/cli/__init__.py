"""Command-line interface for mgmask."""

from .main import cli

__all__ = ["cli"]
