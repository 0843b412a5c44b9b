"""Command-line front end."""

from .commands import cli

__all__ = ["cli"]
