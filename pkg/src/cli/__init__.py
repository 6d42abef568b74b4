"""Command-line front end: argument parsing, config, manifests and output."""

from .commands import main

__all__ = ["main"]
