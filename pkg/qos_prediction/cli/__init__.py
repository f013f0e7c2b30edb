"""Entry points of the ``fiemf`` console script."""

from .main import app, main

__all__ = ["app", "main"]
