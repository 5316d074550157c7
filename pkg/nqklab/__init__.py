"""Neural quantum kernel laboratory."""

__version__ = "0.1.0"
