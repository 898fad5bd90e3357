"""Smooth solutions of X + Y = Z: exact counts, saddle-point estimates,
singular series and circle-method diagnostics."""

__version__ = "0.1.0"
