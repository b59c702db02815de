"""Soft-decision detection for PAM over a one-tap partial-response channel."""

__version__ = "0.1.0"
