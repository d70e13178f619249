"""Entanglement-breaking no-go bench and exact delta-coupled detector solver."""

__version__ = "0.1.0"
