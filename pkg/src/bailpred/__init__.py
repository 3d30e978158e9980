"""Bail judgment pipeline: extraction, corpus analytics, statute-aware prediction, evaluation."""

__version__ = "0.1.0"
