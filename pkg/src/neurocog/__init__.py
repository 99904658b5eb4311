"""Procedural NeuroCognition task environments (text RAPM, SWM, WCST), agent harness and scoring."""

__version__ = "0.1.0"
