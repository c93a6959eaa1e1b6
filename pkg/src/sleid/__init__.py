"""Self-learning ensemble pipeline for detecting illicit blockchain accounts."""

__version__ = "0.1.0"
