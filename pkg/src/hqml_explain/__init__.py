"""Hybrid quantum-classical classifiers and their global feature importances."""

__version__ = "0.1.0"
