"""Positive crystalline measures built from stable polynomial pairs."""

__version__ = "0.1.0"
