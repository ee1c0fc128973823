"""Discrete experiments on surfaces of small diameter and large width."""

__version__ = "0.1.0"
