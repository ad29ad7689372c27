"""Constraint-based static type analysis for a subset of Q."""
from .cli import Config, analyze_source, run
from .signatures import load_signatures

__all__ = ["Config", "analyze_source", "load_signatures", "run"]
