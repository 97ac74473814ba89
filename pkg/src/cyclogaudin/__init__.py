"""Cyclotomic Gaudin models with irregular singularity: construction and checks."""

__version__ = "0.1.0"
