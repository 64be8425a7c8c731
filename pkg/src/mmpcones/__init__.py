"""Exact divisor-cone geometry for log surface pairs and declared model graphs."""

__version__ = "0.1.0"
