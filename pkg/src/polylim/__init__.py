"""Exact series, dominant-balance asymptotics and Monte Carlo for staircase and self-avoiding polygons."""

__version__ = "0.1.0"
