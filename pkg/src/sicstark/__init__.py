"""Heisenberg SIC fiducials from Stark units of real quadratic fields."""

__version__ = "0.1.0"
