"""Recurrence and transience of lattice random walks via birth-and-death reductions."""

__version__ = "0.1.0"
