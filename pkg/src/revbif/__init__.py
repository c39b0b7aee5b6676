"""Reversible Hamiltonian normal forms and symmetric periodic orbit branches."""

__version__ = "0.1.0"
