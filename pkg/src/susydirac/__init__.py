"""Supersymmetric Dirac Hamiltonians in one dimension via the Witten model."""

__version__ = "0.1.0"
