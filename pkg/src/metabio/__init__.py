"""Simulations of algorithmic evolution toward Chaitin's Omega, classical and quantum."""

__version__ = "0.1.0"
