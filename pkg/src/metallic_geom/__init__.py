"""Numerical verification engine for metallic pseudo-Riemannian structures on coordinate charts."""

__version__ = "0.1.0"
