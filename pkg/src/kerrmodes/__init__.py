"""Numerical verification toolkit for mode analysis of linearized
perturbations of subextreme Kerr black holes."""

__version__ = "0.1.0"
