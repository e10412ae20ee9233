"""Kirchhoff plate model of conflict impact on a socio-economic "fabric"."""

__version__ = "0.1.0"
