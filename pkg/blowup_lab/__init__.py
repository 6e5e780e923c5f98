"""Blow-up laboratory package.

Finite-difference experiments on the blow-up of u_t = Laplace(u) + V(x) u^p for large initial data.
"""

__version__ = "0.1.0"
