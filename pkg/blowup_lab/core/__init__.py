"""Numerical core: grids, problems, the integrator and the blow-up diagnostics."""
