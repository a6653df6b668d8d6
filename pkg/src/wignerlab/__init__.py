"""Random-matrix universality laboratory.

Samples Wigner/GUE ensembles, evolves them under Ornstein-Uhlenbeck /
Dyson Brownian motion dynamics, computes spectral and local-equilibrium
statistics, and exhibits the sine-kernel limit at desk scale.
"""

__version__ = "0.1.0"
