"""Energy-filtered Floer complexes, gapped A-infinity structures and corner calculus.

Everything algebraic runs over exact rationals; only the corner smoothing
and admissible-coordinate checks are numerical.
"""

__version__ = "0.1.0"
