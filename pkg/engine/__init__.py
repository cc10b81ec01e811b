"""
Solvers, oracles and generators for minimal witnessing subsystems.
"""
