"""
Reduction stages: partition problem to chain instances to layered Markov chains.
"""
