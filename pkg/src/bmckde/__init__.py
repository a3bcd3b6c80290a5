"""Adaptive kernel density estimation for bifurcating Markov chains."""

__version__ = "0.1.0"
