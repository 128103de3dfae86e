"""Spectral simulator for a stochastic gravity-current model with random inlet flux."""

__version__ = "0.1.0"
