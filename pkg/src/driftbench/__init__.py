"""Nonparametric drift estimation for periodic diffusions: simulation, estimation and posterior sampling."""

__version__ = "0.1.0"
