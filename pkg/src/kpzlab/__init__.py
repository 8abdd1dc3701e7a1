"""Exactly solvable models of the KPZ class: LIS and RSK, polynuclear growth, ASEP,
the stochastic heat equation and the Tracy-Widom GUE law."""

__version__ = "0.1.0"
