"""Equiscope: equilibrium computation for DAG-structured stochastic games.

Solves multiplayer, general-sum stochastic games whose states form a DAG and
whose players hold persistent private types, then measures how far the
computed profile is from a Nash equilibrium.
"""

__version__ = "0.1.0"
