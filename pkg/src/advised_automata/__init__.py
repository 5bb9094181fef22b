"""Simulation laboratory for one-way finite automata with advice."""

__version__ = "0.1.0"
