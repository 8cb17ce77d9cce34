"""Simulation and identification toolkit for series-elastic electrostatic-adhesion actuators."""

__version__ = "0.1.0"
