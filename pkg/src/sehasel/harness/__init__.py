"""Scenario configs, simulation engine, metrics, trace files and the command line."""
