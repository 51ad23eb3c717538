"""Experiment runner: specs, artifacts, sweeps and cross-run comparison."""
