"""Benchmark problems: toy function, closed-form PK models, PBPK model, datasets and registry."""
