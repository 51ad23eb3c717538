"""Shared numerics and utilities: constants, errors, logging, linear algebra, ODE integration."""
