"""
cgn-solve - Cluster Gauss-Newton method for nonlinear least squares

This package provides:
- The Cluster Gauss-Newton (CGN) solver for finding many approximate minimisers at once
- A multi-start Levenberg-Marquardt baseline with identical evaluation accounting
- A stiff Rosenbrock ODE integrator and the pharmacokinetic benchmark problems
- An experiment harness and the `cgn-solve` command line interface
"""

__version__ = "1.0.0"
