"""
Solver modules.

This subpackage contains:
- cgn: the Cluster Gauss-Newton method
- baseline: multi-start Levenberg-Marquardt with finite-difference Jacobians
- evaluation: evaluation counting and ordered parallel maps shared by both
"""
