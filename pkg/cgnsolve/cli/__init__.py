"""
CLI command modules for cgn-solve.

Commands:
- run: solve one problem with one solver and write artifacts
- sweep: repeat a run over values of gamma or lambda-init
- compare: tabulate several artifact directories side by side
- make-data: generate and store a synthetic dataset
"""
