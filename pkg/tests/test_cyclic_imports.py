"""
Import smoke tests.

Ensures every cgnsolve module imports without ImportError or recursion errors, in any order.
"""

import importlib

import pytest

MODULES = (
    "cgnsolve.core.utils",
    "cgnsolve.core.linalg",
    "cgnsolve.core.ode",
    "cgnsolve.core.random_streams",
    "cgnsolve.solvers.cgn",
    "cgnsolve.solvers.baseline",
    "cgnsolve.problems.registry",
    "cgnsolve.problems.datasets",
    "cgnsolve.harness.experiment",
    "cgnsolve.cli.app",
)


@pytest.mark.parametrize("module_name", MODULES)
def test_module_import_no_cyclic_error(module_name):
    """Importing a cgnsolve module should not cause ImportError or RecursionError."""
    try:
        importlib.import_module(module_name)
    except (ImportError, RecursionError) as e:
        pytest.fail(f"Cyclic import or recursion error in {module_name}: {e}")


def test_cli_app_exposes_main():
    """The console-script target exists and is callable."""
    module = importlib.import_module("cgnsolve.cli.app")
    assert callable(module.main)
