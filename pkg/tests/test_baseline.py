"""
Tests for cgnsolve.solvers.baseline (multi-start Levenberg-Marquardt).
"""

import numpy as np
import pytest

from cgnsolve.core.utils import ConfigError, ContractViolationError, JacobianFailureError
from cgnsolve.problems.base import Problem
from cgnsolve.problems.pk import flipflop_problem
from cgnsolve.problems.toy import toy_problem
from cgnsolve.solvers.baseline import (
    STATUS_CONVERGED,
    STATUS_EVAL_BUDGET,
    STATUS_FAILED,
    STATUS_STALLED,
    LmConfig,
    fd_jacobian,
    lm_multistart,
    lm_single,
    total_evaluations,
)
from cgnsolve.solvers.evaluation import EvaluationCounter
from tests.conftest import AFFINE_B


def assert_accounting(result, n):
    """Each step costs one trial, plus n Jacobian columns after an accepted step."""
    history = result.history
    assert history[0].evaluations == 1
    for previous, step in zip(history, history[1:]):
        assert step.evaluations - previous.evaluations == (1 + n if previous.accepted else 1)
    assert result.evals_used - history[-1].evaluations in (0, n)


@pytest.mark.unit
class TestFdJacobian:
    """Tests for fd_jacobian."""

    @pytest.mark.parametrize("fd_step", [1e-6, 1e-3])
    def test_affine_exact(self, affine_problem, fd_step):
        """Affine models give the slope for any step."""
        J = fd_jacobian(affine_problem, [0.4, -1.1], fd_step)
        assert np.allclose(J, AFFINE_B, atol=1e-7)

    def test_counter(self, affine_problem):
        """n evaluations with the base output given, n + 1 without."""
        counter = EvaluationCounter()
        x = np.array([0.1, 0.2])
        fd_jacobian(affine_problem, x, 1e-6, y0=affine_problem.evaluate(x), counter=counter)
        assert counter.count == 2
        fd_jacobian(affine_problem, x, 1e-6, counter=counter)
        assert counter.count == 5

    def test_flipflop_matches_central_difference(self):
        """Forward differences on the flip-flop curve agree with a central-difference reference."""
        problem = flipflop_problem()
        x = np.array([0.2, 0.4, 1.1])
        J = fd_jacobian(problem, x, 1e-6)
        reference = np.empty_like(J)
        for j in range(3):
            h = np.zeros(3)
            h[j] = 1e-5
            reference[:, j] = (problem.evaluate(x + h) - problem.evaluate(x - h)) / 2e-5
        assert np.allclose(J, reference, rtol=1e-3, atol=1e-6)

    def test_perturbed_point_not_evaluable(self):
        """A NOT-EVALUABLE column raises JacobianFailureError."""
        problem = Problem("edge", lambda x: None if x[1] > 1.0 else x.copy(), [-2.0, -2.0], [2.0, 2.0], observed=[0.0, 0.0])
        with pytest.raises(JacobianFailureError) as excinfo:
            fd_jacobian(problem, [0.0, 1.0], 1e-6)
        assert excinfo.value.column == 1

    def test_base_point_not_evaluable(self):
        """The base point itself must evaluate."""
        problem = Problem("none", lambda x: None, [-1.0], [1.0], observed=[0.0])
        with pytest.raises(ContractViolationError):
            fd_jacobian(problem, [0.0], 1e-6)


@pytest.mark.unit
class TestLmSingle:
    """Tests for lm_single."""

    def test_affine_one_step(self, affine_problem):
        """Affine consistent problem converges after one accepted step."""
        result = lm_single(affine_problem, [1.5, 1.5], LmConfig(lambda_init=1e-8))
        assert result.ssr_final <= 1e-12
        assert result.status == STATUS_CONVERGED
        assert sum(step.accepted for step in result.history[1:]) >= 1
        assert_accounting(result, 2)

    def test_quadratic_monotone(self, quadratic_problem):
        """``x^2`` from 1 decreases SSR monotonically to |x| <= 1e-4."""
        result = lm_single(quadratic_problem, [1.0], LmConfig())
        ssr = [step.ssr for step in result.history]
        assert all(b <= a for a, b in zip(ssr, ssr[1:]))
        assert abs(result.x_final[0]) <= 1e-4
        assert result.status == STATUS_CONVERGED
        assert_accounting(result, 1)

    def test_eval_budget(self, quadratic_problem):
        """The evaluation budget is never exceeded."""
        result = lm_single(quadratic_problem, [1.0], LmConfig(max_evals=5))
        assert result.status == STATUS_EVAL_BUDGET
        assert result.evals_used <= 5

    def test_default_budget_is_per_dimension(self):
        """Default budget is 200 evaluations per parameter."""
        assert LmConfig().eval_budget(9) == 1800

    def test_stalled(self):
        """Damping past the cap stops the start as stalled."""
        problem = Problem("cliff", lambda x: None if x[0] < 1.0 else 1000.0 * x, [0.0], [2.0], observed=[0.0])
        result = lm_single(problem, [1.0], LmConfig())
        assert result.status == STATUS_STALLED
        assert result.x_final[0] == 1.0
        assert result.lambda_final > 1e10

    def test_start_not_evaluable(self):
        """A non-evaluable start fails after one evaluation."""
        problem = Problem("none", lambda x: None, [-1.0], [1.0], observed=[0.0])
        result = lm_single(problem, [0.0], LmConfig())
        assert result.status == STATUS_FAILED
        assert result.evals_used == 1
        assert result.ssr_final == float("inf")

    def test_jacobian_failure_is_failed(self):
        """A NOT-EVALUABLE Jacobian column ends the start as failed."""
        problem = Problem("edge", lambda x: None if x[0] > 1.0 else 2.0 * x, [-2.0], [2.0], observed=[0.0])
        result = lm_single(problem, [1.0], LmConfig())
        assert result.status == STATUS_FAILED
        assert result.x_final[0] == 1.0

    @pytest.mark.parametrize("overrides", [{"fd_step": 0.0}, {"lambda_init": 0.0}, {"max_evals": 1}])
    def test_invalid_config(self, quadratic_problem, overrides):
        """Invalid LM settings are a ConfigError."""
        with pytest.raises(ConfigError):
            lm_single(quadratic_problem, [1.0], LmConfig(**overrides))


@pytest.mark.unit
class TestLmMultistart:
    """Tests for lm_multistart."""

    def test_toy_local_minima(self):
        """From the five toy points most starts stop in local minima."""
        problem = toy_problem()
        results = lm_multistart(problem, problem.starts, LmConfig(fd_step=1e-6))
        assert len(results) == 5
        assert sum(r.ssr_final > 0.1 for r in results) >= 3
        for result in results:
            assert_accounting(result, 1)

    def test_empty(self, affine_problem):
        """No starts, no results."""
        assert lm_multistart(affine_problem, np.zeros((2, 0)), LmConfig()) == []

    def test_identical_starts(self, affine_problem):
        """Identical starts give identical results."""
        starts = np.tile([[0.9], [-1.2]], (1, 3))
        results = lm_multistart(affine_problem, starts, LmConfig())
        assert [r.start_index for r in results] == [0, 1, 2]
        for result in results[1:]:
            assert np.array_equal(result.x_final, results[0].x_final)
            assert result.ssr_final == results[0].ssr_final
            assert result.evals_used == results[0].evals_used

    def test_workers_do_not_change_results(self, affine_problem):
        """Parallel starts are reduced in start order."""
        starts = np.random.default_rng(8).uniform(-2, 2, (2, 6))
        serial = lm_multistart(affine_problem, starts, LmConfig(), workers=1)
        parallel = lm_multistart(affine_problem, starts, LmConfig(), workers=3)
        assert [r.ssr_final for r in serial] == [r.ssr_final for r in parallel]
        assert total_evaluations(serial) == total_evaluations(parallel)

    def test_wrong_shape(self, affine_problem):
        """Starts must have one row per parameter."""
        with pytest.raises(ContractViolationError):
            lm_multistart(affine_problem, np.zeros((3, 2)), LmConfig())
